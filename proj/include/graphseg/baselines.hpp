#ifndef GRAPHSEG_BASELINES_HPP
#define GRAPHSEG_BASELINES_HPP

// Reference methods: isotonic regression by pool adjacent violators, least
// squares line, exhaustive enumeration of segmentations, and a Viterbi pass
// over a finite set of parameter values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "graphseg/error.hpp"
#include "graphseg/graph.hpp"
#include "graphseg/losses.hpp"
#include "graphseg/solver.hpp"

namespace graphseg {

/// Nondecreasing weighted least-squares fit.
inline std::vector<double> pava_l2(std::span<const double> y,
                                   std::span<const double> w = {}) {
  if (y.empty()) throw contract_error("pava_l2: empty data");
  if (!w.empty() && w.size() != y.size())
    throw contract_error("pava_l2: weights length differs from data length");
  struct Block {
    double mean, weight;
    std::size_t count;
  };
  std::vector<Block> stack;
  stack.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (!(wi > 0.0)) throw contract_error("pava_l2: weights must be positive");
    Block b{y[i], wi, 1};
    while (!stack.empty() && stack.back().mean >= b.mean) {
      const Block& top = stack.back();
      const double tw = top.weight + b.weight;
      b = {(top.mean * top.weight + b.mean * b.weight) / tw, tw, top.count + b.count};
      stack.pop_back();
    }
    stack.push_back(b);
  }
  std::vector<double> fit;
  fit.reserve(y.size());
  for (const Block& b : stack) fit.insert(fit.end(), b.count, b.mean);
  return fit;
}

/// Ordinary least squares on the index 1..n.
inline std::vector<double> linear_fit(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n == 0) throw contract_error("linear_fit: empty data");
  if (n == 1) return {y[0]};
  const double xbar = (static_cast<double>(n) + 1.0) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - xbar;
    sxy += dx * (y[i] - ybar);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  std::vector<double> fit(n);
  for (std::size_t i = 0; i < n; ++i)
    fit[i] = ybar + slope * (static_cast<double>(i + 1) - xbar);
  return fit;
}

// --------------------------------------------------- exhaustive oracle

enum class SegmentCount { Free, Exact, AtLeastLength };

/// Segmentation structures that the exhaustive oracle enumerates: any
/// number of segments, exactly `value` segments, or segments of length at
/// least `value`.
struct Structure {
  SegmentCount kind = SegmentCount::Free;
  std::size_t value = 0;
};

/// Minimal penalised cost over all segmentations compatible with `structure`,
/// each segment at its closed-form estimate, beta per change. n <= 14.
inline double exhaustive_segmentation_oracle(std::span<const double> y,
                                             Structure structure,
                                             const LossSpec& loss, double beta,
                                             Interval domain,
                                             std::span<const double> w = {}) {
  const std::size_t n = y.size();
  if (n == 0 || n > 14)
    throw contract_error("exhaustive_segmentation_oracle: need 1 <= n <= 14");
  auto segment_cost = [&](std::size_t b, std::size_t e) {
    auto ys = y.subspan(b, e - b);
    auto ws = w.empty() ? w : w.subspan(b, e - b);
    const double theta = segment_mle(loss, ys, ws, domain);
    double c = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i)
      c += (ws.empty() ? 1.0 : ws[i]) * loss.weight * loss_value(loss, ys[i], theta);
    return c;
  };
  double best = kInf;
  const std::uint32_t masks = 1u << (n - 1);
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    // Bit i set: a segment ends after point i.
    std::size_t segments = 1, start = 0, shortest_len = n;
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool end = i + 1 == n || (mask >> i & 1u);
      if (!end) continue;
      shortest_len = std::min(shortest_len, i + 1 - start);
      cost += segment_cost(start, i + 1);
      start = i + 1;
      if (i + 1 < n) ++segments;
    }
    if (structure.kind == SegmentCount::Exact && segments != structure.value) continue;
    if (structure.kind == SegmentCount::AtLeastLength && shortest_len < structure.value)
      continue;
    best = std::min(best, cost + beta * static_cast<double>(segments - 1));
  }
  return best;
}

// ---------------------------------------------------------- grid oracle

struct GridOracleResult {
  double cost = kInf;  // penalised
  std::vector<std::size_t> states;
  std::vector<double> means;
  std::size_t values = 0;  // size of the parameter set searched
};

/// Candidate parameter values: a uniform grid over the solver's working
/// domain, finite node-range bounds, and images of those under repeated
/// decay so that decay transitions stay exact.
inline std::vector<double> oracle_values(Interval domain, const CompiledGraph& g,
                                         std::size_t grid_size, std::size_t n) {
  std::vector<double> v;
  v.reserve(grid_size + 2 * g.ranges.size());
  const double width = domain.upper - domain.lower;
  for (std::size_t i = 0; i < grid_size; ++i)
    v.push_back(domain.lower +
                width * (static_cast<double>(i) / static_cast<double>(grid_size - 1)));
  for (const Interval& r : g.ranges) {
    if (domain.contains(r.lower)) v.push_back(r.lower);
    if (domain.contains(r.upper)) v.push_back(r.upper);
  }
  std::vector<double> decays;
  for (const auto& e : g.edges)
    if (e.type == EdgeType::Null && e.decay != 1.0) decays.push_back(e.decay);
  std::sort(decays.begin(), decays.end());
  decays.erase(std::unique(decays.begin(), decays.end()), decays.end());
  if (!decays.empty()) {
    std::vector<double> frontier = v;
    for (std::size_t k = 1; k < n; ++k) {
      std::vector<double> next;
      for (double x : frontier)
        for (double a : decays) {
          const double y = a * x;
          if (domain.contains(y)) next.push_back(y);
        }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      v.insert(v.end(), next.begin(), next.end());
      frontier = std::move(next);
    }
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Exact Viterbi over (state, value) with all edge constraints checked on
/// the finite value set. Its cost bounds the true optimum from above.
inline GridOracleResult grid_dp_oracle(std::span<const double> y, const Graph& graph,
                                       const LossSpec& loss, std::size_t grid_size,
                                       std::span<const double> w = {},
                                       bool want_path = false) {
  if (grid_size < 101) throw contract_error("grid_dp_oracle: grid_size must be >= 101");
  detail::check_inputs(y, w, loss);
  const CompiledGraph g = compile(graph, loss);
  const Interval domain = working_domain(y, graph, loss);
  const Basis basis = basis_of(loss.family);
  const auto V = oracle_values(domain, g, grid_size, y.size());
  const std::size_t m = V.size();
  const std::size_t n = y.size();
  const std::size_t S = g.states.size();
  auto weight = [&](std::size_t t) { return (w.empty() ? 1.0 : w[t]) * loss.weight; };
  auto index_of = [&](double x) -> std::ptrdiff_t {
    auto it = std::lower_bound(V.begin(), V.end(), x);
    if (it == V.end() || *it != x) return -1;
    return it - V.begin();
  };

  struct Back {
    std::uint32_t edge, from;
  };
  std::vector<std::vector<Back>> back;  // back[t][s * m + j]
  std::vector<double> cur(S * m, kInf), nxt(S * m);
  for (std::size_t s = 0; s < S; ++s) {
    if (!g.is_start[s]) continue;
    for (std::size_t j = 0; j < m; ++j)
      if (g.ranges[s].contains(V[j]))
        cur[s * m + j] = weight(0) * loss_value(loss, y[0], V[j], g.start_robust[s]);
  }
  std::vector<double> op(m);
  std::vector<std::uint32_t> arg(m);
  for (std::size_t t = 1; t < n; ++t) {
    std::fill(nxt.begin(), nxt.end(), kInf);
    std::vector<Back> bk;
    if (want_path) bk.assign(S * m, Back{0, 0});
    for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
      const CompiledEdge& e = g.edges[ei];
      const double* q = &cur[e.from * m];
      std::fill(op.begin(), op.end(), kInf);
      switch (e.type) {
        case EdgeType::Null:
          for (std::size_t j = 0; j < m; ++j) {
            if (!std::isfinite(q[j])) continue;
            const std::ptrdiff_t k = e.decay == 1.0 ? static_cast<std::ptrdiff_t>(j)
                                                    : index_of(e.decay * V[j]);
            if (k >= 0 && q[j] < op[k]) {
              op[k] = q[j];
              arg[k] = static_cast<std::uint32_t>(j);
            }
          }
          break;
        case EdgeType::Std: {
          std::size_t best = 0;
          for (std::size_t j = 1; j < m; ++j)
            if (q[j] < q[best]) best = j;
          for (std::size_t j = 0; j < m; ++j) {
            op[j] = q[best];
            arg[j] = static_cast<std::uint32_t>(best);
          }
          break;
        }
        case EdgeType::Up:
        case EdgeType::Down: {
          const bool up = e.type == EdgeType::Up;
          const double r = detail::ratio_of(e.gap);
          // Running minimum of q in sweep order.
          std::vector<double> run(m);
          std::vector<std::uint32_t> run_arg(m);
          for (std::size_t k = 0; k < m; ++k) {
            const std::size_t j = up ? k : m - 1 - k;
            const std::size_t p = up ? j - 1 : j + 1;
            if (k == 0 || q[j] < run[p]) {
              run[j] = q[j];
              run_arg[j] = static_cast<std::uint32_t>(j);
            } else {
              run[j] = run[p];
              run_arg[j] = run_arg[p];
            }
          }
          for (std::size_t j = 0; j < m; ++j) {
            double bound;
            if (basis == Basis::LinLog)
              bound = up ? V[j] / r : r * V[j];
            else
              bound = up ? V[j] - e.gap : V[j] + e.gap;
            if (up) {
              // Largest index with V <= bound.
              auto it = std::upper_bound(V.begin(), V.end(), bound);
              if (it == V.begin()) continue;
              const std::size_t k = static_cast<std::size_t>(it - V.begin()) - 1;
              op[j] = run[k];
              arg[j] = run_arg[k];
            } else {
              auto it = std::lower_bound(V.begin(), V.end(), bound);
              if (it == V.end()) continue;
              const std::size_t k = static_cast<std::size_t>(it - V.begin());
              op[j] = run[k];
              arg[j] = run_arg[k];
            }
          }
          break;
        }
        case EdgeType::Abs:
          break;
      }
      double* out = &nxt[e.to * m];
      const Interval range = g.ranges[e.to];
      for (std::size_t j = 0; j < m; ++j) {
        if (!std::isfinite(op[j]) || !range.contains(V[j])) continue;
        const double v = op[j] + e.penalty +
                         weight(t) * loss_value(loss, y[t], V[j], e.robust);
        if (v < out[j]) {
          out[j] = v;
          if (want_path) bk[e.to * m + j] = {static_cast<std::uint32_t>(ei), arg[j]};
        }
      }
    }
    if (want_path) back.push_back(std::move(bk));
    std::swap(cur, nxt);
  }
  GridOracleResult res;
  res.values = m;
  std::size_t bs = 0, bj = 0;
  for (std::size_t s = 0; s < S; ++s) {
    if (!g.is_end[s]) continue;
    for (std::size_t j = 0; j < m; ++j)
      if (cur[s * m + j] < res.cost) {
        res.cost = cur[s * m + j];
        bs = s;
        bj = j;
      }
  }
  if (!want_path || !std::isfinite(res.cost)) return res;
  res.states.assign(n, 0);
  res.means.assign(n, 0.0);
  for (std::size_t t = n; t-- > 0;) {
    res.states[t] = bs;
    res.means[t] = V[bj];
    if (t == 0) break;
    const Back b = back[t - 1][bs * m + bj];
    bs = g.edges[b.edge].from;
    bj = b.from;
  }
  return res;
}

}  // namespace graphseg

#endif  // GRAPHSEG_BASELINES_HPP

#ifndef GRAPHSEG_SOLVER_HPP
#define GRAPHSEG_SOLVER_HPP

// Forward functional dynamic programming over a constraint graph and
// backtracking of the optimal state and parameter sequence.
//
// For the LinLog basis an up/down gap is a ratio r: up means
// mu[t+1] >= r * mu[t] and down means mu[t] >= r * mu[t+1]; gap 0 stands
// for r = 1. The LogLog basis allows no gap and no decay.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphseg/error.hpp"
#include "graphseg/graph.hpp"
#include "graphseg/losses.hpp"
#include "graphseg/piecewise.hpp"

namespace graphseg {

/// Absolute tolerance for edge constraints and forced flags.
inline constexpr double kFeasTol = 1e-8;

struct Segmentation {
  std::vector<std::size_t> changepoints;  // 1-based last index per segment
  std::vector<std::string> states;
  std::vector<int> forced;                // one per change
  std::vector<double> parameters;         // value at the segment's last index
  double globalCost = 0.0;                // unpenalised
};

/// Per-time optimal states, parameters and incoming edges. edges[0] is
/// unused; edges[t] is the compiled edge taken from t-1 to t (0-based).
struct Path {
  std::vector<std::size_t> states;
  std::vector<double> means;
  std::vector<std::size_t> edges;
};

struct SolverTrace {
  Interval domain;
  CompiledGraph graph;
  LossSpec loss;
  std::vector<double> data;
  std::vector<double> weights;                  // empty: all 1
  std::vector<std::vector<FunctionalCost>> costs;  // costs[t][s]
  std::size_t max_pieces = 0;

  double weight(std::size_t t) const {
    return weights.empty() ? 1.0 : weights[t];
  }
};

struct Solution {
  Segmentation segmentation;
  Path path;
  double penalized_cost = 0.0;
  std::size_t max_pieces = 0;
};

/// Finite interval holding the optimal parameters for `data` under `loss`,
/// widened to hold the graph's gaps and finite node bounds.
inline Interval working_domain(std::span<const double> data, const Graph& graph,
                               const LossSpec& loss) {
  if (data.empty()) throw contract_error("working_domain: empty data");
  const auto [mn_it, mx_it] = std::minmax_element(data.begin(), data.end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  const double r = std::max(1.0, 0.1 * (mx - mn));
  double gap_sum = 0.0;
  double ratio = 1.0;
  for (const Edge& e : graph.edges)
    if (e.type == EdgeType::Up || e.type == EdgeType::Down ||
        e.type == EdgeType::Abs) {
      gap_sum += e.gap;
      ratio = std::max(ratio, e.gap);
    }
  Interval d;
  switch (basis_of(loss.family)) {
    case Basis::L2:
      d = {mn - r - gap_sum, mx + r + gap_sum};
      break;
    case Basis::LinLog: {
      double top = 0.0;
      if (loss.family == Family::Poisson) {
        top = mx + r;
      } else {
        // Rate 1/y or precision 1/y^2 of the smallest positive magnitude.
        double small = kInf;
        for (double y : data) {
          const double m = loss.family == Family::Exponential ? y : y * y;
          if (m > 0.0) small = std::min(small, m);
        }
        top = std::isfinite(small) ? 1.1 / small + 1.0 : 1.0;
      }
      d = {kBasisEpsilon, top * ratio};
      break;
    }
    case Basis::LogLog:
      d = {kBasisEpsilon, 1.0 - kBasisEpsilon};
      break;
  }
  for (const NodeRange& nr : graph.node_ranges) {
    if (std::isfinite(nr.min)) d.lower = std::min(d.lower, nr.min);
    if (std::isfinite(nr.max)) d.upper = std::max(d.upper, nr.max);
  }
  return clip_to_basis(basis_of(loss.family), d);
}

namespace detail {

inline double ratio_of(double gap) { return gap == 0.0 ? 1.0 : gap; }

/// Operator of one compiled edge applied to Q (the source state's cost).
inline FunctionalCost apply_edge(const CompiledEdge& e, const FunctionalCost& q,
                                 Interval domain) {
  const Basis basis = q.basis();
  switch (e.type) {
    case EdgeType::Null:
      if (e.decay == 1.0) return q;
      return with_domain(scale_argument(q, e.decay), domain);
    case EdgeType::Std:
      return constant_min(q);
    case EdgeType::Up:
      if (basis == Basis::LinLog) {
        const double r = ratio_of(e.gap);
        auto m = min_over_leq(q, 0.0);
        return r == 1.0 ? m : with_domain(scale_argument(m, r), domain);
      }
      return min_over_leq(q, e.gap);
    case EdgeType::Down:
      if (basis == Basis::LinLog) {
        const double r = ratio_of(e.gap);
        auto m = min_over_geq(q, 0.0);
        return r == 1.0 ? m : with_domain(scale_argument(m, 1.0 / r), domain);
      }
      return min_over_geq(q, e.gap);
    case EdgeType::Abs:
      break;
  }
  throw std::logic_error("apply_edge: unexpanded abs edge");
}

/// Set of predecessor parameters allowed by edge `e` given successor `mu`.
/// For null edges the set is the single point mu / decay.
inline Interval feasible_predecessors(const CompiledEdge& e, Basis basis,
                                      Interval domain, double mu) {
  switch (e.type) {
    case EdgeType::Null:
      return {mu / e.decay, mu / e.decay};
    case EdgeType::Std:
      return domain;
    case EdgeType::Up:
      if (basis == Basis::LinLog) return {domain.lower, mu / ratio_of(e.gap)};
      return {domain.lower, mu - e.gap};
    case EdgeType::Down:
      if (basis == Basis::LinLog) return {mu * ratio_of(e.gap), domain.upper};
      return {mu + e.gap, domain.upper};
    case EdgeType::Abs:
      break;
  }
  throw std::logic_error("feasible_predecessors: unexpanded abs edge");
}

inline void check_inputs(std::span<const double> data,
                         std::span<const double> weights, const LossSpec& loss) {
  if (data.empty()) throw contract_error("solve: data must not be empty");
  if (!weights.empty() && weights.size() != data.size())
    throw contract_error("solve: weights length differs from data length");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw contract_error("solve: weights must be positive and finite");
  if (!(loss.weight > 0.0)) throw contract_error("solve: loss weight must be > 0");
  for (double y : data) check_support(loss.family, y, loss.size);
}

}  // namespace detail

/// Forward pass: every Q_t^s for t = 1..n (stored 0-based).
inline SolverTrace forward(std::span<const double> data, const Graph& graph,
                           const LossSpec& loss,
                           std::span<const double> weights = {}) {
  detail::check_inputs(data, weights, loss);
  SolverTrace tr;
  tr.graph = compile(graph, loss);
  tr.loss = loss;
  tr.data.assign(data.begin(), data.end());
  tr.weights.assign(weights.begin(), weights.end());
  tr.domain = working_domain(data, graph, loss);
  const Basis basis = basis_of(loss.family);
  const std::size_t n = data.size();
  const std::size_t S = tr.graph.states.size();
  const auto& edges = tr.graph.edges;
  const FunctionalCost none(basis, tr.domain);

  tr.costs.reserve(n);
  std::vector<FunctionalCost> first;
  first.reserve(S);
  for (std::size_t s = 0; s < S; ++s) {
    if (!tr.graph.is_start[s]) {
      first.push_back(none);
      continue;
    }
    auto q = loss_cost(loss, data[0], tr.domain, tr.graph.start_robust[s],
                       tr.weight(0));
    first.push_back(restrict_to(q, tr.graph.ranges[s]));
  }
  tr.costs.push_back(std::move(first));

  // Incoming edges grouped by robust parameters so that the loss is added
  // once per group.
  struct Group {
    Robust robust;
    std::vector<std::size_t> edges;
  };
  std::vector<std::vector<Group>> groups(S);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto& gs = groups[edges[i].to];
    auto it = std::find_if(gs.begin(), gs.end(), [&](const Group& g) {
      return g.robust.K == edges[i].robust.K && g.robust.a == edges[i].robust.a;
    });
    if (it == gs.end())
      gs.push_back({edges[i].robust, {i}});
    else
      it->edges.push_back(i);
  }

  for (std::size_t t = 1; t < n; ++t) {
    const auto& prev = tr.costs[t - 1];
    std::vector<FunctionalCost> next;
    next.reserve(S);
    for (std::size_t s = 0; s < S; ++s) {
      std::optional<FunctionalCost> best;
      for (const Group& g : groups[s]) {
        std::optional<FunctionalCost> inner;
        for (std::size_t i : g.edges) {
          const CompiledEdge& e = edges[i];
          if (prev[e.from].empty()) continue;
          auto o = add_constant(detail::apply_edge(e, prev[e.from], tr.domain),
                                e.penalty);
          inner = inner ? pointwise_min(*inner, o) : std::move(o);
        }
        if (!inner) continue;
        auto cand = add_piecewise(
            *inner, loss_cost(loss, data[t], tr.domain, g.robust, tr.weight(t)));
        best = best ? pointwise_min(*best, cand) : std::move(cand);
      }
      if (!best) {
        next.push_back(none);
        continue;
      }
      next.push_back(restrict_to(*best, tr.graph.ranges[s]));
    }
    for (const auto& q : next) tr.max_pieces = std::max(tr.max_pieces, q.size());
    tr.costs.push_back(std::move(next));
  }
  for (const auto& q : tr.costs.front())
    tr.max_pieces = std::max(tr.max_pieces, q.size());
  return tr;
}

/// Optimal per-time states and parameters; throws infeasible_error when no
/// end state is reachable.
inline Path backtrack(const SolverTrace& tr) {
  const std::size_t n = tr.costs.size();
  const std::size_t S = tr.graph.states.size();
  const Basis basis = basis_of(tr.loss.family);
  Path path;
  path.states.assign(n, 0);
  path.means.assign(n, 0.0);
  path.edges.assign(n, 0);

  Minimum best;
  std::size_t best_state = S;
  for (std::size_t s = 0; s < S; ++s) {
    if (!tr.graph.is_end[s]) continue;
    const auto m = global_min(tr.costs[n - 1][s]);
    if (m.value < best.value) {
      best = m;
      best_state = s;
    }
  }
  if (best_state == S)
    throw infeasible_error("no graph-valid path exists for this data");
  path.states[n - 1] = best_state;
  path.means[n - 1] = best.argmin;

  const auto& edges = tr.graph.edges;
  for (std::size_t t = n - 1; t > 0; --t) {
    const std::size_t s = path.states[t];
    const double mu = path.means[t];
    const double target = tr.costs[t][s].value_or_inf(mu);
    // Value through each incoming edge at mu.
    double vmin = kInf;
    std::vector<std::pair<std::size_t, Minimum>> cands;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const CompiledEdge& e = edges[i];
      if (e.to != s) continue;
      const FunctionalCost& q = tr.costs[t - 1][e.from];
      if (q.empty()) continue;
      const Interval feas =
          intersect(detail::feasible_predecessors(e, basis, tr.domain, mu),
                    tr.domain);
      Minimum m = min_on(q, feas);
      if (!std::isfinite(m.value)) continue;
      const double v =
          m.value + e.penalty +
          tr.loss.weight * tr.weight(t) *
              loss_value(tr.loss, tr.data[t], mu, e.robust);
      cands.push_back({i, {v, m.argmin}});
      vmin = std::min(vmin, v);
    }
    if (cands.empty())
      throw std::logic_error("backtrack: no feasible predecessor at t = " +
                             std::to_string(t + 1));
    if (std::abs(vmin - target) > 1e-6 * (1.0 + std::abs(target)))
      throw std::logic_error("backtrack: inconsistent trace at t = " +
                             std::to_string(t + 1));
    for (const auto& [i, m] : cands) {
      if (m.value <= vmin + 1e-10 * (1.0 + std::abs(vmin))) {
        const CompiledEdge& e = edges[i];
        path.edges[t] = i;
        path.states[t - 1] = e.from;
        path.means[t - 1] = e.type == EdgeType::Null ? mu / e.decay : m.argmin;
        break;
      }
    }
  }
  return path;
}

/// gamma summed along the path (penalties excluded).
inline double global_cost(const SolverTrace& tr, const Path& p) {
  double total = 0.0;
  for (std::size_t t = 0; t < p.means.size(); ++t) {
    const Robust r = t == 0 ? tr.graph.start_robust[p.states[0]]
                            : tr.graph.edges[p.edges[t]].robust;
    total += tr.loss.weight * tr.weight(t) *
             loss_value(tr.loss, tr.data[t], p.means[t], r);
  }
  return total;
}

inline double penalized_cost(const SolverTrace& tr, const Path& p) {
  double total = global_cost(tr, p);
  for (std::size_t t = 1; t < p.edges.size(); ++t)
    total += tr.graph.edges[p.edges[t]].penalty;
  return total;
}

/// Run-length encoding of (state, parameter) sequences. A new segment starts
/// when the state changes or the parameter leaves the decay relation
/// mu[t+1] = decay(state) * mu[t]. `decay` maps state name to its null
/// self-edge decay (1 when absent).
inline Segmentation compress_path(
    const std::vector<std::string>& states, const std::vector<double>& means,
    const std::vector<std::pair<std::string, double>>& decay = {}) {
  if (states.size() != means.size())
    throw contract_error("compress_path: length mismatch");
  Segmentation seg;
  const std::size_t n = states.size();
  auto alpha = [&](const std::string& s) {
    for (const auto& [name, d] : decay)
      if (name == s) return d;
    return 1.0;
  };
  for (std::size_t t = 0; t < n; ++t) {
    const bool last = t + 1 == n;
    const bool change =
        last || states[t + 1] != states[t] ||
        std::abs(means[t + 1] - alpha(states[t]) * means[t]) >
            1e-12 * (1.0 + std::abs(means[t + 1]));
    if (change) {
      seg.changepoints.push_back(t + 1);
      seg.states.push_back(states[t]);
      seg.parameters.push_back(means[t]);
      if (!last) seg.forced.push_back(0);
    }
  }
  return seg;
}

/// Segmentation of an optimal path, with forced flags taken from the edges
/// crossed at each change.
inline Segmentation compress_path(const SolverTrace& tr, const Path& p) {
  const std::size_t n = p.means.size();
  const Basis basis = basis_of(tr.loss.family);
  Segmentation seg;
  for (std::size_t t = 0; t < n; ++t) {
    const bool last = t + 1 == n;
    bool change = last;
    if (!last) {
      const double alpha = tr.graph.self_decay[p.states[t]];
      change = p.states[t + 1] != p.states[t] ||
               std::abs(p.means[t + 1] - alpha * p.means[t]) >
                   1e-12 * (1.0 + std::abs(p.means[t + 1]));
    }
    if (!change) continue;
    seg.changepoints.push_back(t + 1);
    seg.states.push_back(tr.graph.states[p.states[t]]);
    seg.parameters.push_back(p.means[t]);
    if (last) break;
    const CompiledEdge& e = tr.graph.edges[p.edges[t + 1]];
    const double mu = p.means[t];
    const double next = p.means[t + 1];
    int forced = 0;
    if (e.type == EdgeType::Up) {
      forced = basis == Basis::LinLog
                   ? std::abs(next - detail::ratio_of(e.gap) * mu) <= kFeasTol
                   : std::abs(next - mu - e.gap) <= kFeasTol;
    } else if (e.type == EdgeType::Down) {
      forced = basis == Basis::LinLog
                   ? std::abs(mu - detail::ratio_of(e.gap) * next) <= kFeasTol
                   : std::abs(mu - next - e.gap) <= kFeasTol;
    }
    seg.forced.push_back(forced);
  }
  seg.globalCost = global_cost(tr, p);
  return seg;
}

/// Constraint violations of a path (empty when feasible within kFeasTol).
inline std::vector<std::string> check_path(const SolverTrace& tr,
                                           const Path& p) {
  std::vector<std::string> out;
  const std::size_t n = p.means.size();
  const Basis basis = basis_of(tr.loss.family);
  auto at = [](std::size_t t) { return " at t = " + std::to_string(t + 1); };
  if (!tr.graph.is_start[p.states[0]]) out.push_back("path does not begin in a start state");
  if (!tr.graph.is_end[p.states[n - 1]]) out.push_back("path does not end in an end state");
  for (std::size_t t = 0; t < n; ++t) {
    const Interval r = tr.graph.ranges[p.states[t]];
    if (p.means[t] < r.lower - kFeasTol || p.means[t] > r.upper + kFeasTol)
      out.push_back("node range violated" + at(t));
    if (t == 0) continue;
    const CompiledEdge& e = tr.graph.edges[p.edges[t]];
    if (e.from != p.states[t - 1] || e.to != p.states[t]) {
      out.push_back("edge does not join consecutive states" + at(t));
      continue;
    }
    const double mu = p.means[t - 1];
    const double next = p.means[t];
    const double rr = detail::ratio_of(e.gap);
    bool ok = true;
    switch (e.type) {
      case EdgeType::Null:
        ok = std::abs(next - e.decay * mu) <= kFeasTol * (1.0 + std::abs(next));
        break;
      case EdgeType::Std:
        break;
      case EdgeType::Up:
        ok = basis == Basis::LinLog ? rr * mu <= next + kFeasTol
                                    : mu + e.gap <= next + kFeasTol;
        break;
      case EdgeType::Down:
        ok = basis == Basis::LinLog ? rr * next <= mu + kFeasTol
                                    : next + e.gap <= mu + kFeasTol;
        break;
      case EdgeType::Abs:
        ok = false;
        break;
    }
    if (!ok)
      out.push_back(std::string(to_string(e.type)) + " constraint violated" + at(t));
  }
  return out;
}

/// Structural invariants of a segmentation of n points.
inline std::vector<std::string> check_segmentation(const Segmentation& s,
                                                   std::size_t n) {
  std::vector<std::string> out;
  const std::size_t k = s.changepoints.size();
  if (k == 0 || s.changepoints.back() != n) out.push_back("last changepoint is not n");
  for (std::size_t i = 1; i < k; ++i)
    if (s.changepoints[i] <= s.changepoints[i - 1])
      out.push_back("changepoints not strictly increasing");
  if (s.states.size() != k || s.parameters.size() != k)
    out.push_back("states/parameters length differs from changepoints");
  if (s.forced.size() + 1 != k) out.push_back("forced length is not segments - 1");
  return out;
}

inline Solution solve_detailed(std::span<const double> data, const Graph& graph,
                               const LossSpec& loss,
                               std::span<const double> weights = {}) {
  const SolverTrace tr = forward(data, graph, loss, weights);
  Solution sol;
  sol.path = backtrack(tr);
  sol.segmentation = compress_path(tr, sol.path);
  sol.penalized_cost = penalized_cost(tr, sol.path);
  sol.max_pieces = tr.max_pieces;
  return sol;
}

/// Penalised maximum-likelihood segmentation of `data` under `graph`.
inline Segmentation solve(std::span<const double> data, const Graph& graph,
                          const LossSpec& loss,
                          std::span<const double> weights = {}) {
  return solve_detailed(data, graph, loss, weights).segmentation;
}

}  // namespace graphseg

#endif  // GRAPHSEG_SOLVER_HPP

#ifndef GRAPHSEG_PIECEWISE_HPP
#define GRAPHSEG_PIECEWISE_HPP

// Piecewise analytic functions of one real parameter theta.
//
// Each piece holds coefficients (a, b, c) of a fixed three-function basis:
//   L2     : a + b*theta + c*theta^2
//   LinLog : a + b*theta + c*log(theta)            theta > 0
//   LogLog : a + b*log(theta) + c*log(1 - theta)   0 < theta < 1
//
// A FunctionalCost lives on a finite working domain. Pieces are closed
// intervals sorted by position with disjoint interiors; a region of the
// domain that no piece covers has value +infinity (infeasible). At a shared
// endpoint the function takes the smaller of the touching pieces, so values
// are lower semicontinuous and infima are attained. A zero-width piece
// represents an isolated feasible point (e.g. a node range min == max).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "graphseg/error.hpp"

namespace graphseg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Distance kept from the open ends of the LinLog and LogLog domains.
inline constexpr double kBasisEpsilon = 1e-9;

enum class Basis { L2, LinLog, LogLog };

inline const char* to_string(Basis basis) {
  switch (basis) {
    case Basis::L2: return "L2";
    case Basis::LinLog: return "LinLog";
    case Basis::LogLog: return "LogLog";
  }
  return "?";
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return lower <= x && x <= upper; }
  bool empty() const { return !(lower <= upper); }
  double width() const { return upper - lower; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval intersect(Interval x, Interval y) {
  return {std::max(x.lower, y.lower), std::min(x.upper, y.upper)};
}

struct Piece {
  double lower = 0.0;
  double upper = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  bool is_point() const { return lower == upper; }
  bool same_coefficients(const Piece& o) const {
    return a == o.a && b == o.b && c == o.c;
  }
  friend bool operator==(const Piece&, const Piece&) = default;
};

/// a + b*phi2(theta) + c*phi3(theta). Zero coefficients never touch the log.
inline double eval_basis(Basis basis, double a, double b, double c,
                         double theta) {
  switch (basis) {
    case Basis::L2:
      return a + theta * (b + c * theta);
    case Basis::LinLog:
      return a + b * theta + (c == 0.0 ? 0.0 : c * std::log(theta));
    case Basis::LogLog:
      return a + (b == 0.0 ? 0.0 : b * std::log(theta)) +
             (c == 0.0 ? 0.0 : c * std::log1p(-theta));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double eval_piece(Basis basis, const Piece& p, double theta) {
  return eval_basis(basis, p.a, p.b, p.c, theta);
}

/// Open domain of the basis functions, pulled in by kBasisEpsilon.
inline Interval clip_to_basis(Basis basis, Interval d) {
  switch (basis) {
    case Basis::L2:
      break;
    case Basis::LinLog:
      if (d.lower <= 0.0) d.lower = kBasisEpsilon;
      break;
    case Basis::LogLog:
      if (d.lower <= 0.0) d.lower = kBasisEpsilon;
      if (d.upper >= 1.0) d.upper = 1.0 - kBasisEpsilon;
      break;
  }
  return d;
}

namespace detail {

// a*b - c*d with a single rounding error (Kahan).
inline double diff_of_products(double a, double b, double c, double d) {
  const double w = d * c;
  const double e = std::fma(-d, c, w);
  const double f = std::fma(a, b, -w);
  return f + e;
}

// Zero of the derivative strictly inside (lower, upper), if any. Every basis
// has at most one, so each piece splits into at most two monotone parts.
inline std::optional<double> stationary_point(Basis basis, double b, double c,
                                              double lower, double upper) {
  double s = std::numeric_limits<double>::quiet_NaN();
  switch (basis) {
    case Basis::L2:
      if (c != 0.0) s = -b / (2.0 * c);
      break;
    case Basis::LinLog:
      // b + c/theta = 0
      if (b != 0.0 && c != 0.0) s = -c / b;
      break;
    case Basis::LogLog:
      // b/theta - c/(1 - theta) = 0
      if (b + c != 0.0) s = b / (b + c);
      break;
  }
  if (std::isfinite(s) && lower < s && s < upper) return s;
  return std::nullopt;
}

inline bool ulp_close(double u, double v) {
  constexpr double eps = 64 * std::numeric_limits<double>::epsilon();
  return std::abs(u - v) <= eps * std::max({1.0, std::abs(u), std::abs(v)});
}

// Root of a strictly monotone function with a sign change on [lo, hi].
template <class F>
double bracketed_root(F&& fn, double lo, double hi, double flo, double fhi) {
  const double width = hi - lo;
  auto tol = [width](double x, double y) {
    return std::abs(y - x) <= 1e-12 * width;
  };
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tol, iters);
  return std::clamp(0.5 * (r.first + r.second), lo, hi);
}

// Real roots of a + b*x + c*x^2 strictly inside (lower, upper), ascending.
inline std::vector<double> quadratic_roots(double a, double b, double c,
                                           double lower, double upper) {
  std::vector<double> roots;
  auto keep = [&](double r) {
    if (lower < r && r < upper) roots.push_back(r);
  };
  if (c == 0.0) {
    if (b != 0.0) keep(-a / b);
    return roots;
  }
  const double disc = diff_of_products(b, b, 4.0 * c, a);
  if (disc < 0.0) return roots;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const double r1 = q / c;
  const double r2 = q != 0.0 ? a / q : r1;
  keep(std::min(r1, r2));
  if (r1 != r2) keep(std::max(r1, r2));
  return roots;
}

// Sign changes of a + b*phi2 + c*phi3 strictly inside (lower, upper).
inline std::vector<double> crossing_roots(Basis basis, double a, double b,
                                          double c, double lower,
                                          double upper) {
  if (basis == Basis::L2) return quadratic_roots(a, b, c, lower, upper);
  std::vector<double> roots;
  auto fn = [&](double x) { return eval_basis(basis, a, b, c, x); };
  auto scan = [&](double lo, double hi) {
    const double flo = fn(lo);
    const double fhi = fn(hi);
    if ((flo < 0.0 && fhi > 0.0) || (flo > 0.0 && fhi < 0.0))
      roots.push_back(bracketed_root(fn, lo, hi, flo, fhi));
  };
  if (auto s = stationary_point(basis, b, c, lower, upper)) {
    scan(lower, *s);
    scan(*s, upper);
  } else {
    scan(lower, upper);
  }
  return roots;
}

// Point where the monotone piece p crosses `level` inside [lo, hi]; the caller
// guarantees p(lo) and p(hi) lie on opposite sides of `level`.
inline double level_crossing(Basis basis, const Piece& p, double level,
                             double lo, double hi) {
  const double a = p.a - level;
  auto fn = [&](double x) { return eval_basis(basis, a, p.b, p.c, x); };
  if (basis == Basis::L2) {
    auto roots = quadratic_roots(a, p.b, p.c, lo, hi);
    if (roots.size() == 1) return roots.front();
  }
  const double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) return std::abs(flo) < std::abs(fhi) ? lo : hi;
  return bracketed_root(fn, lo, hi, flo, fhi);
}

// Smallest value over the pieces containing x; +inf when none does.
inline double value_at(Basis basis, std::span<const Piece> pieces, double x) {
  auto it = std::lower_bound(
      pieces.begin(), pieces.end(), x,
      [](const Piece& p, double v) { return p.upper < v; });
  double best = kInf;
  for (; it != pieces.end() && it->lower <= x; ++it)
    best = std::min(best, eval_piece(basis, *it, x));
  return best;
}

struct PieceMin {
  double value;
  double argmin;
};

// Minimum of one piece over [lo, hi] (a sub-interval of the piece); ties go
// to the smallest theta.
inline PieceMin piece_min(Basis basis, const Piece& p, double lo, double hi) {
  PieceMin best{eval_piece(basis, p, lo), lo};
  if (lo == hi) return best;
  if (auto s = stationary_point(basis, p.b, p.c, lo, hi)) {
    const double v = eval_piece(basis, p, *s);
    if (v < best.value) best = {v, *s};
  }
  const double v = eval_piece(basis, p, hi);
  if (v < best.value) best = {v, hi};
  return best;
}

inline Piece constant_piece(double lower, double upper, double value) {
  return {lower, upper, value, 0.0, 0.0};
}

}  // namespace detail

struct Minimum {
  double value = kInf;
  double argmin = std::numeric_limits<double>::quiet_NaN();
};

/// Piecewise function theta -> cost on a finite domain. Immutable once built;
/// the constructor sorts, validates and canonicalizes its pieces.
class FunctionalCost {
 public:
  FunctionalCost(Basis basis, Interval domain, std::vector<Piece> pieces = {})
      : basis_(basis), domain_(clip_to_basis(basis, domain)) {
    if (!(std::isfinite(domain_.lower) && std::isfinite(domain_.upper)) ||
        domain_.empty())
      throw contract_error("FunctionalCost: domain must be a finite interval");
    pieces_.reserve(pieces.size());
    for (Piece p : pieces) {
      if (!(p.lower <= p.upper))
        throw contract_error("FunctionalCost: piece with lower > upper");
      if (!(std::isfinite(p.a) && std::isfinite(p.b) && std::isfinite(p.c)))
        throw contract_error("FunctionalCost: non-finite coefficient");
      p.lower = std::max(p.lower, domain_.lower);
      p.upper = std::min(p.upper, domain_.upper);
      if (p.lower > p.upper) continue;
      pieces_.push_back(p);
    }
    std::sort(pieces_.begin(), pieces_.end(), [](const Piece& x, const Piece& y) {
      return x.lower < y.lower || (x.lower == y.lower && x.upper < y.upper);
    });
    for (std::size_t i = 1; i < pieces_.size(); ++i)
      if (pieces_[i - 1].upper > pieces_[i].lower)
        throw contract_error("FunctionalCost: overlapping pieces");
    canonicalize();
  }

  static FunctionalCost constant(Basis basis, Interval domain, double value) {
    FunctionalCost f(basis, domain);
    f.pieces_.push_back(
        detail::constant_piece(f.domain_.lower, f.domain_.upper, value));
    return f;
  }

  static FunctionalCost single(Basis basis, Interval domain, double a,
                               double b, double c) {
    return FunctionalCost(basis, domain, {{domain.lower, domain.upper, a, b, c}});
  }

  Basis basis() const { return basis_; }
  Interval domain() const { return domain_; }
  std::span<const Piece> pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }

  /// True when no parameter value is feasible.
  bool empty() const { return pieces_.empty(); }

  /// Hull of the feasible region.
  std::optional<Interval> support() const {
    if (pieces_.empty()) return std::nullopt;
    return Interval{pieces_.front().lower, pieces_.back().upper};
  }

  /// Pieces cover the whole domain without holes.
  bool is_tiled() const {
    if (pieces_.empty() || pieces_.front().lower != domain_.lower ||
        pieces_.back().upper != domain_.upper)
      return false;
    for (std::size_t i = 1; i < pieces_.size(); ++i)
      if (pieces_[i - 1].upper != pieces_[i].lower) return false;
    return true;
  }

  /// Value at theta; +inf inside an infeasible hole. Throws std::domain_error
  /// outside the domain.
  double operator()(double theta) const {
    if (!domain_.contains(theta))
      throw std::domain_error("FunctionalCost: theta outside domain");
    return detail::value_at(basis_, pieces_, theta);
  }

  /// Like operator() but +inf outside the domain.
  double value_or_inf(double theta) const {
    if (!domain_.contains(theta)) return kInf;
    return detail::value_at(basis_, pieces_, theta);
  }

 private:
  struct Raw {};
  FunctionalCost(Raw, Basis basis, Interval domain, std::vector<Piece> pieces)
      : basis_(basis), domain_(domain), pieces_(std::move(pieces)) {
    canonicalize();
  }

  friend FunctionalCost make_sorted(Basis, Interval, std::vector<Piece>);

  void canonicalize() {
    if (pieces_.empty()) return;
    // Drop isolated points that a touching interval already dominates.
    std::vector<Piece> kept;
    kept.reserve(pieces_.size());
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& p = pieces_[i];
      if (p.is_point()) {
        const double v = eval_piece(basis_, p, p.lower);
        double neighbour = kInf;
        if (!kept.empty() && kept.back().upper == p.lower)
          neighbour = eval_piece(basis_, kept.back(), p.lower);
        if (i + 1 < pieces_.size() && pieces_[i + 1].lower == p.lower)
          neighbour =
              std::min(neighbour, eval_piece(basis_, pieces_[i + 1], p.lower));
        if (neighbour <= v) continue;
        if (!kept.empty() && kept.back().is_point() &&
            kept.back().lower == p.lower)
          kept.pop_back();
      }
      kept.push_back(p);
    }
    // Fold intervals only a few ulps wide into a touching neighbour.
    std::vector<Piece> folded;
    folded.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      Piece p = kept[i];
      if (!p.is_point() && detail::ulp_close(p.lower, p.upper)) {
        if (!folded.empty() && !folded.back().is_point() &&
            folded.back().upper == p.lower) {
          folded.back().upper = p.upper;
          continue;
        }
        if (i + 1 < kept.size() && !kept[i + 1].is_point() &&
            kept[i + 1].lower == p.upper) {
          kept[i + 1].lower = p.lower;
          continue;
        }
      }
      folded.push_back(p);
    }
    // Merge touching intervals with identical coefficients.
    pieces_.clear();
    for (const Piece& p : folded) {
      if (!pieces_.empty()) {
        Piece& back = pieces_.back();
        if (!back.is_point() && !p.is_point() && back.upper == p.lower &&
            back.same_coefficients(p)) {
          back.upper = p.upper;
          continue;
        }
      }
      pieces_.push_back(p);
    }
  }

  Basis basis_;
  Interval domain_;
  std::vector<Piece> pieces_;
};

// Builds from pieces already sorted, clipped and non-overlapping.
inline FunctionalCost make_sorted(Basis basis, Interval domain,
                                  std::vector<Piece> pieces) {
  return FunctionalCost(FunctionalCost::Raw{}, basis, domain,
                        std::move(pieces));
}

namespace detail {

inline void require_same_basis(const FunctionalCost& f, const FunctionalCost& g,
                               const char* op) {
  if (f.basis() != g.basis())
    throw contract_error(std::string(op) + ": basis mismatch (" +
                         to_string(f.basis()) + " vs " + to_string(g.basis()) +
                         ")");
}

inline std::vector<double> merged_breakpoints(std::span<const Piece> f,
                                              std::span<const Piece> g) {
  std::vector<double> xs;
  xs.reserve(2 * (f.size() + g.size()));
  for (const Piece& p : f) {
    xs.push_back(p.lower);
    xs.push_back(p.upper);
  }
  for (const Piece& p : g) {
    xs.push_back(p.lower);
    xs.push_back(p.upper);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// Non-degenerate piece covering (x0, x1); `cursor` only moves forward.
inline const Piece* covering(std::span<const Piece> pieces, std::size_t& cursor,
                             double x0) {
  while (cursor < pieces.size() && pieces[cursor].upper <= x0) ++cursor;
  if (cursor < pieces.size() && pieces[cursor].lower <= x0 &&
      pieces[cursor].upper > x0)
    return &pieces[cursor];
  return nullptr;
}

// Insert zero-width pieces wherever `exact(x)` at a breakpoint is strictly
// below what the interval pieces give there.
template <class Exact>
void add_isolated_points(Basis basis, std::vector<Piece>& out,
                         std::span<const double> xs, Exact&& exact) {
  std::vector<Piece> points;
  for (double x : xs) {
    const double v = exact(x);
    if (!std::isfinite(v)) continue;
    const double r = value_at(basis, out, x);
    if (v < r - 1e-12 * (1.0 + std::abs(std::isfinite(r) ? r : v)))
      points.push_back(constant_piece(x, x, v));
  }
  if (points.empty()) return;
  std::vector<Piece> merged;
  merged.reserve(out.size() + points.size());
  std::merge(out.begin(), out.end(), points.begin(), points.end(),
             std::back_inserter(merged), [](const Piece& p, const Piece& q) {
               return p.lower < q.lower ||
                      (p.lower == q.lower && p.upper < q.upper);
             });
  out = std::move(merged);
}

}  // namespace detail

/// Pointwise minimum. Regions where only one operand is feasible take that
/// operand; the result domain is the hull of both domains.
inline FunctionalCost pointwise_min(const FunctionalCost& f,
                                    const FunctionalCost& g) {
  detail::require_same_basis(f, g, "pointwise_min");
  const Basis basis = f.basis();
  const Interval domain{std::min(f.domain().lower, g.domain().lower),
                        std::max(f.domain().upper, g.domain().upper)};
  if (g.empty()) return make_sorted(basis, domain, {f.pieces().begin(), f.pieces().end()});
  if (f.empty()) return make_sorted(basis, domain, {g.pieces().begin(), g.pieces().end()});

  const auto fp = f.pieces();
  const auto gp = g.pieces();
  const auto xs = detail::merged_breakpoints(fp, gp);
  std::vector<Piece> out;
  out.reserve(fp.size() + gp.size() + 4);
  std::size_t fi = 0, gi = 0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double x0 = xs[k];
    const double x1 = xs[k + 1];
    const Piece* pf = detail::covering(fp, fi, x0);
    const Piece* pg = detail::covering(gp, gi, x0);
    if (!pf && !pg) continue;
    if (!pf || !pg) {
      const Piece& p = pf ? *pf : *pg;
      out.push_back({x0, x1, p.a, p.b, p.c});
      continue;
    }
    if (pf->same_coefficients(*pg)) {
      out.push_back({x0, x1, pf->a, pf->b, pf->c});
      continue;
    }
    const double da = pf->a - pg->a;
    const double db = pf->b - pg->b;
    const double dc = pf->c - pg->c;
    // Roots within a few ulps of a breakpoint or of each other are rounding
    // artefacts of functions that agree there.
    std::vector<double> roots;
    for (double r : detail::crossing_roots(basis, da, db, dc, x0, x1))
      if (!detail::ulp_close(r, roots.empty() ? x0 : roots.back()) &&
          !detail::ulp_close(r, x1))
        roots.push_back(r);
    double lo = x0;
    roots.push_back(x1);
    for (double hi : roots) {
      const double mid = 0.5 * (lo + hi);
      const double d = eval_basis(basis, da, db, dc, mid);
      const Piece& p = d <= 0.0 ? *pf : *pg;
      if (!out.empty() && out.back().upper == lo && !out.back().is_point() &&
          out.back().a == p.a && out.back().b == p.b && out.back().c == p.c)
        out.back().upper = hi;
      else
        out.push_back({lo, hi, p.a, p.b, p.c});
      lo = hi;
    }
  }
  detail::add_isolated_points(basis, out, xs, [&](double x) {
    return std::min(f.value_or_inf(x), g.value_or_inf(x));
  });
  return make_sorted(basis, domain, std::move(out));
}

/// f + g on the intersection of the domains (coefficient-wise after
/// refining both partitions).
inline FunctionalCost add_piecewise(const FunctionalCost& f,
                                    const FunctionalCost& g) {
  detail::require_same_basis(f, g, "add_piecewise");
  const Basis basis = f.basis();
  const Interval domain = intersect(f.domain(), g.domain());
  if (domain.empty())
    throw contract_error("add_piecewise: disjoint domains");
  if (f.empty() || g.empty()) return make_sorted(basis, domain, {});
  const auto fp = f.pieces();
  const auto gp = g.pieces();
  auto xs = detail::merged_breakpoints(fp, gp);
  std::erase_if(xs, [&](double x) { return !domain.contains(x); });
  std::vector<Piece> out;
  out.reserve(fp.size() + gp.size());
  std::size_t fi = 0, gi = 0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const Piece* pf = detail::covering(fp, fi, xs[k]);
    const Piece* pg = detail::covering(gp, gi, xs[k]);
    if (!pf || !pg) continue;
    out.push_back({xs[k], xs[k + 1], pf->a + pg->a, pf->b + pg->b,
                   pf->c + pg->c});
  }
  detail::add_isolated_points(basis, out, xs, [&](double x) {
    return f.value_or_inf(x) + g.value_or_inf(x);
  });
  return make_sorted(basis, domain, std::move(out));
}

inline FunctionalCost add_constant(const FunctionalCost& f, double value) {
  std::vector<Piece> out(f.pieces().begin(), f.pieces().end());
  for (Piece& p : out) p.a += value;
  return make_sorted(f.basis(), f.domain(), std::move(out));
}

/// Restricts the feasible region to `range`; the domain is unchanged.
inline FunctionalCost restrict_to(const FunctionalCost& f, Interval range) {
  range = intersect(range, f.domain());
  if (range.empty()) return make_sorted(f.basis(), f.domain(), {});
  std::vector<Piece> out;
  for (const Piece& p : f.pieces()) {
    if (p.upper < range.lower || p.lower > range.upper) continue;
    Piece q = p;
    q.lower = std::max(q.lower, range.lower);
    q.upper = std::min(q.upper, range.upper);
    if (q.is_point() && !p.is_point() && range.lower != range.upper) continue;
    out.push_back(q);
  }
  if (range.lower == range.upper) {
    const double v = f.value_or_inf(range.lower);
    out.clear();
    if (std::isfinite(v))
      out.push_back(detail::constant_piece(range.lower, range.lower, v));
    return make_sorted(f.basis(), f.domain(), std::move(out));
  }
  const double ends[] = {range.lower, range.upper};
  detail::add_isolated_points(f.basis(), out, ends,
                              [&](double x) { return f.value_or_inf(x); });
  return make_sorted(f.basis(), f.domain(), std::move(out));
}

/// Same function viewed on another domain; pieces outside are dropped.
inline FunctionalCost with_domain(const FunctionalCost& f, Interval domain) {
  std::vector<Piece> out(f.pieces().begin(), f.pieces().end());
  return FunctionalCost(f.basis(), domain, std::move(out));
}

/// Minimum value and smallest minimizer. Value is +inf when f is infeasible.
inline Minimum global_min(const FunctionalCost& f) {
  Minimum best;
  for (const Piece& p : f.pieces()) {
    const auto m = detail::piece_min(f.basis(), p, p.lower, p.upper);
    if (m.value < best.value) best = {m.value, m.argmin};
  }
  return best;
}

/// Minimum of f over theta in `range`.
inline Minimum min_on(const FunctionalCost& f, Interval range) {
  Minimum best;
  if (range.empty()) return best;
  for (const Piece& p : f.pieces()) {
    if (p.upper < range.lower) continue;
    if (p.lower > range.upper) break;
    const double lo = std::max(p.lower, range.lower);
    const double hi = std::min(p.upper, range.upper);
    const auto m = detail::piece_min(f.basis(), p, lo, hi);
    if (m.value < best.value) best = {m.value, m.argmin};
  }
  return best;
}

/// Constant function equal to the global minimum (the unconstrained operator).
inline FunctionalCost constant_min(const FunctionalCost& f) {
  const auto m = global_min(f);
  if (!std::isfinite(m.value)) return make_sorted(f.basis(), f.domain(), {});
  return FunctionalCost::constant(f.basis(), f.domain(), m.value);
}

namespace detail {

// Shift the argument: result(theta) = f(theta - shift), L2 only.
inline Piece shifted_l2(const Piece& p, double shift) {
  // a + b(t - s) + c(t - s)^2
  return {p.lower + shift, p.upper + shift,
          p.a - p.b * shift + p.c * shift * shift, p.b - 2.0 * p.c * shift,
          p.c};
}

// Running minimum over theta <= x (forward) or theta >= x (!forward), swept
// over monotone parts of each piece. The result extends to the far domain end.
inline std::vector<Piece> running_min(Basis basis, std::span<const Piece> pieces,
                                      Interval domain, bool forward) {
  std::vector<Piece> out;
  out.reserve(2 * pieces.size() + 2);
  double m = kInf;
  double cursor = 0.0;
  bool started = false;
  bool last_point = false;

  auto emit_const = [&](double lo, double hi) {
    if (lo > hi) return;
    if (!out.empty() && out.back().a == m && out.back().b == 0.0 &&
        out.back().c == 0.0 &&
        (forward ? out.back().upper == lo : out.back().lower == hi) &&
        !out.back().is_point()) {
      if (forward)
        out.back().upper = hi;
      else
        out.back().lower = lo;
      return;
    }
    out.push_back(constant_piece(lo, hi, m));
  };
  auto emit = [&](const Piece& p, double lo, double hi) {
    if (lo < hi) out.push_back({lo, hi, p.a, p.b, p.c});
  };

  // One monotone part [lo, hi] of piece p.
  auto sweep_part = [&](const Piece& p, double lo, double hi) {
    const double vlo = eval_piece(basis, p, lo);
    const double vhi = eval_piece(basis, p, hi);
    // `near` is the end first reached by the sweep, `far` the other one.
    const double vnear = forward ? vlo : vhi;
    const double vfar = forward ? vhi : vlo;
    if (!(vfar < vnear)) {
      // Part does not improve along the sweep: its running min is vnear.
      m = std::min(m, vnear);
      emit_const(lo, hi);
      return;
    }
    if (vnear <= m) {
      emit(p, lo, hi);
    } else if (vfar >= m) {
      emit_const(lo, hi);
    } else {
      const double r = level_crossing(basis, p, m, lo, hi);
      // Pieces are emitted in sweep order and reversed at the end.
      if (forward) {
        emit_const(lo, r);
        emit(p, r, hi);
      } else {
        emit_const(r, hi);
        emit(p, lo, r);
      }
    }
    m = std::min(m, vfar);
  };

  const std::size_t n = pieces.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Piece& p = pieces[forward ? k : n - 1 - k];
    const double near_end = forward ? p.lower : p.upper;
    if (started && (forward ? near_end > cursor : near_end < cursor)) {
      if (forward)
        emit_const(cursor, near_end);
      else
        emit_const(near_end, cursor);
    }
    started = true;
    last_point = p.is_point();
    if (p.is_point()) {
      m = std::min(m, eval_piece(basis, p, p.lower));
      cursor = p.lower;
      continue;
    }
    auto s = stationary_point(basis, p.b, p.c, p.lower, p.upper);
    if (forward) {
      if (s) {
        sweep_part(p, p.lower, *s);
        sweep_part(p, *s, p.upper);
      } else {
        sweep_part(p, p.lower, p.upper);
      }
      cursor = p.upper;
    } else {
      if (s) {
        sweep_part(p, *s, p.upper);
        sweep_part(p, p.lower, *s);
      } else {
        sweep_part(p, p.lower, p.upper);
      }
      cursor = p.lower;
    }
  }
  const double end = forward ? domain.upper : domain.lower;
  if (started && (cursor != end || last_point)) {
    if (forward)
      emit_const(cursor, domain.upper);
    else
      emit_const(domain.lower, cursor);
  }
  if (!forward) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// result(x) = min { f(theta) : theta <= x - gap }. Nonincreasing. Points
/// below (first feasible theta) + gap are left infeasible. A positive gap is
/// only expressible in the L2 basis.
inline FunctionalCost min_over_leq(const FunctionalCost& f, double gap = 0.0) {
  if (!(gap >= 0.0)) throw contract_error("min_over_leq: gap must be >= 0");
  if (gap > 0.0 && f.basis() != Basis::L2)
    throw unsupported_operation(
        std::string("min_over_leq: additive gap unsupported in ") +
        to_string(f.basis()) + " basis");
  auto out = detail::running_min(f.basis(), f.pieces(), f.domain(), true);
  if (gap > 0.0) {
    std::vector<Piece> shifted;
    shifted.reserve(out.size());
    for (const Piece& p : out) {
      Piece q = detail::shifted_l2(p, gap);
      if (q.lower > f.domain().upper) break;
      q.upper = std::min(q.upper, f.domain().upper);
      shifted.push_back(q);
    }
    out = std::move(shifted);
  }
  return make_sorted(f.basis(), f.domain(), std::move(out));
}

/// result(x) = min { f(theta) : theta >= x + gap }. Nondecreasing.
inline FunctionalCost min_over_geq(const FunctionalCost& f, double gap = 0.0) {
  if (!(gap >= 0.0)) throw contract_error("min_over_geq: gap must be >= 0");
  if (gap > 0.0 && f.basis() != Basis::L2)
    throw unsupported_operation(
        std::string("min_over_geq: additive gap unsupported in ") +
        to_string(f.basis()) + " basis");
  auto out = detail::running_min(f.basis(), f.pieces(), f.domain(), false);
  if (gap > 0.0) {
    std::vector<Piece> shifted;
    shifted.reserve(out.size());
    for (const Piece& p : out) {
      Piece q = detail::shifted_l2(p, -gap);
      if (q.upper < f.domain().lower) continue;
      q.lower = std::max(q.lower, f.domain().lower);
      shifted.push_back(q);
    }
    out = std::move(shifted);
  }
  return make_sorted(f.basis(), f.domain(), std::move(out));
}

/// result(x) = f(x / alpha); the domain is scaled by alpha. Not expressible
/// in the LogLog basis.
inline FunctionalCost scale_argument(const FunctionalCost& f, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw contract_error("scale_argument: alpha must be positive");
  if (alpha == 1.0) return f;
  if (f.basis() == Basis::LogLog)
    throw unsupported_operation("scale_argument: unsupported in LogLog basis");
  std::vector<Piece> out;
  out.reserve(f.size());
  const double log_alpha = std::log(alpha);
  for (const Piece& p : f.pieces()) {
    Piece q{alpha * p.lower, alpha * p.upper, p.a, p.b / alpha, p.c};
    if (f.basis() == Basis::L2)
      q.c = p.c / (alpha * alpha);
    else
      q.a = p.a - p.c * log_alpha;  // c*log(x/alpha)
    out.push_back(q);
  }
  const Interval d{alpha * f.domain().lower, alpha * f.domain().upper};
  return FunctionalCost(f.basis(), d, std::move(out));
}

}  // namespace graphseg

#endif  // GRAPHSEG_PIECEWISE_HPP

#ifndef GRAPHSEG_LOSSES_HPP
#define GRAPHSEG_LOSSES_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphseg/error.hpp"
#include "graphseg/piecewise.hpp"

namespace graphseg {

enum class Family { Gauss, Poisson, Exponential, Variance, Binomial, NegBin };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Gauss: return "mean";
    case Family::Poisson: return "poisson";
    case Family::Exponential: return "exp";
    case Family::Variance: return "variance";
    case Family::Binomial: return "binomial";
    case Family::NegBin: return "negbin";
  }
  return "?";
}

/// Accepts the CLI names (mean, poisson, exp, variance, binomial, negbin)
/// and the long forms (gauss, exponential).
inline Family parse_family(std::string_view name) {
  if (name == "mean" || name == "gauss") return Family::Gauss;
  if (name == "poisson") return Family::Poisson;
  if (name == "exp" || name == "exponential") return Family::Exponential;
  if (name == "variance") return Family::Variance;
  if (name == "binomial") return Family::Binomial;
  if (name == "negbin") return Family::NegBin;
  throw contract_error("unknown loss family '" + std::string(name) + "'");
}

inline Basis basis_of(Family f) {
  switch (f) {
    case Family::Gauss: return Basis::L2;
    case Family::Poisson:
    case Family::Exponential:
    case Family::Variance: return Basis::LinLog;
    case Family::Binomial:
    case Family::NegBin: return Basis::LogLog;
  }
  return Basis::L2;
}

struct LossSpec {
  Family family = Family::Gauss;
  double K = kInf;       // robustness threshold on |theta - y|
  double a = kInf;       // Huber slope; 0 or +inf with finite K gives biweight
  double weight = 1.0;   // multiplies every point's loss
  double size = 1.0;     // negative binomial dispersion
};

/// Robust parameters: finite K switches on biweight (a == 0 or a == inf) or
/// Huber (0 < a < inf).
struct Robust {
  double K = kInf;
  double a = kInf;

  bool active() const { return std::isfinite(K); }
  bool huber() const { return active() && a > 0.0 && std::isfinite(a); }
};

inline void check_support(Family f, double y, double size = 1.0) {
  auto fail = [&](const char* what) {
    throw contract_error(std::string(to_string(f)) + " loss: " + what +
                         " (y = " + std::to_string(y) + ")");
  };
  if (!std::isfinite(y)) fail("non-finite observation");
  switch (f) {
    case Family::Gauss:
    case Family::Variance:
      break;
    case Family::Poisson:
      if (y < 0.0) fail("negative count");
      break;
    case Family::Exponential:
      if (!(y > 0.0)) fail("observation must be positive");
      break;
    case Family::Binomial:
      if (y < 0.0 || y > 1.0) fail("observation outside [0, 1]");
      break;
    case Family::NegBin:
      if (y < 0.0) fail("negative count");
      if (!(size > 0.0)) fail("size must be positive");
      break;
  }
}

/// (theta - y)^2, optionally made robust beyond |theta - y| = K.
inline FunctionalCost gauss_loss(double y, Interval domain, Robust r = {},
                                 double w = 1.0) {
  const Piece inside{y - r.K, y + r.K, w * y * y, -2.0 * w * y, w};
  if (!r.active())
    return FunctionalCost(Basis::L2, domain,
                          {{domain.lower, domain.upper, inside.a, inside.b,
                            inside.c}});
  const double K2 = r.K * r.K;
  std::vector<Piece> pieces;
  pieces.reserve(3);
  if (r.huber()) {
    // K^2 + a(|theta - y| - K)
    pieces.push_back({domain.lower, y - r.K, w * (K2 + r.a * (y - r.K)),
                      -w * r.a, 0.0});
    pieces.push_back(inside);
    pieces.push_back({y + r.K, domain.upper, w * (K2 - r.a * (y + r.K)),
                      w * r.a, 0.0});
  } else {
    pieces.push_back({domain.lower, y - r.K, w * K2, 0.0, 0.0});
    pieces.push_back(inside);
    pieces.push_back({y + r.K, domain.upper, w * K2, 0.0, 0.0});
  }
  std::erase_if(pieces, [&](const Piece& p) {
    return p.upper < domain.lower || p.lower > domain.upper ||
           (p.lower == p.upper);
  });
  return FunctionalCost(Basis::L2, domain, std::move(pieces));
}

/// theta - y log(theta), theta the Poisson mean.
inline FunctionalCost poisson_loss(double y, Interval domain, double w = 1.0) {
  check_support(Family::Poisson, y);
  return FunctionalCost::single(Basis::LinLog, domain, 0.0, w, -w * y);
}

/// y theta - log(theta), theta the rate.
inline FunctionalCost exponential_loss(double y, Interval domain,
                                       double w = 1.0) {
  check_support(Family::Exponential, y);
  return FunctionalCost::single(Basis::LinLog, domain, 0.0, w * y, -w);
}

/// (y^2 / 2) theta - log(theta) / 2, theta the precision 1/sigma^2.
inline FunctionalCost variance_loss(double y, Interval domain, double w = 1.0) {
  check_support(Family::Variance, y);
  return FunctionalCost::single(Basis::LinLog, domain, 0.0, 0.5 * w * y * y,
                                -0.5 * w);
}

/// -y log(theta) - (1 - y) log(1 - theta), theta the success probability.
inline FunctionalCost binomial_loss(double y, Interval domain, double w = 1.0) {
  check_support(Family::Binomial, y);
  return FunctionalCost::single(Basis::LogLog, domain, 0.0, -w * y,
                                -w * (1.0 - y));
}

/// -size log(theta) - y log(1 - theta), theta the success probability.
inline FunctionalCost negbin_loss(double y, double size, Interval domain,
                                  double w = 1.0) {
  check_support(Family::NegBin, y, size);
  return FunctionalCost::single(Basis::LogLog, domain, 0.0, -w * size, -w * y);
}

/// gamma(y, .) scaled by `w` (the per-point weight times spec.weight).
inline FunctionalCost loss_cost(const LossSpec& spec, double y, Interval domain,
                                Robust r, double w = 1.0) {
  w *= spec.weight;
  switch (spec.family) {
    case Family::Gauss: return gauss_loss(y, domain, r, w);
    case Family::Poisson: return poisson_loss(y, domain, w);
    case Family::Exponential: return exponential_loss(y, domain, w);
    case Family::Variance: return variance_loss(y, domain, w);
    case Family::Binomial: return binomial_loss(y, domain, w);
    case Family::NegBin: return negbin_loss(y, spec.size, domain, w);
  }
  throw contract_error("loss_cost: unknown family");
}

/// Direct evaluation of gamma(y, theta) with the same constant conventions as
/// loss_cost (unweighted).
inline double loss_value(const LossSpec& spec, double y, double theta,
                         Robust r = {}) {
  auto xlog = [](double x, double v) { return x == 0.0 ? 0.0 : x * std::log(v); };
  switch (spec.family) {
    case Family::Gauss: {
      const double d = std::abs(theta - y);
      if (!r.active() || d <= r.K) return d * d;
      const double K2 = r.K * r.K;
      return r.huber() ? K2 + r.a * (d - r.K) : K2;
    }
    case Family::Poisson: return theta - xlog(y, theta);
    case Family::Exponential: return y * theta - std::log(theta);
    case Family::Variance: return 0.5 * y * y * theta - 0.5 * std::log(theta);
    case Family::Binomial:
      return -xlog(y, theta) - xlog(1.0 - y, 1.0 - theta);
    case Family::NegBin:
      return -xlog(spec.size, theta) - xlog(y, 1.0 - theta);
  }
  return kInf;
}

/// Closed-form weighted maximum likelihood parameter of one segment (pure,
/// non-robust losses), clamped into `domain`.
inline double segment_mle(const LossSpec& spec, std::span<const double> y,
                          std::span<const double> w, Interval domain) {
  double sw = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    s1 += wi * y[i];
    s2 += wi * y[i] * y[i];
  }
  const double mean = s1 / sw;
  double theta = mean;
  switch (spec.family) {
    case Family::Gauss:
    case Family::Poisson:
    case Family::Binomial: theta = mean; break;
    case Family::Exponential: theta = 1.0 / mean; break;
    case Family::Variance: theta = s2 > 0.0 ? sw / s2 : kInf; break;
    case Family::NegBin: theta = spec.size / (spec.size + mean); break;
  }
  return std::clamp(theta, domain.lower, domain.upper);
}

}  // namespace graphseg

#endif  // GRAPHSEG_LOSSES_HPP

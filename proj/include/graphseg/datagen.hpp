#ifndef GRAPHSEG_DATAGEN_HPP
#define GRAPHSEG_DATAGEN_HPP

// Simulated series, noise models and the difference-based sd estimator.
// All draws use mt19937_64 with Boost distributions, which produce the same
// stream on every platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

#include "graphseg/error.hpp"

namespace graphseg {

using Rng = boost::random::mt19937_64;

/// Well-mixed seed for stream `index` derived from `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class SignalFamily { Mean, Poisson, Exp, Variance, NegBin };

inline const char* to_string(SignalFamily f) {
  switch (f) {
    case SignalFamily::Mean: return "mean";
    case SignalFamily::Poisson: return "poisson";
    case SignalFamily::Exp: return "exp";
    case SignalFamily::Variance: return "variance";
    case SignalFamily::NegBin: return "negbin";
  }
  return "?";
}

inline std::optional<SignalFamily> parse_signal_family(std::string_view s) {
  if (s == "mean") return SignalFamily::Mean;
  if (s == "poisson") return SignalFamily::Poisson;
  if (s == "exp") return SignalFamily::Exp;
  if (s == "variance") return SignalFamily::Variance;
  if (s == "negbin") return SignalFamily::NegBin;
  return std::nullopt;
}

/// Segment parameters per family: mean level; Poisson rate; exponential
/// rate; variance of a zero-mean Gaussian; negative binomial success
/// probability (with `size`).
struct SignalSpec {
  std::size_t n = 100;
  std::vector<double> changepoints{1.0};  // fractions, last = 1
  std::vector<double> parameters{0.0};
  SignalFamily family = SignalFamily::Mean;
  double sigma = 1.0;
  double gamma = 1.0;
  double size = 1.0;
  std::uint64_t seed = 1;
};

inline void validate(const SignalSpec& s) {
  if (s.n == 0) throw contract_error("generate: n must be >= 1");
  if (s.changepoints.empty() || s.changepoints.size() != s.parameters.size())
    throw contract_error("generate: need one parameter per changepoint fraction");
  double prev = 0.0;
  for (double f : s.changepoints) {
    if (!(f > prev) || f > 1.0)
      throw contract_error("generate: fractions must increase strictly within (0, 1]");
    prev = f;
  }
  if (s.changepoints.back() != 1.0) throw contract_error("generate: last fraction must be 1");
  if (!(s.sigma >= 0.0)) throw contract_error("generate: sigma must be >= 0");
  if (!(s.gamma > 0.0 && s.gamma <= 1.0)) throw contract_error("generate: gamma must be in (0, 1]");
  if (!(s.size > 0.0)) throw contract_error("generate: size must be > 0");
  for (double p : s.parameters) {
    switch (s.family) {
      case SignalFamily::Mean: break;
      case SignalFamily::Poisson:
        if (!(p >= 0.0)) throw contract_error("generate: Poisson rate must be >= 0");
        break;
      case SignalFamily::Exp:
      case SignalFamily::Variance:
        if (!(p > 0.0)) throw contract_error("generate: parameter must be > 0");
        break;
      case SignalFamily::NegBin:
        if (!(p > 0.0 && p <= 1.0))
          throw contract_error("generate: probability must be in (0, 1]");
        break;
    }
  }
}

/// Noise-free per-point parameter (with decay for the mean family).
inline std::vector<double> signal_of(const SignalSpec& s) {
  validate(s);
  std::vector<double> out(s.n);
  std::size_t begin = 0;
  for (std::size_t k = 0; k < s.changepoints.size(); ++k) {
    const auto end = static_cast<std::size_t>(
        std::floor(s.changepoints[k] * static_cast<double>(s.n)));
    double level = s.parameters[k];
    for (std::size_t i = begin; i < std::min(end, s.n); ++i) {
      out[i] = level;
      if (s.family == SignalFamily::Mean) level *= s.gamma;
    }
    begin = std::max(begin, end);
  }
  return out;
}

inline std::vector<double> generate(const SignalSpec& s) {
  const auto sig = signal_of(s);
  Rng rng(s.seed);
  std::vector<double> y(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    const double p = sig[i];
    switch (s.family) {
      case SignalFamily::Mean:
        y[i] = p + s.sigma * boost::random::normal_distribution<double>()(rng);
        break;
      case SignalFamily::Poisson:
        y[i] = p == 0.0 ? 0.0 : boost::random::poisson_distribution<long, double>(p)(rng);
        break;
      case SignalFamily::Exp:
        y[i] = boost::random::exponential_distribution<double>(p)(rng);
        break;
      case SignalFamily::Variance:
        y[i] = std::sqrt(p) * boost::random::normal_distribution<double>()(rng);
        break;
      case SignalFamily::NegBin: {
        // Gamma-Poisson mixture: failures before `size` successes.
        if (p == 1.0) {
          y[i] = 0.0;
          break;
        }
        const double lambda =
            boost::random::gamma_distribution<double>(s.size, (1.0 - p) / p)(rng);
        y[i] = lambda == 0.0
                   ? 0.0
                   : boost::random::poisson_distribution<long, double>(lambda)(rng);
        break;
      }
    }
  }
  return y;
}

// ------------------------------------------------------------ signals

/// s_i = alpha (i - n/2), i = 1..n.
inline std::vector<double> linear_signal(std::size_t n, double alpha) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = alpha * (static_cast<double>(i + 1) - static_cast<double>(n) / 2.0);
  return s;
}

/// s_i = floor(10 (i-1) / n) - n/2, exactly as written.
inline std::vector<double> step_signal_verbatim(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = std::floor(10.0 * static_cast<double>(i) / static_cast<double>(n)) -
           static_cast<double>(n) / 2.0;
  return s;
}

/// Ten equal steps of the given height centred on zero:
/// height * (floor(10 (i-1) / n) - 4.5).
inline std::vector<double> step_signal(std::size_t n, double height) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = height * (std::floor(10.0 * static_cast<double>(i) / static_cast<double>(n)) - 4.5);
  return s;
}

// -------------------------------------------------------------- noise

inline std::vector<double> gaussian_noise(std::span<const double> signal, double sigma,
                                          std::uint64_t seed) {
  Rng rng(seed);
  boost::random::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> y(signal.begin(), signal.end());
  for (auto& v : y) v += sigma * d(rng);
  return y;
}

/// signal + scale * t(df).
inline std::vector<double> student_noise(std::span<const double> signal, double df,
                                         std::uint64_t seed, double scale = 1.0) {
  if (!(df > 0.0)) throw contract_error("student_noise: df must be > 0");
  Rng rng(seed);
  boost::random::student_t_distribution<double> d(df);
  std::vector<double> y(signal.begin(), signal.end());
  for (auto& v : y) v += scale * d(rng);
  return y;
}

/// Independent Bernoulli(p) flags, true meaning flipped.
inline std::vector<bool> signflip_mask(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw contract_error("corrupt_signflip: p must be in [0, 1]");
  Rng rng(seed);
  boost::random::bernoulli_distribution<double> d(p);
  std::vector<bool> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = d(rng);
  return m;
}

/// data = signal + noise becomes -signal + noise on a random p-fraction.
inline std::vector<double> corrupt_signflip(std::span<const double> data,
                                            std::span<const double> signal, double p,
                                            std::uint64_t seed) {
  if (data.size() != signal.size())
    throw contract_error("corrupt_signflip: data and signal lengths differ");
  const auto m = signflip_mask(data.size(), p, seed);
  std::vector<double> y(data.begin(), data.end());
  for (std::size_t i = 0; i < y.size(); ++i)
    if (m[i]) y[i] -= 2.0 * signal[i];
  return y;
}

// ----------------------------------------------------- sd estimation

inline constexpr double kHallWeights[4] = {0.1942, 0.2809, 0.3832, -0.8582};

/// Difference-based sd estimate with fourth-order optimal weights.
inline double sd_diff_hall(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 4) throw contract_error("sd_diff_hall: need at least 4 points");
  double s = 0.0;
  for (std::size_t t = 0; t + 3 < n; ++t) {
    const double d = kHallWeights[0] * y[t] + kHallWeights[1] * y[t + 1] +
                     kHallWeights[2] * y[t + 2] + kHallWeights[3] * y[t + 3];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(n - 3));
}

}  // namespace graphseg

#endif  // GRAPHSEG_DATAGEN_HPP

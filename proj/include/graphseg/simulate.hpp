#ifndef GRAPHSEG_SIMULATE_HPP
#define GRAPHSEG_SIMULATE_HPP

// Monte Carlo comparison of isotonic fits on increasing signals.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "graphseg/baselines.hpp"
#include "graphseg/datagen.hpp"
#include "graphseg/format.hpp"
#include "graphseg/graph.hpp"
#include "graphseg/solver.hpp"

namespace graphseg {

enum class Scenario { Linear, Step };
enum class Noise { Gauss, Student, Corrupted };
enum class Method { LinearFit, Pava, Gfpop1, Gfpop2, Gfpop3, Gfpop4 };

inline const char* to_string(Scenario s) { return s == Scenario::Linear ? "linear" : "step"; }

inline const char* to_string(Noise x) {
  switch (x) {
    case Noise::Gauss: return "gauss";
    case Noise::Student: return "student";
    case Noise::Corrupted: return "corrupted";
  }
  return "?";
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::LinearFit: return "linear_fit";
    case Method::Pava: return "pava";
    case Method::Gfpop1: return "gfpop1";
    case Method::Gfpop2: return "gfpop2";
    case Method::Gfpop3: return "gfpop3";
    case Method::Gfpop4: return "gfpop4";
  }
  return "?";
}

inline std::optional<Scenario> parse_scenario(std::string_view s) {
  if (s == "linear") return Scenario::Linear;
  if (s == "step") return Scenario::Step;
  return std::nullopt;
}

inline std::optional<Noise> parse_noise(std::string_view s) {
  if (s == "gauss") return Noise::Gauss;
  if (s == "student") return Noise::Student;
  if (s == "corrupted") return Noise::Corrupted;
  return std::nullopt;
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::LinearFit, Method::Pava, Method::Gfpop1, Method::Gfpop2,
                   Method::Gfpop3, Method::Gfpop4})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::LinearFit, Method::Pava,   Method::Gfpop1,
                                     Method::Gfpop2,    Method::Gfpop3, Method::Gfpop4};
  return m;
}

struct SimulationConfig {
  Scenario scenario = Scenario::Step;
  std::vector<Noise> noises{Noise::Gauss};
  std::size_t n = 1000;
  double sigma = 1.0;
  std::size_t reps = 10;
  std::uint64_t seed = 1;
  std::vector<Method> methods = all_methods();
  double flip_p = 0.3;
  double student_df = 3.0;
  std::size_t threads = 0;  // 0: hardware concurrency, capped by GRAPHSEG_THREADS
};

struct MethodSummary {
  Noise noise;
  Method method;
  double mse_mean;
  double mse_sd;
  double segments_mean;
};

/// Linear slope 10 sigma / n; ten steps of height sigma centred on zero.
inline std::vector<double> scenario_signal(Scenario s, std::size_t n, double sigma) {
  return s == Scenario::Linear ? linear_signal(n, 10.0 * sigma / static_cast<double>(n))
                               : step_signal(n, sigma);
}

inline std::vector<double> noisy_series(const SimulationConfig& c, Noise noise,
                                        const std::vector<double>& signal,
                                        std::uint64_t seed) {
  const std::uint64_t s1 = derive_seed(seed, 1), s2 = derive_seed(seed, 2);
  switch (noise) {
    case Noise::Gauss: return gaussian_noise(signal, c.sigma, s1);
    case Noise::Student: return student_noise(signal, c.student_df, s1, c.sigma);
    case Noise::Corrupted:
      return corrupt_signflip(gaussian_noise(signal, c.sigma, s1), signal, c.flip_p, s2);
  }
  return {};
}

/// Isotonic graph with beta = 0 or 2 sigma^2 log n, and K = 3 sigma biweight
/// for gfpop2 and gfpop4.
inline Graph method_graph(Method m, std::size_t n, double sigma) {
  const bool penalised = m == Method::Gfpop3 || m == Method::Gfpop4;
  const bool robust = m == Method::Gfpop2 || m == Method::Gfpop4;
  const double beta = penalised ? 2.0 * sigma * sigma * std::log(static_cast<double>(n)) : 0.0;
  Graph g;
  Edge stay = make_edge("Iso", "Iso", EdgeType::Null);
  Edge up = make_edge("Iso", "Iso", EdgeType::Up, beta, 0.0);
  if (robust) {
    stay.K = up.K = 3.0 * sigma;
  }
  g.edges = {stay, up};
  return g;
}

inline std::size_t count_runs(const std::vector<double>& fit) {
  std::size_t runs = fit.empty() ? 0 : 1;
  for (std::size_t i = 1; i < fit.size(); ++i) runs += fit[i] != fit[i - 1];
  return runs;
}

/// Fitted signal and segment count of one method.
inline std::pair<std::vector<double>, std::size_t> fit_method(Method m,
                                                              const std::vector<double>& y,
                                                              double sigma) {
  switch (m) {
    case Method::LinearFit: {
      auto f = linear_fit(y);
      return {f, count_runs(f)};
    }
    case Method::Pava: {
      auto f = pava_l2(y);
      return {f, count_runs(f)};
    }
    default: {
      auto sol = solve_detailed(y, method_graph(m, y.size(), sigma), LossSpec{});
      return {sol.path.means, sol.segmentation.changepoints.size()};
    }
  }
}

inline std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("GRAPHSEG_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
  }
  return n;
}

/// Runs `task(i)` for i in [0, count) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t count, std::size_t threads, F task) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// One row per (noise, method), noises outer. Results do not depend on the
/// number of workers.
inline std::vector<MethodSummary> simulate(const SimulationConfig& c) {
  if (c.n < 4) throw contract_error("simulate: n must be >= 4");
  if (c.reps == 0) throw contract_error("simulate: reps must be >= 1");
  if (!(c.sigma > 0.0)) throw contract_error("simulate: sigma must be > 0");
  const auto signal = scenario_signal(c.scenario, c.n, c.sigma);
  const std::size_t M = c.methods.size();
  std::vector<MethodSummary> out;
  for (std::size_t k = 0; k < c.noises.size(); ++k) {
    const Noise noise = c.noises[k];
    std::vector<double> mse(c.reps * M), segs(c.reps * M);
    const std::uint64_t noise_seed = derive_seed(c.seed, static_cast<std::uint64_t>(noise));
    parallel_for(c.reps * M, worker_count(c.threads), [&](std::size_t job) {
      const std::size_t rep = job / M, mi = job % M;
      const auto y = noisy_series(c, noise, signal, derive_seed(noise_seed, rep));
      const auto [fit, d] = fit_method(c.methods[mi], y, c.sigma);
      double s = 0.0;
      for (std::size_t i = 0; i < c.n; ++i) s += (fit[i] - signal[i]) * (fit[i] - signal[i]);
      mse[job] = s / static_cast<double>(c.n);
      segs[job] = static_cast<double>(d);
    });
    for (std::size_t mi = 0; mi < M; ++mi) {
      double m = 0, d = 0;
      for (std::size_t r = 0; r < c.reps; ++r) {
        m += mse[r * M + mi];
        d += segs[r * M + mi];
      }
      m /= static_cast<double>(c.reps);
      d /= static_cast<double>(c.reps);
      double v = 0;
      for (std::size_t r = 0; r < c.reps; ++r) v += std::pow(mse[r * M + mi] - m, 2);
      const double sd = c.reps > 1 ? std::sqrt(v / static_cast<double>(c.reps - 1)) : 0.0;
      out.push_back({noise, c.methods[mi], m, sd, d});
    }
  }
  return out;
}

inline std::string simulation_csv(const std::vector<MethodSummary>& rows) {
  std::string s = "noise,method,mse_mean,mse_sd,segments_mean\n";
  for (const auto& r : rows) {
    s += to_string(r.noise);
    s += ',';
    s += to_string(r.method);
    s += ',' + sig12(r.mse_mean) + ',' + sig12(r.mse_sd) + ',' + sig12(r.segments_mean) + '\n';
  }
  return s;
}

}  // namespace graphseg

#endif  // GRAPHSEG_SIMULATE_HPP

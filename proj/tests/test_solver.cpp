#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "graphseg/baselines.hpp"
#include "graphseg/io.hpp"
#include "graphseg/solver.hpp"
#include "oracles.hpp"

using namespace graphseg;

namespace {

Graph shipped(const std::string& name) {
  return read_graph_file(std::string(GRAPHSEG_GRAPHS) + "/" + name + ".csv");
}

Graph with_std_penalty(Graph g, double beta) {
  for (auto& e : g.edges)
    if (e.type == EdgeType::Std) e.penalty = beta;
  return g;
}

struct Checked {
  SolverTrace trace;
  Path path;
  Segmentation seg;
  double cost;
};

// Solves and asserts feasibility, forced flags and the cost identity.
Checked checked_solve(const std::vector<double>& y, const Graph& g, const LossSpec& loss,
                      const std::vector<double>& w = {}) {
  Checked c{forward(y, g, loss, w), {}, {}, 0};
  c.path = backtrack(c.trace);
  c.seg = compress_path(c.trace, c.path);
  const std::size_t n = y.size();
  const auto violations = check_path(c.trace, c.path);
  INFO((violations.empty() ? std::string() : violations.front()));
  REQUIRE(violations.empty());
  REQUIRE(check_segmentation(c.seg, n).empty());

  double best = kInf;
  for (std::size_t s = 0; s < c.trace.graph.states.size(); ++s)
    if (c.trace.graph.is_end[s]) best = std::min(best, global_min(c.trace.costs[n - 1][s]).value);
  double direct = 0, pen = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const Robust r = t == 0 ? c.trace.graph.start_robust[c.path.states[0]]
                            : c.trace.graph.edges[c.path.edges[t]].robust;
    direct += (w.empty() ? 1.0 : w[t]) * loss.weight * loss_value(loss, y[t], c.path.means[t], r);
    if (t > 0) pen += c.trace.graph.edges[c.path.edges[t]].penalty;
  }
  c.cost = direct + pen;
  CHECK(std::abs(best - c.cost) <= 1e-6 * (1 + std::abs(c.cost)));
  CHECK(std::abs(c.seg.globalCost - direct) <= 1e-9 * (1 + std::abs(direct)));

  const Basis basis = basis_of(loss.family);
  for (std::size_t i = 0; i < c.seg.changepoints.size(); ++i) {
    const std::size_t t = c.seg.changepoints[i] - 1;
    CHECK(c.seg.parameters[i] == c.path.means[t]);
    CHECK(c.seg.states[i] == c.trace.graph.states[c.path.states[t]]);
    if (t + 1 == n) continue;
    const CompiledEdge& e = c.trace.graph.edges[c.path.edges[t + 1]];
    const double mu = c.path.means[t], nx = c.path.means[t + 1];
    const double r = e.gap == 0 ? 1.0 : e.gap;
    double slack = kInf;
    if (e.type == EdgeType::Up)
      slack = basis == Basis::LinLog ? nx - r * mu : nx - mu - e.gap;
    else if (e.type == EdgeType::Down)
      slack = basis == Basis::LinLog ? mu - r * nx : mu - nx - e.gap;
    CHECK(c.seg.forced[i] == (std::abs(slack) <= kFeasTol ? 1 : 0));
  }
  return c;
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n, double jump) {
  auto y = oracle::gaussian(rng, n);
  const std::size_t cut = n / 2;
  for (std::size_t i = cut; i < n; ++i) y[i] += jump;
  return y;
}

}  // namespace

TEST_CASE("single point solve") {
  std::vector<double> y{2.75};
  auto c = checked_solve(y, build_default_graph(GraphType::Std, 3.0), LossSpec{});
  CHECK(c.seg.changepoints == std::vector<std::size_t>{1});
  CHECK(c.seg.states == std::vector<std::string>{"Std"});
  CHECK(c.seg.parameters.size() == 1);
  CHECK(std::abs(c.seg.parameters[0] - 2.75) <= 1e-12);
  CHECK(c.seg.globalCost == Catch::Approx(0.0).margin(1e-20));
  CHECK(c.seg.forced.empty());
}

TEST_CASE("constant data gives one segment at the mean") {
  std::vector<double> y(15, -1.25);
  auto c = checked_solve(y, build_default_graph(GraphType::Std, 1.0), LossSpec{});
  CHECK(c.seg.changepoints == std::vector<std::size_t>{15});
  for (double m : c.path.means) CHECK(std::abs(m + 1.25) <= 1e-12);
  for (std::size_t s : c.path.states) CHECK(s == c.path.states.front());
}

TEST_CASE("penalised cost equals the exhaustive oracle") {
  std::mt19937_64 rng(101);
  const LossSpec gauss{};
  struct Case {
    std::string graph;
    Structure structure;
  };
  const Case cases[] = {{"std", {}},
                        {"3-segment", {SegmentCount::Exact, 3}},
                        {"at-least-2", {SegmentCount::AtLeastLength, 2}}};
  for (const auto& cs : cases) {
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = 3 + rng() % 8;
      auto y = random_series(rng, n, oracle::uniform(rng, 0, 5));
      const double beta = rep % 2 ? 2 * std::log(static_cast<double>(n)) : 0.0;
      auto g = with_std_penalty(shipped(cs.graph), beta);
      std::vector<double> w;
      if (rep % 5 == 4)
        for (std::size_t i = 0; i < n; ++i) w.push_back(oracle::uniform(rng, 0.5, 2));
      auto c = checked_solve(y, g, gauss, w);
      const double ref = exhaustive_segmentation_oracle(y, cs.structure, gauss, beta,
                                                        working_domain(y, g, gauss), w);
      INFO(cs.graph << " n=" << n << " beta=" << beta);
      CHECK(std::abs(c.cost - ref) <= 1e-8);
    }
  }
}

TEST_CASE("exhaustive agreement on the other loss families") {
  std::mt19937_64 rng(7);
  auto g = build_default_graph(GraphType::Std, 1.5);
  for (Family f : {Family::Poisson, Family::Exponential, Family::Variance,
                   Family::Binomial, Family::NegBin}) {
    LossSpec loss{f};
    loss.size = 3.0;
    for (int rep = 0; rep < 12; ++rep) {
      const std::size_t n = 2 + rng() % 8;
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double hi = i < n / 2 ? 1.0 : 4.0;
        switch (f) {
          case Family::Poisson:
          case Family::NegBin:
            y[i] = std::floor(oracle::uniform(rng, 0, 3 * hi));
            break;
          case Family::Binomial:
            y[i] = oracle::uniform(rng, 0, 1) < (hi > 1 ? 0.8 : 0.2) ? 1.0 : 0.0;
            break;
          default:
            y[i] = oracle::uniform(rng, 0.1, hi);
        }
      }
      auto c = checked_solve(y, g, loss);
      const double ref =
          exhaustive_segmentation_oracle(y, {}, loss, 1.5, working_domain(y, g, loss));
      INFO(to_string(f) << " rep " << rep);
      CHECK(std::abs(c.cost - ref) <= 1e-8 * (1 + std::abs(ref)));
    }
  }
}

TEST_CASE("isotonic graph reproduces pava") {
  std::mt19937_64 rng(23);
  auto g = build_default_graph(GraphType::Isotonic, 0.0);
  for (int rep = 0; rep < 20; ++rep) {
    auto y = oracle::gaussian(rng, 200);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.01 * static_cast<double>(i);
    auto c = checked_solve(y, g, LossSpec{});
    auto fit = pava_l2(y);
    double dev = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      dev = std::max(dev, std::abs(c.path.means[i] - fit[i]));
    CHECK(dev <= 1e-8);
  }
}

TEST_CASE("compress_path examples") {
  auto s = compress_path({"A", "A", "B", "B", "A"}, {1, 1, 2, 2, 1});
  CHECK(s.changepoints == std::vector<std::size_t>{2, 4, 5});
  CHECK(s.states == std::vector<std::string>{"A", "B", "A"});
  CHECK(s.parameters == std::vector<double>{1, 2, 1});
  CHECK(s.forced.size() == 2);

  auto one = compress_path({"A", "A", "A"}, {4, 4, 4});
  CHECK(one.changepoints == std::vector<std::size_t>{3});

  auto d = compress_path({"D", "D", "D", "D", "D"}, {1, 0.9, 0.81, 2, 1.8}, {{"D", 0.9}});
  CHECK(d.changepoints == std::vector<std::size_t>{3, 5});
  CHECK(d.parameters == std::vector<double>{0.81, 1.8});
  CHECK_THROWS_AS(compress_path({"A"}, {1, 2}), contract_error);
}

TEST_CASE("abs edges behave like an up and a down edge") {
  std::mt19937_64 rng(31);
  Graph manual;
  manual.edges.push_back(make_edge("Abs", "Abs", EdgeType::Null));
  manual.edges.push_back(make_edge("Abs", "Abs", EdgeType::Up, 10, 1));
  manual.edges.push_back(make_edge("Abs", "Abs", EdgeType::Down, 10, 1));
  auto rel = build_default_graph(GraphType::Relevant, 10, 1);
  for (int rep = 0; rep < 10; ++rep) {
    auto y = random_series(rng, 60, oracle::uniform(rng, 0, 4));
    for (std::size_t i = 0; i < 10; ++i) y[i] += 0.5;
    auto a = checked_solve(y, rel, LossSpec{});
    auto b = checked_solve(y, manual, LossSpec{});
    CHECK(std::abs(a.cost - b.cost) <= 1e-8 * (1 + std::abs(a.cost)));
    for (std::size_t i = 0; i + 1 < a.seg.changepoints.size(); ++i) {
      CHECK(std::abs(a.path.means[a.seg.changepoints[i]] - a.seg.parameters[i]) >=
            1 - kFeasTol);
    }
  }
}

TEST_CASE("changepoint count is nonincreasing in the penalty") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 5; ++rep) {
    auto y = oracle::gaussian(rng, 150);
    for (std::size_t i = 40; i < 90; ++i) y[i] += 1.5;
    for (std::size_t i = 120; i < 150; ++i) y[i] -= 1.0;
    std::size_t prev = y.size() + 1;
    for (double k : {0.0, 1.0, 2.0, 4.0, 8.0}) {
      auto g = build_default_graph(GraphType::Std, k * std::log(150.0));
      auto c = checked_solve(y, g, LossSpec{});
      CHECK(c.seg.changepoints.size() <= prev);
      prev = c.seg.changepoints.size();
    }
  }
}

TEST_CASE("a std-only self edge forces a change at every step") {
  Graph g;
  g.edges.push_back(make_edge("S", "S", EdgeType::Std, 0.0));
  std::mt19937_64 rng(47);
  auto y = oracle::gaussian(rng, 25);
  auto c = checked_solve(y, g, LossSpec{});
  CHECK(c.seg.changepoints.size() == y.size());
  CHECK(c.seg.globalCost == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("infeasible and invalid inputs") {
  std::vector<double> two{1, 2};
  CHECK_THROWS_AS(solve(two, shipped("3-segment"), LossSpec{}), infeasible_error);
  std::vector<double> neg{1, -1, 2};
  CHECK_THROWS_AS(solve(neg, build_default_graph(GraphType::Std, 1), LossSpec{Family::Poisson}),
                  contract_error);
  CHECK_THROWS_AS(solve(std::vector<double>{}, build_default_graph(GraphType::Std, 1), LossSpec{}),
                  contract_error);
  std::vector<double> w{1};
  CHECK_THROWS_AS(solve(two, build_default_graph(GraphType::Std, 1), LossSpec{}, w),
                  contract_error);
}

TEST_CASE("solver cost bounds the grid oracle on shipped graphs") {
  std::mt19937_64 rng(59);
  const char* names[] = {"std", "isotonic", "updown", "relevant", "3-segment",
                         "at-least-2", "at-least-3", "up-exp-decay", "updownstar",
                         "collective"};
  for (const char* name : names) {
    auto g = shipped(name);
    for (auto& e : g.edges)
      if (e.penalty > 0) e.penalty = 3.0;
    auto y = random_series(rng, 30, 3.0);
    auto c = checked_solve(y, g, LossSpec{});
    const double coarse = grid_dp_oracle(y, g, LossSpec{}, 501).cost;
    const double fine = grid_dp_oracle(y, g, LossSpec{}, 1001).cost;
    INFO(name << " solver " << c.cost << " grid " << fine);
    CHECK(c.cost <= fine + 1e-8);
    CHECK(fine <= coarse);
    CHECK(fine - c.cost <= 0.1 * (1 + c.cost));
  }
}

TEST_CASE("decay segments follow the geometric relation") {
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) y.push_back(10 * std::pow(0.9, i));
  for (int i = 0; i < 30; ++i) y.push_back(20 * std::pow(0.9, i));
  auto c = checked_solve(y, shipped("up-exp-decay"), LossSpec{});
  CHECK(c.seg.changepoints == std::vector<std::size_t>{30, 60});
  CHECK(std::abs(c.seg.parameters[0] - 10 * std::pow(0.9, 29)) <= 1e-8);
  CHECK(c.seg.forced == std::vector<int>{0});
  CHECK(c.seg.globalCost <= 1e-12);
}

TEST_CASE("ratio gaps in the LinLog basis") {
  std::mt19937_64 rng(61);
  Graph g;
  g.edges.push_back(make_edge("A", "A", EdgeType::Null));
  g.edges.push_back(make_edge("A", "A", EdgeType::Up, 2.0, 1.5));
  g.edges.push_back(make_edge("A", "A", EdgeType::Down, 2.0, 1.5));
  const LossSpec pois{Family::Poisson};
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
      std::poisson_distribution<int> d(i < 20 ? 3.0 : 12.0);
      y.push_back(d(rng));
    }
    auto c = checked_solve(y, g, pois);
    for (std::size_t i = 0; i + 1 < c.seg.changepoints.size(); ++i) {
      const double a = c.seg.parameters[i];
      const double b = c.path.means[c.seg.changepoints[i]];
      CHECK(std::max(a / b, b / a) >= 1.5 - 1e-8);
    }
    const double grid = grid_dp_oracle(y, g, pois, 2001).cost;
    CHECK(c.cost <= grid + 1e-8);
    CHECK(grid - c.cost <= 0.05 * (1 + std::abs(c.cost)));
  }
}

TEST_CASE("robust losses and node ranges in the collective graph") {
  std::mt19937_64 rng(67);
  auto y = oracle::gaussian(rng, 80, 0.0, 0.5);
  for (std::size_t i = 30; i < 40; ++i) y[i] += 4;
  y[60] = 25;
  auto c = checked_solve(y, shipped("collective"), LossSpec{});
  for (std::size_t i = 0; i < c.seg.states.size(); ++i)
    if (c.seg.states[i] == "mu0") CHECK(c.seg.parameters[i] == 0.0);
  // The outlier at t = 61 is absorbed by the biweight instead of a segment.
  for (std::size_t cp : c.seg.changepoints) CHECK((cp < 58 || cp > 63 || cp == 80));
}

TEST_CASE("piece counts stay small on long updown runs") {
  std::mt19937_64 rng(71);
  auto y = oracle::gaussian(rng, 5000);
  for (std::size_t i = 1000; i < 2500; ++i) y[i] += 2;
  auto sol = solve_detailed(y, build_default_graph(GraphType::UpDown, 2 * std::log(5000.0)),
                            LossSpec{});
  CHECK(sol.max_pieces < 10 * 2 * std::log(5000.0));
  CHECK(sol.segmentation.changepoints.size() >= 3);
}

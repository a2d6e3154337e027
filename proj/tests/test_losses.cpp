#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "graphseg/losses.hpp"
#include "oracles.hpp"

using namespace graphseg;
using Catch::Approx;

namespace {

FunctionalCost accumulate(Family fam, const std::vector<double>& ys, Interval d,
                          double size = 1.0) {
  LossSpec spec{fam};
  spec.size = size;
  auto total = loss_cost(spec, ys[0], d, {});
  for (std::size_t i = 1; i < ys.size(); ++i)
    total = add_piecewise(total, loss_cost(spec, ys[i], d, {}));
  return total;
}

// Argmin of a pure loss on a fine grid, used to check closed forms.
double grid_argmin(Family fam, const std::vector<double>& ys, Interval d,
                   double size = 1.0) {
  LossSpec spec{fam};
  spec.size = size;
  const int N = 200000;
  double best = kInf, arg = d.lower;
  for (int i = 0; i <= N; ++i) {
    const double x = d.lower + (d.upper - d.lower) * i / N;
    double v = 0;
    for (double y : ys) v += loss_value(spec, y, x);
    if (v < best) {
      best = v;
      arg = x;
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("gauss loss pieces", "[losses]") {
  auto f = gauss_loss(0.0, {-5, 5});
  REQUIRE(f.size() == 1);
  CHECK(f.pieces()[0] == Piece{-5, 5, 0, 0, 1});
  auto g = gauss_loss(2.0, {-5, 5});
  CHECK(g.pieces()[0] == Piece{-5, 5, 4, -4, 1});
}

TEST_CASE("biweight is quadratic inside and flat outside", "[losses]") {
  auto f = gauss_loss(0.0, {-10, 10}, {3.0, 0.0});
  CHECK(f(5.0) == 9.0);
  CHECK(f(2.0) == 4.0);
  CHECK(f(-7.0) == 9.0);
  auto inf_slope = gauss_loss(0.0, {-10, 10}, {3.0, kInf});
  CHECK(inf_slope(5.0) == 9.0);
}

TEST_CASE("huber is continuous with slope a outside", "[losses]") {
  auto f = gauss_loss(1.7, {-10, 10}, {2.0, 1.0});
  CHECK(f(3.7) == Approx(4.0).epsilon(1e-14));
  CHECK(f(4.2) == Approx(4.5).epsilon(1e-14));
  CHECK(f(-1.3) == Approx(4.0 + 1.0).epsilon(1e-14));
}

TEST_CASE("robust losses: inside equality and continuity", "[losses][property]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double y = oracle::uniform(rng, -5, 5);
    const double K = oracle::uniform(rng, 0.1, 4);
    const double a = trial % 2 ? 0.0 : oracle::uniform(rng, 0.1, 5);
    const Interval d{-12, 12};
    auto f = gauss_loss(y, d, {K, a});
    for (double x : oracle::sample_points(rng, {y - K, y + K}, 50))
      REQUIRE(std::abs(f(x) - (x - y) * (x - y)) <= 1e-12 * (1 + (x - y) * (x - y)));
    for (double edge : {y - K, y + K}) {
      double left = kInf, right = kInf;
      for (const Piece& p : f.pieces()) {
        if (p.upper == edge) left = eval_piece(Basis::L2, p, edge);
        if (p.lower == edge) right = eval_piece(Basis::L2, p, edge);
      }
      REQUIRE(std::abs(left - right) <= 1e-10);
    }
    for (double x : oracle::sample_points(rng, d, 50))
      REQUIRE(std::abs(f(x) - loss_value({Family::Gauss}, y, x, {K, a})) <= 1e-10 * (1 + f(x)));
  }
}

TEST_CASE("robust pieces clip to the domain", "[losses]") {
  auto f = gauss_loss(0.0, {-1, 1}, {3.0, 0.0});
  REQUIRE(f.size() == 1);
  CHECK(f.is_tiled());
  auto g = gauss_loss(9.0, {-1, 1}, {3.0, 0.0});
  REQUIRE(g.size() == 1);
  CHECK(g(0.0) == 9.0);
}

TEST_CASE("poisson loss", "[losses]") {
  auto z = poisson_loss(0.0, {0, 10});
  CHECK(z.pieces()[0].same_coefficients({0, 0, 0, 1, 0}));
  CHECK(global_min(z).argmin == z.domain().lower);
  CHECK(global_min(poisson_loss(4.0, {0, 10})).argmin == Approx(4.0));
  CHECK(global_min(accumulate(Family::Poisson, {3, 5, 4}, {0, 10})).argmin ==
        Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(poisson_loss(-1.0, {0, 10}), contract_error);
}

TEST_CASE("exponential loss", "[losses]") {
  CHECK(global_min(exponential_loss(1.0, {0, 10})).argmin == Approx(1.0));
  CHECK(global_min(exponential_loss(2.0, {0, 10})).argmin == Approx(0.5));
  CHECK(global_min(accumulate(Family::Exponential, {1, 3}, {0, 10})).argmin ==
        Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(exponential_loss(0.0, {0, 10}), contract_error);
}

TEST_CASE("variance loss", "[losses]") {
  auto z = variance_loss(0.0, {0, 10});
  CHECK(z.pieces()[0].same_coefficients({0, 0, 0, 0, -0.5}));
  CHECK(global_min(z).argmin == z.domain().upper);
  CHECK(global_min(variance_loss(std::sqrt(2.0), {0, 10})).argmin == Approx(0.5));
  CHECK(global_min(accumulate(Family::Variance, {1, -1}, {0, 10})).argmin ==
        Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binomial and negative binomial losses", "[losses]") {
  auto b = binomial_loss(1.0, {0, 1});
  CHECK(b.pieces()[0].same_coefficients({0, 0, 0, -1, 0}));
  CHECK(global_min(b).argmin == b.domain().upper);
  CHECK(global_min(accumulate(Family::Binomial, {1, 0, 0, 1}, {0, 1})).argmin ==
        Approx(0.5).epsilon(1e-12));
  const double nb = global_min(accumulate(Family::NegBin, {3, 3}, {0, 1})).argmin;
  CHECK(nb == Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(nb - grid_argmin(Family::NegBin, {3, 3}, {1e-6, 1 - 1e-6})) < 1e-5);
  CHECK_THROWS_AS(binomial_loss(1.5, {0, 1}), contract_error);
  CHECK_THROWS_AS(negbin_loss(-2.0, 1.0, {0, 1}), contract_error);
}

TEST_CASE("accumulated losses recover the closed-form estimate", "[losses][property]") {
  std::mt19937_64 rng(8);
  struct Case {
    Family fam;
    Interval dom;
  };
  const Case cases[] = {{Family::Gauss, {-10, 10}},    {Family::Poisson, {0, 30}},
                        {Family::Exponential, {0, 30}}, {Family::Variance, {0, 30}},
                        {Family::Binomial, {0, 1}},     {Family::NegBin, {0, 1}}};
  for (const Case& c : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> ys(20);
      for (auto& y : ys) {
        switch (c.fam) {
          case Family::Gauss: y = oracle::uniform(rng, -3, 3); break;
          case Family::Poisson:
          case Family::NegBin: y = static_cast<double>(rng() % 9); break;
          case Family::Exponential: y = oracle::uniform(rng, 0.2, 3); break;
          case Family::Variance: y = oracle::uniform(rng, -2, 2); break;
          case Family::Binomial: y = static_cast<double>(rng() % 2); break;
        }
      }
      const double size = 2.0;
      LossSpec spec{c.fam};
      spec.size = size;
      auto total = accumulate(c.fam, ys, c.dom, size);
      const double mle = segment_mle(spec, ys, {}, total.domain());
      REQUIRE(std::abs(global_min(total).argmin - mle) <= 1e-6 * (1 + mle));
      const double grid = grid_argmin(c.fam, ys, total.domain(), size);
      REQUIRE(std::abs(grid - mle) <= 1e-3 * (1 + mle));
    }
  }
}

TEST_CASE("weights scale the loss", "[losses]") {
  auto f = loss_cost({Family::Gauss}, 1.0, {-3, 3}, {}, 2.5);
  CHECK(f(0.0) == Approx(2.5));
  LossSpec spec{Family::Poisson};
  spec.weight = 2.0;
  auto g = loss_cost(spec, 3.0, {0, 10}, {}, 1.5);
  CHECK(g(2.0) == Approx(3.0 * (2.0 - 3.0 * std::log(2.0))));
}

TEST_CASE("family names", "[losses]") {
  CHECK(parse_family("mean") == Family::Gauss);
  CHECK(parse_family("exp") == Family::Exponential);
  CHECK(basis_of(Family::NegBin) == Basis::LogLog);
  CHECK(basis_of(Family::Variance) == Basis::LinLog);
  CHECK_THROWS_AS(parse_family("laplace"), contract_error);
}

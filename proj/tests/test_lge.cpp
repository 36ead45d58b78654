#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "crowdsel/lge.hpp"
#include "oracles.hpp"

using namespace crowdsel;

TEST_SUITE("lge-estimator") {
  TEST_CASE("irt_prob examples") {
    for (double a : {0.0, 0.5, 3.0}) CHECK(irt_prob(a, 0.0, 0.0) == 0.5);
    CHECK(irt_prob(1.0, 0.0, std::numbers::e - 1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
    CHECK(irt_prob(1.0, 0.0, std::numbers::e - 1.0) == doctest::Approx(0.731059).epsilon(1e-6));
    CHECK(irt_prob(0.0, -2.0, 100.0) == doctest::Approx(0.880797).epsilon(1e-6));
    CHECK_THROWS(irt_prob(1.0, 0.0, -1.0));
  }

  TEST_CASE("irt_prob at K = 0 is exactly logistic(-beta)") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int i = 0; i < 1000; ++i) {
      const double beta = u(rng);
      CHECK(irt_prob(std::abs(u(rng)), beta, 0.0) == logistic(-beta));
    }
  }

  TEST_CASE("irt_prob is monotone in K and in alpha") {
    for (double alpha : {0.0, 0.3, 1.0, 5.0}) {
      double prev = 0.0;
      for (double K = 0.0; K < 1000.0; K += 3.7) {
        const double p = irt_prob(alpha, 0.4, K);
        CHECK(p >= prev);
        CHECK((p > 0.0 && p < 1.0));
        prev = p;
      }
    }
    CHECK(irt_prob(2.0, 0.0, 10.0) > irt_prob(1.0, 0.0, 10.0));
  }

  TEST_CASE("init_difficulty examples") {
    CHECK(init_difficulty(0.5) == 0.0);
    CHECK(init_difficulty(0.70) == doctest::Approx(-0.847298).epsilon(1e-6));
    CHECK(init_difficulty(0.88) == doctest::Approx(-1.992430).epsilon(1e-6));
    CHECK_THROWS(init_difficulty(0.0));
    CHECK_THROWS(init_difficulty(1.0));
  }

  TEST_CASE("init_difficulty inverts irt_prob at K = 0") {
    for (double a = 0.01; a < 1.0; a += 0.01) CHECK(std::abs(irt_prob(7.0, init_difficulty(a), 0.0) - a) < 1e-12);
  }

  TEST_CASE("cumulative_tasks examples") {
    CHECK(cumulative_tasks(1, 270, 27) == 10.0);
    CHECK(cumulative_tasks(2, 270, 27) == 30.0);
    CHECK(cumulative_tasks(0, 800, 40) == 0.0);
    CHECK(cumulative_tasks(3, 800, 40) == 140.0);
  }

  TEST_CASE("fit_alpha inverts a single target point") {
    // p_1 pairs with K_0 = 0, where every slope gives 0.5.
    const std::vector<double> p = {0.5, 1.0 / (1.0 + std::exp(-1.0))};
    const double alpha = fit_alpha({}, {}, p, IrtParams{{}, 0.0}, std::numbers::e - 1.0);
    CHECK(alpha == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("fit_alpha recovers a slope from forward-model targets") {
    const double alpha_star = 0.4343;
    const std::vector<double> h = {irt_prob(alpha_star, 0.0, 9.0)};
    const std::vector<int> n = {9};
    const double alpha = fit_alpha(h, n, {}, IrtParams{{0.0}, 0.0}, 1.0);
    CHECK(alpha == doctest::Approx(alpha_star).epsilon(1e-6));
  }

  TEST_CASE("fit_alpha on contradictory targets beats the grid") {
    const std::vector<double> h = {0.2, 0.8};
    const std::vector<int> n = {9, 9};
    const IrtParams params{{0.0, 0.0}, 0.0};
    const double alpha = fit_alpha(h, n, {}, params, 1.0);
    auto f = [&](double a) { return alpha_objective(a, h, n, {}, params, 1.0); };
    CHECK(f(alpha) <= oracle::grid_min(f, 0.0, kAlphaMax, 2000).value + 1e-8);
  }

  TEST_CASE("lge_round with neutral inputs returns a_T") {
    const std::vector<double> a = {0.7, 0.88, 0.58};
    IrtParams params;
    for (double x : a) params.beta_prior.push_back(init_difficulty(x));
    params.beta_target = init_difficulty(0.5);
    const std::vector<int> n = {1, 1, 1};
    const std::vector<double> p = {0.5, 0.5};
    const std::vector<LgeWorker> ws = {{a, n, p}};
    const auto out = lge_round(ws, params, 2, 10.0);
    CHECK(out.alpha[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(out.p_hat[0] == doctest::Approx(0.5).epsilon(1e-6));
  }

  TEST_CASE("lge_round gives identical outputs for identical workers and permutes with them") {
    IrtParams params{{-0.8, 0.3}, 0.0};
    const std::vector<double> h1 = {0.9, 0.4}, h2 = {0.5, 0.6};
    const std::vector<int> n = {20, 20};
    const std::vector<double> p1 = {0.7, 0.8}, p2 = {0.3, 0.35};
    const std::vector<LgeWorker> ab = {{h1, n, p1}, {h2, n, p2}, {h1, n, p1}};
    const std::vector<LgeWorker> ba = {{h2, n, p2}, {h1, n, p1}, {h1, n, p1}};
    const auto x = lge_round(ab, params, 2, 20.0);
    const auto y = lge_round(ba, params, 2, 20.0);
    CHECK(x.p_hat[0] == x.p_hat[2]);
    CHECK(x.p_hat[0] == y.p_hat[1]);
    CHECK(x.p_hat[1] == y.p_hat[0]);
    for (double v : x.p_hat) CHECK((v > 0.0 && v < 1.0));
  }

  TEST_CASE("p_hat does not decrease with more training at a fixed slope") {
    double prev = 0.0;
    for (int c = 1; c <= 6; ++c) {
      const double v = irt_prob(0.7, 0.2, cumulative_tasks(c, 20.0));
      CHECK(v >= prev);
      prev = v;
    }
  }
}

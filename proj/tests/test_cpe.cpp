#include <cmath>
#include <random>

#include "doctest.h"

#include "crowdsel/cpe.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crowdsel;

namespace {

const Quadrature& quad() {
  static const Quadrature q = Quadrature::gauss_legendre(512);
  return q;
}

AnswerBatch batch(Bits given, Bits truth) {
  AnswerBatch b;
  b.given = std::move(given);
  b.ground_truth = std::move(truth);
  return b;
}

DomainModel model1(double rho) {
  DomainModel m;
  m.mu = Eigen::Vector2d(0.7, 0.5);
  m.sigma = Eigen::Vector2d(0.2, 0.15);
  m.rho = Eigen::Matrix2d{{1.0, rho}, {rho, 1.0}};
  return m;
}

}  // namespace

TEST_SUITE("cpe-estimator") {
  TEST_CASE("count_answers examples") {
    CHECK(count_answers(batch({1, 0, 1, 1, 0}, {1, 1, 1, 0, 0})) == AnswerCounts{3, 2});
    const Bits ten(10, 1);
    CHECK(count_answers(batch(ten, ten)) == AnswerCounts{10, 0});
    CHECK(count_answers(batch({}, {})) == AnswerCounts{0, 0});
    CHECK_THROWS(count_answers(batch({1}, {})));
  }

  TEST_CASE("initial_model follows the history moments") {
    const auto ds = fixture::dataset({{0.6, 0.9}, {0.8, 0.7}, {0.7, 0.8}});
    Rng rng = make_rng(3, Stream::model_init);
    const DomainModel m = initial_model(ds.workers, 0.5, rng);
    CHECK(m.mu(0) == doctest::Approx(0.7));
    CHECK(m.mu(1) == doctest::Approx(0.8));
    CHECK(m.mu(2) == 0.5);
    CHECK(m.sigma(0) == doctest::Approx(0.1));
    CHECK(m.sigma(2) == doctest::Approx(0.1));
    CHECK(project_valid(m) == m);
  }

  TEST_CASE("initial_model is seeded") {
    const auto ds = fixture::dataset({{0.6, 0.9}, {0.8, 0.7}, {0.7, 0.8}});
    Rng a = make_rng(3, Stream::model_init);
    Rng b = make_rng(3, Stream::model_init);
    Rng c = make_rng(4, Stream::model_init);
    CHECK(initial_model(ds.workers, 0.5, a) == initial_model(ds.workers, 0.5, b));
    Rng a2 = make_rng(3, Stream::model_init);
    CHECK_FALSE(initial_model(ds.workers, 0.5, a2) == initial_model(ds.workers, 0.5, c));
  }

  TEST_CASE("fit_mle with G = 0 or zero rates leaves the model alone") {
    CpeState s;
    s.model = model1(0.6);
    const std::vector<WorkerEvidence> ws = {{{0.9}, 8, 2}};
    SelectionConfig cfg;
    cfg.G = 0;
    CHECK(fit_mle(s, ws, cfg, quad()).model == s.model);
    cfg.G = 10;
    cfg.r1 = 0.0;
    cfg.r2 = 0.0;
    CHECK(fit_mle(s, ws, cfg, quad()).model == s.model);
  }

  TEST_CASE("fit_mle with zero counts never lowers the likelihood") {
    CpeState s;
    s.model = model1(0.3);
    s.model.mu(1) = 0.95;
    const std::vector<WorkerEvidence> ws = {{{0.9}, 0, 0}, {{0.4}, 0, 0}, {{0.2}, 0, 0}};
    SelectionConfig cfg;
    cfg.r1 = 1e-3;
    cfg.r2 = 1e-3;
    const CpeState out = fit_mle(s, ws, cfg, quad());
    REQUIRE(out.loglik_trace.size() == static_cast<std::size_t>(cfg.G + 1));
    for (std::size_t i = 1; i < out.loglik_trace.size(); ++i) CHECK(out.loglik_trace[i] >= out.loglik_trace[i - 1]);
    CHECK(out.loglik_trace.back() > out.loglik_trace.front());
  }

  TEST_CASE("a perfect worker pulls mu_T up") {
    CpeState s;
    s.model = model1(0.5);
    const std::vector<WorkerEvidence> ws = {{{0.9}, 20, 0}};
    // Sign of the ascent direction from finite differences at the start.
    const double fd = oracle::central_difference(
        [&](double v) {
          DomainModel x = s.model;
          x.mu(1) = v;
          return log_likelihood(x, ws, quad());
        },
        s.model.mu(1), 1e-5);
    REQUIRE(fd > 0.0);
    SelectionConfig cfg;
    cfg.r1 = 1e-4;
    const CpeState out = fit_mle(s, ws, cfg, quad());
    CHECK(out.model.mu(1) > s.model.mu(1));
  }

  TEST_CASE("fitted parameters stay within projection bounds") {
    std::mt19937_64 rng(17);
    CpeState s;
    s.model = oracle::random_model(2, rng);
    std::vector<WorkerEvidence> ws;
    std::uniform_int_distribution<int> cnt(0, 30);
    std::uniform_real_distribution<double> h(0.0, 1.0);
    for (int i = 0; i < 25; ++i) ws.push_back({{h(rng), h(rng)}, cnt(rng), cnt(rng)});
    SelectionConfig cfg;
    cfg.r1 = 1e-2;
    cfg.r2 = 1e-2;
    const CpeState out = fit_mle(s, ws, cfg, quad());
    CHECK(project_valid(out.model) == out.model);
    CHECK((out.model.sigma.array() >= kSigmaMin).all());
  }

  TEST_CASE("prediction with independent target is mu_T for every history") {
    CpeState s;
    s.model = model1(0.0);
    for (double h : {0.1, 0.5, 0.99}) {
      CHECK(predict_accuracy(s, std::vector<double>{h}, quad()) == doctest::Approx(0.5).epsilon(1e-12));
    }
  }

  TEST_CASE("prediction on the worked example matches the Riemann oracle") {
    CpeState s;
    s.model = model1(0.6);
    const double p = predict_accuracy(s, std::vector<double>{0.9}, quad());
    CHECK(std::abs(p - oracle::truncated_mean(0.59, 0.0144)) < 1e-6);
  }

  TEST_CASE("higher history gives a higher prediction under positive correlation") {
    CpeState s;
    s.model = model1(0.6);
    double prev = 0.0;
    for (double h = 0.0; h <= 1.0; h += 0.05) {
      const double p = predict_accuracy(s, std::vector<double>{h}, quad());
      CHECK(p >= prev);
      prev = p;
    }
  }

  TEST_CASE("cpe_round: a perfect single worker beats the pre-fit prediction") {
    CpeState s;
    s.model = model1(0.5);
    const std::vector<double> h = {0.9};
    const double before = predict_accuracy(s, h, quad());
    SelectionConfig cfg;
    cfg.r1 = 1e-4;
    const std::vector<AnswerBatch> answers = {batch(Bits(20, 1), Bits(20, 1))};
    const std::vector<std::vector<double>> histories = {h};
    const auto out = cpe_round(s, answers, histories, cfg, quad());
    CHECK(out.p[0] > before);
    CHECK(out.state.history.size() == 1);
  }

  TEST_CASE("cpe_round is permutation equivariant") {
    std::mt19937_64 rng(8);
    CpeState s;
    s.model = oracle::random_model(2, rng);
    SelectionConfig cfg;
    const std::vector<std::vector<double>> hs = {{0.9, 0.4}, {0.2, 0.7}, {0.9, 0.4}, {0.5, 0.5}};
    const std::vector<AnswerBatch> as = {batch({1, 1, 0, 1}, {1, 1, 1, 1}), batch({0, 0, 0, 1}, {1, 1, 1, 1}),
                                         batch({1, 1, 0, 1}, {1, 1, 1, 1}), batch({1, 0, 0, 1}, {1, 1, 1, 1})};
    const auto x = cpe_round(s, as, hs, cfg, quad());
    CHECK(x.p[0] == x.p[2]);

    const std::vector<std::size_t> perm = {3, 1, 0, 2};
    std::vector<std::vector<double>> hp;
    std::vector<AnswerBatch> ap;
    for (auto i : perm) {
      hp.push_back(hs[i]);
      ap.push_back(as[i]);
    }
    const auto y = cpe_round(s, ap, hp, cfg, quad());
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(y.p[i] == doctest::Approx(x.p[perm[i]]).epsilon(1e-12));
    for (double p : x.p) CHECK((p >= 0.0 && p <= 1.0));
  }
}

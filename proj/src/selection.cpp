#include "crowdsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "crowdsel/cpe.hpp"
#include "crowdsel/gaussian.hpp"
#include "crowdsel/lge.hpp"
#include "crowdsel/log.hpp"

namespace crowdsel {

BudgetPlan plan_budget(int W0, int k, int Q, std::optional<long long> B_override) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (k > W0) throw std::invalid_argument("k exceeds the worker pool");
  if (Q < 1) throw std::invalid_argument("Q must be at least 1");
  if (B_override && *B_override < 0) throw std::invalid_argument("budget must be non-negative");
  // Smallest n with k * 2^n >= W0, i.e. ceil(log2(W0/k)) in exact integers.
  int n = 0;
  while ((static_cast<long long>(k) << n) < W0) ++n;
  n = std::max(n, 1);
  BudgetPlan plan;
  plan.n_rounds = n;
  plan.B = B_override.value_or(static_cast<long long>(n) * Q * W0);
  plan.t = plan.B / n;
  plan.batches_total = (1LL << n) - 1;
  return plan;
}

std::vector<WorkerId> top_by_score(std::span<const double> scores, std::span<const WorkerId> ids, int count) {
  if (scores.size() != ids.size()) throw std::invalid_argument("scores and ids misaligned");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  const auto keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(count, 0)));
  std::vector<WorkerId> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(ids[order[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<WorkerId> median_eliminate(std::span<const double> scores, std::span<const WorkerId> ids) {
  const int keep = static_cast<int>((ids.size() + 1) / 2);
  return top_by_score(scores, ids, keep);
}

std::vector<double> default_prior_difficulties(const Dataset& dataset) {
  std::vector<double> betas;
  for (int d = 0; d < dataset.domains; ++d) {
    double mean = 0.0;
    for (const auto& w : dataset.workers) mean += w.h[static_cast<std::size_t>(d)];
    mean /= std::max<std::size_t>(dataset.workers.size(), 1);
    betas.push_back(init_difficulty(std::clamp(mean, 1e-6, 1.0 - 1e-6)));
  }
  return betas;
}

namespace {

struct Scored {
  std::vector<double> rank;  // elimination score aligned with the round's survivors
  std::vector<double> p;
  std::vector<double> p_hat;
  bool fallback = false;
  std::optional<DomainModel> model;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Scored score(int round, std::span<const WorkerId> survivors, std::span<const AnswerBatch> batches,
                       std::span<const AnswerCounts> counts) = 0;
  virtual void finish(RunResult&) {}
};

std::string describe(const DomainModel& m) {
  std::ostringstream os;
  os.precision(4);
  os << "mu=[" << m.mu.transpose() << "] sigma=[" << m.sigma.transpose() << "] rho_target=[";
  const auto d = m.domains();
  for (int i = 0; i < d; ++i) os << (i ? " " : "") << m.rho(i, d);
  os << "]";
  return os.str();
}

// CPE, optionally followed by LGE (ours vs. me-cpe).
class CpeScorer final : public Scorer {
 public:
  CpeScorer(const Dataset& ds, const SelectionConfig& cfg, bool with_lge, double first_round_tasks)
      : ds_(ds), cfg_(cfg), with_lge_(with_lge), first_round_tasks_(first_round_tasks),
        quad_(Quadrature::gauss_legendre(cfg.quad_nodes)),
        p_history_(ds.workers.size()) {
    Rng init_rng = make_rng(cfg.seed, Stream::model_init);
    state_.model = initial_model(ds.workers, cfg.a_T, init_rng);
    irt_.beta_prior = cfg.beta_prior.empty() ? default_prior_difficulties(ds) : cfg.beta_prior;
    irt_.beta_target = cfg.beta_target();
    if (static_cast<int>(irt_.beta_prior.size()) != ds.domains) {
      throw std::invalid_argument("beta_prior needs one value per prior domain");
    }
    if (with_lge_) alpha_.assign(ds.workers.size(), kAlphaInit);
  }

  Scored score(int round, std::span<const WorkerId> survivors, std::span<const AnswerBatch> batches,
               std::span<const AnswerCounts>) override {
    std::vector<std::vector<double>> histories;
    histories.reserve(survivors.size());
    for (WorkerId id : survivors) histories.push_back(ds_.workers[static_cast<std::size_t>(id)].h);

    CpeRoundResult cpe = cpe_round(std::move(state_), batches, histories, cfg_, quad_);
    state_ = std::move(cpe.state);
    if (state_.fit_aborted) warnings_.push_back("round " + std::to_string(round) + ": likelihood fit aborted");
    if (cpe.underflows > 0) {
      warnings_.push_back("round " + std::to_string(round) + ": " + std::to_string(cpe.underflows) +
                          " predictions used the clamped conditional mean");
    }
    if (log::enabled_info()) log::info("round " + std::to_string(round) + " model " + describe(state_.model));

    Scored s;
    s.p = cpe.p;
    s.model = state_.model;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      p_history_[static_cast<std::size_t>(survivors[i])].push_back(s.p[i]);
    }
    if (!with_lge_) {
      s.rank = s.p;
      return s;
    }

    std::vector<LgeWorker> lge_in;
    lge_in.reserve(survivors.size());
    for (WorkerId id : survivors) {
      const auto& w = ds_.workers[static_cast<std::size_t>(id)];
      lge_in.push_back({w.h, w.n, p_history_[static_cast<std::size_t>(id)]});
    }
    LgeRoundResult lge = lge_round(lge_in, irt_, round, first_round_tasks_);
    for (std::size_t i = 0; i < survivors.size(); ++i) alpha_[static_cast<std::size_t>(survivors[i])] = lge.alpha[i];
    s.p_hat = lge.p_hat;
    s.rank = s.p_hat;
    return s;
  }

  void finish(RunResult& r) override {
    r.final_model = state_.model;
    r.fitted_alpha = alpha_;
    r.warnings.insert(r.warnings.end(), warnings_.begin(), warnings_.end());
  }

 private:
  const Dataset& ds_;
  const SelectionConfig& cfg_;
  bool with_lge_;
  double first_round_tasks_;
  Quadrature quad_;
  CpeState state_;
  IrtParams irt_;
  std::vector<std::vector<double>> p_history_;
  std::vector<double> alpha_;
  std::vector<std::string> warnings_;
};

// Observed accuracy over every round the worker has survived.
class MeScorer final : public Scorer {
 public:
  explicit MeScorer(std::size_t workers) : cum_(workers) {}

  Scored score(int, std::span<const WorkerId> survivors, std::span<const AnswerBatch>,
               std::span<const AnswerCounts> counts) override {
    Scored s;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      auto& c = cum_[static_cast<std::size_t>(survivors[i])];
      c.correct += counts[i].correct;
      c.wrong += counts[i].wrong;
      const int total = c.correct + c.wrong;
      s.rank.push_back(total > 0 ? static_cast<double>(c.correct) / total : 0.5);
    }
    s.p = s.rank;
    return s;
  }

 private:
  std::vector<AnswerCounts> cum_;
};

// Least squares from (h, 1) to the round's observed accuracy.
class LiScorer final : public Scorer {
 public:
  LiScorer(const Dataset& ds, bool refit_each_round) : ds_(ds), refit_(refit_each_round) {}

  Scored score(int, std::span<const WorkerId> survivors, std::span<const AnswerBatch>,
               std::span<const AnswerCounts> counts) override {
    const auto rows = static_cast<Eigen::Index>(survivors.size());
    const Eigen::Index cols = ds_.domains + 1;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    std::vector<double> observed;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto& w = ds_.workers[static_cast<std::size_t>(survivors[static_cast<std::size_t>(r)])];
      for (int d = 0; d < ds_.domains; ++d) X(r, d) = w.h[static_cast<std::size_t>(d)];
      X(r, cols - 1) = 1.0;
      const auto& c = counts[static_cast<std::size_t>(r)];
      const int total = c.correct + c.wrong;
      y(r) = total > 0 ? static_cast<double>(c.correct) / total : 0.5;
      observed.push_back(y(r));
    }

    Scored s;
    if (refit_ || !coef_) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
      const bool ok = rows > cols && qr.rank() == cols && counts.size() > 0 &&
                      counts.front().correct + counts.front().wrong > 0;
      if (ok) {
        coef_ = qr.solve(y);
      } else {
        s.fallback = true;
      }
    }
    if (s.fallback || !coef_) {
      s.fallback = true;
      s.rank = observed;
    } else {
      const Eigen::VectorXd fitted = X * (*coef_);
      s.rank.assign(fitted.data(), fitted.data() + fitted.size());
    }
    s.p = s.rank;
    return s;
  }

 private:
  const Dataset& ds_;
  bool refit_;
  std::optional<Eigen::VectorXd> coef_;
};

void check_inputs(const Dataset& ds, const SelectionConfig& cfg) {
  const auto violations = validate_dataset(ds);
  if (!violations.empty()) {
    throw std::invalid_argument("invalid dataset: " + violations.front().message);
  }
  for (std::size_t i = 0; i < ds.workers.size(); ++i) {
    if (ds.workers[i].id != static_cast<int>(i)) throw std::invalid_argument("worker ids must be dense 0..|W|-1");
  }
  if (cfg.quad_nodes < 1) throw std::invalid_argument("quad_nodes must be positive");
  if (cfg.G < 0) throw std::invalid_argument("epochs must be non-negative");
  if (!(cfg.delta0 > 0.0 && cfg.delta0 < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

RunResult make_header(Method method, const SelectionConfig& cfg, const BudgetPlan& plan) {
  RunResult r;
  r.method = method;
  r.seed = cfg.seed;
  r.k = cfg.k;
  r.Q = cfg.Q;
  r.B = plan.B;
  r.n_rounds = plan.n_rounds;
  r.t = plan.t;
  r.eval_mode = cfg.eval_mode;
  return r;
}

std::vector<AnswerBatch> collect(AnswerOracle& oracle, std::span<const WorkerId> survivors, int round, int count,
                                 const std::vector<RoundRecord>& done) {
  std::vector<AnswerBatch> batches;
  batches.reserve(survivors.size());
  try {
    for (WorkerId id : survivors) {
      AnswerBatch b = oracle.serve(id, round, count);
      if (static_cast<int>(b.given.size()) != count || b.ground_truth.size() != b.given.size()) {
        throw std::runtime_error("oracle returned a batch of the wrong length");
      }
      if (!batches.empty() && b.ground_truth != batches.front().ground_truth) {
        throw std::runtime_error("oracle changed the ground truth within a round");
      }
      batches.push_back(std::move(b));
    }
  } catch (const RunAborted&) {
    throw;
  } catch (const std::exception& e) {
    throw RunAborted(std::string("oracle failure in round ") + std::to_string(round) + ": " + e.what(), done);
  }
  return batches;
}

std::vector<double> restrict_scores(std::span<const double> scores, std::span<const WorkerId> ids,
                                    std::span<const WorkerId> subset) {
  std::vector<double> out;
  out.reserve(subset.size());
  for (WorkerId id : subset) {
    const auto it = std::find(ids.begin(), ids.end(), id);
    out.push_back(scores[static_cast<std::size_t>(it - ids.begin())]);
  }
  return out;
}

RunResult run_elimination(Method method, const Dataset& ds, const SelectionConfig& cfg, AnswerOracle& oracle,
                          Scorer& scorer) {
  const int W0 = static_cast<int>(ds.workers.size());
  const BudgetPlan plan = plan_budget(W0, cfg.k, cfg.Q, cfg.B);
  RunResult res = make_header(method, cfg, plan);
  const double first_round_tasks = static_cast<double>(plan.t) / W0;

  std::vector<WorkerId> survivors(static_cast<std::size_t>(W0));
  std::iota(survivors.begin(), survivors.end(), 0);
  std::vector<std::vector<double>> rank_history;
  double delta = cfg.delta0;

  for (int c = 1; c <= plan.n_rounds; ++c) {
    RoundRecord rec;
    rec.round_index = c;
    rec.surviving_ids = survivors;
    const int per_worker = static_cast<int>(plan.t / static_cast<long long>(survivors.size()));
    rec.tasks_per_worker = per_worker;
    rec.delta_c = delta;
    rec.K_c = cumulative_tasks(c, first_round_tasks);

    std::vector<AnswerBatch> batches = collect(oracle, survivors, c, per_worker, res.rounds);
    std::vector<AnswerCounts> counts;
    counts.reserve(batches.size());
    for (const auto& b : batches) {
      counts.push_back(count_answers(b));
      rec.answers.push_back(b.given);
      rec.correct_counts.push_back(counts.back().correct);
      rec.wrong_counts.push_back(counts.back().wrong);
    }
    rec.ground_truth = batches.empty() ? Bits{} : batches.front().ground_truth;

    Scored s = scorer.score(c, survivors, batches, counts);
    rec.p_c = s.p;
    rec.p_hat_c = s.p_hat;
    rec.regression_fallback = s.fallback;
    rec.model = s.model;

    std::vector<WorkerId> next = median_eliminate(s.rank, survivors);
    for (WorkerId id : survivors) {
      if (!std::binary_search(next.begin(), next.end(), id)) rec.eliminated_ids.push_back(id);
    }
    res.budget_spent += static_cast<long long>(survivors.size()) * per_worker;
    res.rounds.push_back(std::move(rec));
    rank_history.push_back(std::move(s.rank));
    survivors = std::move(next);
    delta /= 2.0;
  }

  const int n = plan.n_rounds;
  if (static_cast<int>(survivors.size()) >= cfg.k) {
    const auto& ids = res.rounds[static_cast<std::size_t>(n - 1)].surviving_ids;
    res.selected_ids = top_by_score(restrict_scores(rank_history.back(), ids, survivors), survivors, cfg.k);
  } else if (n >= 2) {
    // Too few survivors: rank W_n by the previous round's scores.
    const auto& pool = res.rounds[static_cast<std::size_t>(n - 1)].surviving_ids;
    const auto& ids = res.rounds[static_cast<std::size_t>(n - 2)].surviving_ids;
    res.selected_ids = top_by_score(restrict_scores(rank_history[static_cast<std::size_t>(n - 2)], ids, pool), pool, cfg.k);
  } else {
    const auto& ids = res.rounds.front().surviving_ids;
    res.selected_ids = top_by_score(rank_history.front(), ids, cfg.k);
  }
  scorer.finish(res);
  return res;
}

}  // namespace

RunResult run_ours(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle) {
  check_inputs(dataset, cfg);
  const BudgetPlan plan = plan_budget(static_cast<int>(dataset.workers.size()), cfg.k, cfg.Q, cfg.B);
  CpeScorer scorer(dataset, cfg, true, static_cast<double>(plan.t) / static_cast<double>(dataset.workers.size()));
  return run_elimination(Method::ours, dataset, cfg, oracle, scorer);
}

RunResult run_me_cpe(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle) {
  check_inputs(dataset, cfg);
  const BudgetPlan plan = plan_budget(static_cast<int>(dataset.workers.size()), cfg.k, cfg.Q, cfg.B);
  CpeScorer scorer(dataset, cfg, false, static_cast<double>(plan.t) / static_cast<double>(dataset.workers.size()));
  return run_elimination(Method::me_cpe, dataset, cfg, oracle, scorer);
}

RunResult run_me(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle) {
  check_inputs(dataset, cfg);
  MeScorer scorer(dataset.workers.size());
  return run_elimination(Method::me, dataset, cfg, oracle, scorer);
}

RunResult run_li(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle) {
  check_inputs(dataset, cfg);
  LiScorer scorer(dataset, cfg.li_refit_each_round);
  return run_elimination(Method::li, dataset, cfg, oracle, scorer);
}

RunResult run_us(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle) {
  check_inputs(dataset, cfg);
  const int W0 = static_cast<int>(dataset.workers.size());
  const BudgetPlan plan = plan_budget(W0, cfg.k, cfg.Q, cfg.B);
  RunResult res = make_header(Method::us, cfg, plan);

  RoundRecord rec;
  rec.round_index = 1;
  rec.surviving_ids.resize(static_cast<std::size_t>(W0));
  std::iota(rec.surviving_ids.begin(), rec.surviving_ids.end(), 0);
  const int per_worker = static_cast<int>(plan.B / W0);
  rec.tasks_per_worker = per_worker;
  rec.delta_c = cfg.delta0;
  rec.K_c = per_worker;

  const auto batches = collect(oracle, rec.surviving_ids, 1, per_worker, res.rounds);
  for (const auto& b : batches) {
    const AnswerCounts c = count_answers(b);
    rec.answers.push_back(b.given);
    rec.correct_counts.push_back(c.correct);
    rec.wrong_counts.push_back(c.wrong);
    rec.p_c.push_back(per_worker > 0 ? static_cast<double>(c.correct) / per_worker : 0.5);
  }
  rec.ground_truth = batches.empty() ? Bits{} : batches.front().ground_truth;
  res.selected_ids = top_by_score(rec.p_c, rec.surviving_ids, cfg.k);
  for (WorkerId id : rec.surviving_ids) {
    if (!std::binary_search(res.selected_ids.begin(), res.selected_ids.end(), id)) rec.eliminated_ids.push_back(id);
  }
  res.budget_spent = static_cast<long long>(W0) * per_worker;
  res.rounds.push_back(std::move(rec));
  return res;
}

RunResult run_method(Method method, const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle) {
  switch (method) {
    case Method::ours: return run_ours(dataset, cfg, oracle);
    case Method::me: return run_me(dataset, cfg, oracle);
    case Method::us: return run_us(dataset, cfg, oracle);
    case Method::li: return run_li(dataset, cfg, oracle);
    case Method::me_cpe: return run_me_cpe(dataset, cfg, oracle);
  }
  throw std::invalid_argument("unknown method");
}

long long bound_tasks_per_worker(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("epsilon and delta must lie in (0,1)");
  }
  return static_cast<long long>(std::ceil(2.0 / (epsilon * epsilon) * std::log(3.0 / delta)));
}

BoundProbeResult theorem_probe(double epsilon, double delta, int trials, int W0, Rng& rng) {
  if (trials < 1 || W0 < 1) throw std::invalid_argument("trials and W0 must be positive");
  BoundProbeResult out;
  out.epsilon = epsilon;
  out.delta = delta;
  out.tasks_per_worker = bound_tasks_per_worker(epsilon, delta);
  out.trials = trials;

  std::vector<double> truth(static_cast<std::size_t>(W0));
  std::vector<double> observed(static_cast<std::size_t>(W0));
  std::vector<WorkerId> ids(static_cast<std::size_t>(W0));
  std::iota(ids.begin(), ids.end(), 0);
  boost::random::uniform_01<double> unif;
  for (int trial = 0; trial < trials; ++trial) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = unif(rng);
      boost::random::binomial_distribution<long long, double> bin(out.tasks_per_worker, truth[i]);
      observed[i] = static_cast<double>(bin(rng)) / static_cast<double>(out.tasks_per_worker);
    }
    const auto kept = median_eliminate(observed, ids);
    double best_kept = 0.0;
    for (WorkerId id : kept) best_kept = std::max(best_kept, truth[static_cast<std::size_t>(id)]);
    const double best_all = *std::max_element(truth.begin(), truth.end());
    if (best_kept < best_all - epsilon) ++out.failures;
  }
  out.failure_rate = static_cast<double>(out.failures) / trials;
  return out;
}

}  // namespace crowdsel

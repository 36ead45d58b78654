#include "crowdsel/cpe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "crowdsel/log.hpp"

namespace crowdsel {

AnswerCounts count_answers(const AnswerBatch& batch) {
  if (batch.given.size() != batch.ground_truth.size()) {
    throw std::invalid_argument("answer batch lengths differ");
  }
  AnswerCounts c;
  for (std::size_t j = 0; j < batch.given.size(); ++j) {
    if (batch.given[j] == batch.ground_truth[j]) ++c.correct;
  }
  c.wrong = static_cast<int>(batch.given.size()) - c.correct;
  return c;
}

DomainModel initial_model(std::span<const WorkerProfile> workers, double a_T, Rng& rng) {
  if (workers.empty()) throw std::invalid_argument("cannot initialize a model without workers");
  const auto d = static_cast<Eigen::Index>(workers.front().h.size());
  const Eigen::Index dim = d + 1;
  DomainModel m;
  m.mu = Eigen::VectorXd::Zero(dim);
  m.sigma = Eigen::VectorXd::Zero(dim);
  const double count = static_cast<double>(workers.size());
  for (Eigen::Index i = 0; i < d; ++i) {
    double mean = 0.0;
    for (const auto& w : workers) mean += w.h[static_cast<std::size_t>(i)];
    mean /= count;
    double ss = 0.0;
    for (const auto& w : workers) {
      const double dev = w.h[static_cast<std::size_t>(i)] - mean;
      ss += dev * dev;
    }
    m.mu(i) = mean;
    m.sigma(i) = workers.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  }
  m.mu(d) = a_T;
  // With no prior domains fall back to the stddev of U(0,1).
  m.sigma(d) = d > 0 ? m.sigma.head(d).mean() : std::sqrt(1.0 / 12.0);

  m.rho = Eigen::MatrixXd::Identity(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const double r = uniform01(rng);
      m.rho(i, j) = r;
      m.rho(j, i) = r;
    }
  }
  return project_valid(std::move(m));
}

CpeState fit_mle(CpeState state, std::span<const WorkerEvidence> workers, const SelectionConfig& cfg,
                 const Quadrature& quad) {
  state.fit_aborted = false;
  state.loglik_trace.clear();
  if (cfg.G <= 0 || workers.empty()) return state;

  double current = log_likelihood(state.model, workers, quad);
  state.loglik_trace.push_back(current);
  for (int epoch = 0; epoch < cfg.G; ++epoch) {
    ModelGradient g;
    try {
      g = grad_log_likelihood(state.model, workers, quad);
      if (!g.mu.allFinite() || !g.sigma.allFinite() || !g.rho.allFinite()) {
        throw std::runtime_error("gradient is not finite");
      }
    } catch (const std::exception& e) {
      state.fit_aborted = true;
      log::warn("likelihood fit stopped at epoch " + std::to_string(epoch) + ": " + e.what());
      break;
    }
    if (log::enabled_debug()) {
      std::ostringstream os;
      os << "epoch " << epoch << " loglik " << current << " grad mu " << g.mu.transpose() << " sigma "
         << g.sigma.transpose();
      log::debug(os.str());
    }
    // Full step at the configured rates, halved until the likelihood does not drop.
    double scale = 1.0;
    for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt, scale *= 0.5) {
      DomainModel next = state.model;
      next.mu += scale * cfg.r1 * g.mu;
      next.sigma += scale * cfg.r2 * g.sigma;
      next.rho += scale * cfg.r2 * g.rho;
      double ll = 0.0;
      try {
        next = project_valid(std::move(next));
        ll = log_likelihood(next, workers, quad);
      } catch (const std::exception&) {
        continue;
      }
      if (ll >= current) {
        state.model = std::move(next);
        current = ll;
        break;
      }
    }
    state.loglik_trace.push_back(current);
  }
  return state;
}

double predict_accuracy(const CpeState& state, std::span<const double> h_obs, const Quadrature& quad) {
  return truncated_conditional_mean(conditional_params(state.model, h_obs), quad);
}

CpeRoundResult cpe_round(CpeState state, std::span<const AnswerBatch> answers,
                         std::span<const std::vector<double>> histories, const SelectionConfig& cfg,
                         const Quadrature& quad) {
  if (answers.size() != histories.size()) throw std::invalid_argument("answers and histories misaligned");
  std::vector<AnswerCounts> counts;
  std::vector<WorkerEvidence> evidence;
  counts.reserve(answers.size());
  evidence.reserve(answers.size());
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const AnswerCounts c = count_answers(answers[i]);
    counts.push_back(c);
    evidence.push_back({histories[i], c.correct, c.wrong});
  }
  state.history.push_back(counts);
  state = fit_mle(std::move(state), evidence, cfg, quad);

  CpeRoundResult out;
  const TargetConditioner cond(state.model);
  out.p.reserve(histories.size());
  for (const auto& h : histories) {
    const ConditionalGaussian cg = cond(h);
    try {
      out.p.push_back(truncated_conditional_mean(cg, quad));
    } catch (const MassUnderflow&) {
      out.p.push_back(std::clamp(cg.mean, 0.0, 1.0));
      ++out.underflows;
    }
  }
  out.state = std::move(state);
  return out;
}

}  // namespace crowdsel

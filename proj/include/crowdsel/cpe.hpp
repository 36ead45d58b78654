#pragma once

#include <span>
#include <utility>
#include <vector>

#include "crowdsel/gaussian.hpp"
#include "crowdsel/rng.hpp"
#include "crowdsel/types.hpp"

namespace crowdsel {

struct AnswerCounts {
  int correct = 0;
  int wrong = 0;
  bool operator==(const AnswerCounts&) const = default;
};

/// Cross-domain performance estimator state: the current Gaussian plus the
/// per-round count tables it was fitted on.
struct CpeState {
  DomainModel model;
  std::vector<std::vector<AnswerCounts>> history;
  bool fit_aborted = false;
  std::vector<double> loglik_trace;  // log L before the last fit, then after each epoch
};

AnswerCounts count_answers(const AnswerBatch& batch);

/// Starting model: prior-domain moments from the histories, mu_T = a_T,
/// sigma_T = mean prior sigma, off-diagonal rho ~ U(0,1), then projected.
DomainModel initial_model(std::span<const WorkerProfile> workers, double a_T, Rng& rng);

inline constexpr int kMaxStepHalvings = 40;

/// G epochs of gradient ascent on the log-likelihood, projecting after each.
/// An epoch whose step would lower the likelihood retries with half the step,
/// up to kMaxStepHalvings times, and otherwise leaves the model unchanged.
/// A non-finite gradient stops the fit and sets fit_aborted.
CpeState fit_mle(CpeState state, std::span<const WorkerEvidence> workers, const SelectionConfig& cfg,
                 const Quadrature& quad);

double predict_accuracy(const CpeState& state, std::span<const double> h_obs, const Quadrature& quad);

struct CpeRoundResult {
  CpeState state;
  std::vector<double> p;  // aligned with the input batches
  int underflows = 0;     // predictions that fell back to clamp(mean, 0, 1)
};

/// One round: count, fit, predict. `histories[i]` is the prior-domain
/// profile of the worker that produced `answers[i]`. A worker whose
/// conditional mass on [0,1] underflows gets the limit of the truncated
/// mean, the conditional mean clamped to [0,1].
CpeRoundResult cpe_round(CpeState state, std::span<const AnswerBatch> answers,
                         std::span<const std::vector<double>> histories, const SelectionConfig& cfg,
                         const Quadrature& quad);

}  // namespace crowdsel

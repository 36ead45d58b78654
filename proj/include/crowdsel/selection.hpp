#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdsel/rng.hpp"
#include "crowdsel/types.hpp"

namespace crowdsel {

struct BudgetPlan {
  int n_rounds = 1;
  long long t = 0;  // per-round budget
  long long B = 0;
  long long batches_total = 1;  // 2^n - 1

  bool operator==(const BudgetPlan&) const = default;
};

/// n = ceil(log2(W0/k)) (at least 1), B = override or n*Q*W0, t = floor(B/n).
BudgetPlan plan_budget(int W0, int k, int Q, std::optional<long long> B_override = std::nullopt);

/// Order by score descending, ties by lower id; returns the first `count`
/// ids sorted ascending.
std::vector<WorkerId> top_by_score(std::span<const double> scores, std::span<const WorkerId> ids, int count);

/// Keeps the best ceil(|W_c|/2) workers.
std::vector<WorkerId> median_eliminate(std::span<const double> scores, std::span<const WorkerId> ids);

/// Source of learning-task answers. Every worker asked in the same round
/// sees the same ground-truth sequence.
class AnswerOracle {
 public:
  virtual ~AnswerOracle() = default;
  virtual AnswerBatch serve(WorkerId worker, int round, int count) = 0;
};

/// Thrown when the oracle fails mid-run; carries the completed rounds.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, std::vector<RoundRecord> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<RoundRecord>& partial_rounds() const { return partial_; }

 private:
  std::vector<RoundRecord> partial_;
};

/// Default prior difficulties ln(1/a_d - 1) from the pool's mean accuracy per domain.
std::vector<double> default_prior_difficulties(const Dataset& dataset);

RunResult run_method(Method method, const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle);

RunResult run_ours(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle);
RunResult run_me_cpe(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle);
RunResult run_me(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle);
RunResult run_us(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle);
RunResult run_li(const Dataset& dataset, const SelectionConfig& cfg, AnswerOracle& oracle);

struct BoundProbeResult {
  double epsilon = 0.0;
  double delta = 0.0;
  long long tasks_per_worker = 0;
  int trials = 0;
  int failures = 0;
  double failure_rate = 0.0;
};

/// ceil((2/eps^2) ln(3/delta)), the per-worker allotment of the elimination bound.
long long bound_tasks_per_worker(double epsilon, double delta);

/// Monte-Carlo check of one elimination round: W0 Bernoulli workers with
/// U(0,1) accuracies, best half kept by observed accuracy; a trial fails when
/// the kept set's best is more than epsilon below the pool's best.
BoundProbeResult theorem_probe(double epsilon, double delta, int trials, int W0, Rng& rng);

}  // namespace crowdsel

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdsel/rng.hpp"
#include "crowdsel/selection.hpp"
#include "crowdsel/types.hpp"

namespace crowdsel {

using Moments = std::vector<std::pair<double, double>>;  // (mean, stddev) per domain, target last

/// Per-domain moments of the reference pool and the first synthetic set.
const Moments& rw1_moments();
const Moments& s1_moments();

/// A synthetic worker whose target accuracy grows with training.
struct SimWorker {
  WorkerProfile profile;  // true_h_T and alpha_true populated
  double current_h_T = 0.5;
  int tasks_answered = 0;
};

struct GeneratorSpec {
  int workers = 40;
  int domains = 3;
  Moments moments = rw1_moments();
  std::uint64_t seed = 0;
  int Q = 20;
  double a_T = 0.5;  // sets the world's target difficulty ln(1/a_T - 1)
};

std::vector<SimWorker> generate_population(const GeneratorSpec& spec);
/// generate_population packaged as a dataset; the generator settings and
/// its correlation matrix go into meta.
Dataset generate_dataset(const GeneratorSpec& spec);

/// Solves irt_prob(alpha, beta_T, K1) == accuracy for alpha, clamped to
/// [0, kAlphaMax]. Accuracies of exactly 0 or 1 are first pulled to
/// [1/(2m), 1 - 1/(2m)] with m the batch size.
double fit_initial_alpha(double first_batch_accuracy, double beta_T, double K1, int batch_size);

/// Answering rule: a task is answered correctly iff U(0,1) < current_h_T.
/// Returns correctness bits.
Bits answer(const SimWorker& worker, int count, Rng& rng);

/// Accuracy after training through round j: irt_prob(alpha_true, beta_T, K_j).
SimWorker apply_learning(SimWorker worker, int j, long long t, int W0, double beta_T);

/// Target accuracy after `tasks` learning tasks answered in batches of
/// `batch_size`, with an update after each completed batch.
double trained_accuracy(const WorkerProfile& worker, double tasks, int batch_size, double beta_T);

double evaluate_selection(std::span<const SimWorker> selected, int working_tasks_per_worker, Rng& rng,
                          EvalMode mode);

/// Target difficulty of the simulated world, from meta "world_a_T" (0.5 when absent).
double world_beta_target(const Dataset& dataset);

Dataset load_dataset(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Answers from simulated workers. Noise comes from streams keyed by
/// (seed, method, worker, round), so methods never share draws.
class SimulatedOracle final : public AnswerOracle {
 public:
  SimulatedOracle(const Dataset& dataset, std::uint64_t seed, Method method, int batch_size, double beta_T);

  AnswerBatch serve(WorkerId worker, int round, int count) override;

  const std::vector<SimWorker>& workers() const { return workers_; }

 private:
  std::vector<SimWorker> workers_;
  std::uint64_t seed_;
  std::uint32_t method_tag_;
  int batch_size_;
  double beta_T_;
};

/// Runs one method against the simulated pool, then fills in the evaluation
/// and the ground-truth fields of the result.
RunResult run_experiment(const Dataset& dataset, const SelectionConfig& cfg, Method method);

}  // namespace crowdsel

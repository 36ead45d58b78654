#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace crowdsel {

using WorkerId = int;
using Bits = std::vector<std::uint8_t>;

/// One worker's cross-domain history. `true_h_T` and `alpha_true` are
/// simulator ground truth and stay empty for observed (real) workers.
struct WorkerProfile {
  WorkerId id = 0;
  std::vector<double> h;  // accuracy per prior domain, in [0,1]
  std::vector<int> n;     // task count per prior domain, >= 1
  std::optional<double> true_h_T;
  std::optional<double> alpha_true;

  bool operator==(const WorkerProfile&) const = default;
};

struct Dataset {
  int domains = 0;
  std::vector<WorkerProfile> workers;
  nlohmann::json meta = nlohmann::json::object();

  bool operator==(const Dataset&) const = default;
};

/// The (D+1)-dimensional Gaussian over per-domain accuracies. Index D
/// (the last entry) is the target domain.
struct DomainModel {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd rho;

  int domains() const { return static_cast<int>(mu.size()) - 1; }
  int dim() const { return static_cast<int>(mu.size()); }
};

bool operator==(const DomainModel& a, const DomainModel& b);

enum class Method { ours, me, us, li, me_cpe };
enum class EvalMode { sampled, closed };

std::string_view to_string(Method m);
std::string_view to_string(EvalMode m);
std::optional<Method> parse_method(std::string_view s);
std::optional<EvalMode> parse_eval_mode(std::string_view s);
const std::vector<Method>& all_methods();

struct SelectionConfig {
  int k = 5;
  int Q = 20;
  std::optional<long long> B;  // total budget; derived as n*Q*|W| when empty
  double delta0 = 0.1;
  double r1 = 1e-7;
  double r2 = 1e-4;
  int G = 50;
  double a_T = 0.5;
  std::vector<double> beta_prior;  // empty: ln(1/a_d - 1) from dataset means
  int quad_nodes = 512;
  std::uint64_t seed = 0;
  std::optional<int> eval_tasks;  // working tasks per selected worker; Q when empty
  EvalMode eval_mode = EvalMode::sampled;
  bool li_refit_each_round = true;

  double beta_target() const;
  int working_tasks() const { return eval_tasks.value_or(Q); }
};

/// Learning tasks served to one worker together with their hidden labels.
struct AnswerBatch {
  WorkerId worker_id = 0;
  Bits ground_truth;
  Bits given;
};

struct RoundRecord {
  int round_index = 1;
  std::vector<WorkerId> surviving_ids;
  int tasks_per_worker = 0;
  Bits ground_truth;              // G_c, shared by every worker this round
  std::vector<Bits> answers;      // A_c, aligned with surviving_ids
  std::vector<int> correct_counts;
  std::vector<int> wrong_counts;
  std::vector<double> p_c;        // CPE prediction, or the baseline's ranking score
  std::vector<double> p_hat_c;    // learning-adjusted prediction (LGE methods only)
  double delta_c = 0.1;
  double K_c = 0.0;
  std::vector<WorkerId> eliminated_ids;
  bool regression_fallback = false;
  std::optional<DomainModel> model;  // CPE model after this round's fit

  bool operator==(const RoundRecord&) const = default;
};

struct RunResult {
  Method method = Method::ours;
  std::uint64_t seed = 0;
  int k = 0;
  int Q = 0;
  long long B = 0;
  int n_rounds = 0;
  long long t = 0;
  std::vector<WorkerId> selected_ids;
  std::vector<RoundRecord> rounds;
  std::optional<DomainModel> final_model;
  std::vector<double> fitted_alpha;  // indexed by worker id; LGE methods only
  std::optional<double> evaluation;
  EvalMode eval_mode = EvalMode::sampled;
  long long budget_spent = 0;
  std::vector<std::string> warnings;
  // Simulator ground truth, empty when the dataset carries none.
  std::vector<WorkerId> ground_truth_ids;
  std::optional<double> ground_truth_accuracy;
  std::vector<WorkerId> trained_ground_truth_ids;

  bool operator==(const RunResult&) const = default;
};

struct Violation {
  int worker_index = -1;  // -1 for dataset-level problems
  std::string message;
};

std::vector<Violation> validate_dataset(const std::vector<WorkerProfile>& workers, int domains);
std::vector<Violation> validate_dataset(const Dataset& dataset);

}  // namespace crowdsel

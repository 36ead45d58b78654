#pragma once

#include <span>
#include <vector>

namespace crowdsel {

/// Difficulty parameters of the learning-gain model. Per-worker slopes are
/// fitted separately and returned by lge_round.
struct IrtParams {
  std::vector<double> beta_prior;  // one per prior domain
  double beta_target = 0.0;
};

inline constexpr double kAlphaMax = 20.0;
inline constexpr double kAlphaInit = 1.0;

double logistic(double x);

/// P(correct) = logistic(alpha * ln(K + 1) - beta).
double irt_prob(double alpha, double beta, double K);

/// Difficulty ln(1/a - 1) that makes irt_prob(., beta, 0) == a.
double init_difficulty(double a);

/// K_j = (2^j - 1) * t / W0, the cumulative learning tasks per worker after j rounds.
double cumulative_tasks(int j, long long t, int W0);
/// Same schedule from the first-round allotment t / W0.
double cumulative_tasks(int j, double first_round_tasks);

/// Least-squares objective for one worker's learning slope. p_history[j-1]
/// is the round-j estimate, paired with the model at K_{j-1}.
double alpha_objective(double alpha, std::span<const double> h, std::span<const int> n,
                       std::span<const double> p_history, const IrtParams& params, double first_round_tasks);

/// Minimizes alpha_objective over [0, kAlphaMax].
double fit_alpha(std::span<const double> h, std::span<const int> n, std::span<const double> p_history,
                 const IrtParams& params, double first_round_tasks);

struct LgeWorker {
  std::span<const double> h;
  std::span<const int> n;
  std::span<const double> p_history;  // p_1 .. p_c for this worker
};

struct LgeRoundResult {
  std::vector<double> alpha;
  std::vector<double> p_hat;
};

/// Fits every worker's slope and predicts accuracy after round c's training.
LgeRoundResult lge_round(std::span<const LgeWorker> workers, const IrtParams& params, int c,
                         double first_round_tasks);

}  // namespace crowdsel

#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "crowdsel/rng.hpp"
#include "crowdsel/types.hpp"

namespace crowdsel {

/// Fixed-node rule on [0,1].
class Quadrature {
 public:
  /// n-point Gauss-Legendre rule mapped from [-1,1] to [0,1].
  static Quadrature gauss_legendre(int n);

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }

  // Cached logs used by the likelihood; nodes are strictly interior.
  std::span<const double> log_weights() const { return log_weights_; }
  std::span<const double> log_nodes() const { return log_nodes_; }
  std::span<const double> log1m_nodes() const { return log1m_nodes_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<double> log_nodes_;
  std::vector<double> log1m_nodes_;
};

double integrate01(const std::function<double(double)>& f, const Quadrature& quad);

/// One-dimensional conditional of the target coordinate.
struct ConditionalGaussian {
  double mean = 0.0;      // mu_bar
  double variance = 1.0;  // Sigma_bar
};

class MassUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationMassTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSigmaMin = 1e-4;
inline constexpr double kSigmaMax = 10.0;
inline constexpr double kRhoMax = 0.999;
inline constexpr double kMinEigenvalue = 1e-8;
inline constexpr int kMaxLiftPasses = 64;

Eigen::MatrixXd assemble_covariance(const DomainModel& model);

/// Clamps sigma and rho into range, symmetrizes rho and lifts the spectrum
/// of the covariance to at least kMinEigenvalue. Idempotent.
DomainModel project_valid(DomainModel model);

/// Regression of the target coordinate on the prior domains. Everything
/// except the conditional mean is shared by all workers, so it is factored
/// once per model.
class TargetConditioner {
 public:
  explicit TargetConditioner(const DomainModel& model);

  ConditionalGaussian operator()(std::span<const double> h_obs) const;

  int domains() const { return domains_; }
  /// Sigma_DD^{-1} Sigma_DT.
  const Eigen::VectorXd& regression() const { return b_; }
  double variance() const { return variance_; }
  /// Sigma_DD^{-1} (h - mu_D).
  Eigen::VectorXd whitened_deviation(std::span<const double> h_obs) const;

 private:
  int domains_ = 0;
  Eigen::VectorXd mu_;
  Eigen::LLT<Eigen::MatrixXd> prior_llt_;
  Eigen::VectorXd b_;
  double variance_ = 0.0;
};

ConditionalGaussian conditional_params(const DomainModel& model, std::span<const double> h_obs);

/// Mean of the conditional Gaussian truncated to [0,1].
double truncated_conditional_mean(const ConditionalGaussian& cg, const Quadrature& quad);

struct WorkerEvidence {
  std::vector<double> h;
  int correct = 0;
  int wrong = 0;
};

double log_likelihood(const DomainModel& model, std::span<const WorkerEvidence> workers,
                      const Quadrature& quad);

/// Gradient of log_likelihood in the (mu, sigma, rho) parameterization. The
/// rho gradient is symmetric with a zero diagonal; entry (i,j) is the
/// derivative with respect to the shared correlation rho_ij = rho_ji.
struct ModelGradient {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd rho;
};

ModelGradient grad_log_likelihood(const DomainModel& model, std::span<const WorkerEvidence> workers,
                                  const Quadrature& quad);

/// Rejection sample from N(mu, Sigma) restricted to (0,1)^{D+1}.
std::vector<double> sample_truncated_mvn(const DomainModel& model, Rng& rng);

}  // namespace crowdsel

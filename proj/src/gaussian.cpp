#include "crowdsel/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crowdsel {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

void check_model_shape(const DomainModel& m) {
  const auto dim = m.mu.size();
  if (dim < 1 || m.sigma.size() != dim || m.rho.rows() != dim || m.rho.cols() != dim) {
    throw std::invalid_argument("domain model has inconsistent dimensions");
  }
}

// log of sum_k exp(terms[k]) plus the normalized softmax weights.
double log_sum_exp(std::vector<double>& terms) {
  const double m = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double& t : terms) {
    t = std::exp(t - m);
    s += t;
  }
  for (double& t : terms) t /= s;
  return m + std::log(s);
}

struct WorkerTerm {
  double log_lik = 0.0;
  double d_mean = 0.0;      // d log_lik / d mu_bar
  double d_variance = 0.0;  // d log_lik / d Sigma_bar
};

WorkerTerm worker_term(const ConditionalGaussian& cg, int correct, int wrong, const Quadrature& quad,
                       bool with_gradient) {
  const auto x = quad.nodes();
  const auto lw = quad.log_weights();
  const auto lx = quad.log_nodes();
  const auto l1mx = quad.log1m_nodes();
  std::vector<double> terms(x.size());
  const double inv2v = 0.5 / cg.variance;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dev = x[k] - cg.mean;
    terms[k] = lw[k] + correct * lx[k] + wrong * l1mx[k] - dev * dev * inv2v;
  }
  WorkerTerm out;
  out.log_lik = log_sum_exp(terms) - 0.5 * (kLog2Pi + std::log(cg.variance));
  if (with_gradient) {
    // terms now holds the posterior weights over the nodes.
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double dev = x[k] - cg.mean;
      m1 += terms[k] * dev;
      m2 += terms[k] * dev * dev;
    }
    out.d_mean = m1 / cg.variance;
    out.d_variance = m2 / (2.0 * cg.variance * cg.variance) - 0.5 / cg.variance;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd assemble_covariance(const DomainModel& model) {
  check_model_shape(model);
  const auto dim = model.mu.size();
  Eigen::MatrixXd cov(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      cov(i, j) = model.rho(i, j) * (model.sigma(i) * model.sigma(j));
    }
  }
  return cov;
}

DomainModel project_valid(DomainModel model) {
  check_model_shape(model);
  const auto dim = model.mu.size();
  for (Eigen::Index i = 0; i < dim; ++i) model.sigma(i) = std::clamp(model.sigma(i), kSigmaMin, kSigmaMax);

  Eigen::MatrixXd rho = 0.5 * (model.rho + model.rho.transpose());
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      rho(i, j) = i == j ? 1.0 : std::clamp(rho(i, j), -kRhoMax, kRhoMax);
    }
  }
  model.rho = rho;

  // A lift can push sigma over the cap, and capping it can shrink the
  // spectrum again, so lift and cap until the check holds. The slack absorbs
  // eigensolver round-off so the result is a fixed point.
  for (int pass = 0; pass < kMaxLiftPasses; ++pass) {
    Eigen::MatrixXd cov = assemble_covariance(model);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues()(0);
    if (lambda_min >= kMinEigenvalue - 1e-12) break;
    cov.diagonal().array() += kMinEigenvalue - lambda_min;
    Eigen::VectorXd sd(dim);
    for (Eigen::Index i = 0; i < dim; ++i) sd(i) = std::sqrt(cov(i, i));
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        model.rho(i, j) = i == j ? 1.0 : cov(i, j) / (sd(i) * sd(j));
      }
    }
    for (Eigen::Index i = 0; i < dim; ++i) model.sigma(i) = std::min(sd(i), kSigmaMax);
  }
  return model;
}

TargetConditioner::TargetConditioner(const DomainModel& model) {
  check_model_shape(model);
  domains_ = model.domains();
  mu_ = model.mu;
  const Eigen::MatrixXd cov = assemble_covariance(model);
  const Eigen::Index d = domains_;
  const double target_var = cov(d, d);
  if (d == 0) {
    b_.resize(0);
    variance_ = target_var;
  } else {
    prior_llt_.compute(cov.topLeftCorner(d, d));
    if (prior_llt_.info() != Eigen::Success) {
      throw std::runtime_error("prior-domain covariance is singular");
    }
    const Eigen::VectorXd c = cov.topRightCorner(d, 1);
    b_ = prior_llt_.solve(c);
    // The Schur complement is the squared last pivot of the full Cholesky
    // factor; this avoids the cancellation in target_var - c'b.
    const Eigen::LLT<Eigen::MatrixXd> full(cov);
    if (full.info() == Eigen::Success) {
      const double pivot = full.matrixLLT()(d, d);
      variance_ = pivot * pivot;
    } else {
      variance_ = target_var - c.dot(b_);
    }
  }
  if (!(variance_ > 0.0) || !std::isfinite(variance_)) {
    throw std::runtime_error("conditional variance is not positive");
  }
}

Eigen::VectorXd TargetConditioner::whitened_deviation(std::span<const double> h_obs) const {
  if (static_cast<int>(h_obs.size()) != domains_) {
    throw std::invalid_argument("observation length does not match the model's prior domains");
  }
  if (domains_ == 0) return Eigen::VectorXd();
  Eigen::VectorXd y(domains_);
  for (int i = 0; i < domains_; ++i) y(i) = h_obs[static_cast<std::size_t>(i)] - mu_(i);
  return prior_llt_.solve(y);
}

ConditionalGaussian TargetConditioner::operator()(std::span<const double> h_obs) const {
  if (static_cast<int>(h_obs.size()) != domains_) {
    throw std::invalid_argument("observation length does not match the model's prior domains");
  }
  double mean = mu_(domains_);
  for (int i = 0; i < domains_; ++i) mean += b_(i) * (h_obs[static_cast<std::size_t>(i)] - mu_(i));
  return {mean, variance_};
}

ConditionalGaussian conditional_params(const DomainModel& model, std::span<const double> h_obs) {
  return TargetConditioner(model)(h_obs);
}

double truncated_conditional_mean(const ConditionalGaussian& cg, const Quadrature& quad) {
  if (!(cg.variance > 0.0)) throw std::invalid_argument("conditional variance must be positive");
  const auto x = quad.nodes();
  const auto lw = quad.log_weights();
  std::vector<double> terms(x.size());
  const double inv2v = 0.5 / cg.variance;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dev = x[k] - cg.mean;
    terms[k] = lw[k] - dev * dev * inv2v;
  }
  const double log_mass = log_sum_exp(terms) - 0.5 * (kLog2Pi + std::log(cg.variance));
  if (!(log_mass >= std::log(1e-300))) throw MassUnderflow("mass underflow");
  double mean = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) mean += terms[k] * x[k];
  return std::clamp(mean, 0.0, 1.0);
}

double log_likelihood(const DomainModel& model, std::span<const WorkerEvidence> workers,
                      const Quadrature& quad) {
  const TargetConditioner cond(model);
  double total = 0.0;
  for (const auto& w : workers) {
    if (w.correct < 0 || w.wrong < 0) throw std::invalid_argument("negative answer counts");
    total += worker_term(cond(w.h), w.correct, w.wrong, quad, false).log_lik;
  }
  if (!std::isfinite(total)) throw std::runtime_error("log-likelihood is not finite");
  return total;
}

ModelGradient grad_log_likelihood(const DomainModel& model, std::span<const WorkerEvidence> workers,
                                  const Quadrature& quad) {
  const TargetConditioner cond(model);
  const int d = cond.domains();
  const Eigen::Index dim = d + 1;
  const Eigen::VectorXd& b = cond.regression();

  ModelGradient g;
  g.mu = Eigen::VectorXd::Zero(dim);
  // dL = sum_ij cov_grad(i,j) dSigma_ij over the entries the conditional
  // formulas read: the prior block, the prior-target column and the target
  // variance.
  Eigen::MatrixXd cov_grad = Eigen::MatrixXd::Zero(dim, dim);

  for (const auto& w : workers) {
    if (w.correct < 0 || w.wrong < 0) throw std::invalid_argument("negative answer counts");
    const ConditionalGaussian cg = cond(w.h);
    const WorkerTerm term = worker_term(cg, w.correct, w.wrong, quad, true);
    if (!std::isfinite(term.log_lik)) throw std::runtime_error("log-likelihood is not finite");

    g.mu(d) += term.d_mean;
    cov_grad(d, d) += term.d_variance;
    if (d == 0) continue;

    const Eigen::VectorXd z = cond.whitened_deviation(w.h);
    g.mu.head(d) -= term.d_mean * b;
    // d mu_bar    = dc'z - b' dS z
    // d Sigma_bar = ds - 2 dc'b + b' dS b
    cov_grad.topLeftCorner(d, d) += -term.d_mean * (b * z.transpose()) + term.d_variance * (b * b.transpose());
    cov_grad.topRightCorner(d, 1) += term.d_mean * z - 2.0 * term.d_variance * b;
  }

  // Chain rule through Sigma_ij = rho_ij sigma_i sigma_j with rho symmetric.
  const Eigen::MatrixXd sym = 0.5 * (cov_grad + cov_grad.transpose());
  g.sigma = Eigen::VectorXd::Zero(dim);
  g.rho = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      g.sigma(i) += 2.0 * sym(i, j) * model.rho(i, j) * model.sigma(j);
      if (i != j) g.rho(i, j) = 2.0 * sym(i, j) * model.sigma(i) * model.sigma(j);
    }
  }
  return g;
}

std::vector<double> sample_truncated_mvn(const DomainModel& model, Rng& rng) {
  const Eigen::MatrixXd cov = assemble_covariance(model);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("covariance is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::Index dim = model.mu.size();
  Eigen::VectorXd z(dim);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = standard_normal(rng);
    const Eigen::VectorXd v = model.mu + lower * z;
    if ((v.array() > 0.0).all() && (v.array() < 1.0).all()) {
      return std::vector<double>(v.data(), v.data() + dim);
    }
  }
  throw TruncationMassTooSmall("truncation mass too small");
}

}  // namespace crowdsel

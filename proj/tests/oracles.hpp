#pragma once

// Brute-force reference computations used only by the tests. None of these
// share code with the library's numeric kernels.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "crowdsel/types.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

// Midpoint rule on [a, b] with n cells.
inline double riemann(const std::function<double(double)>& f, double a, double b, long n) {
  const double h = (b - a) / static_cast<double>(n);
  long double acc = 0.0L;
  for (long i = 0; i < n; ++i) acc += f(a + (static_cast<double>(i) + 0.5) * h);
  return static_cast<double>(acc * h);
}

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
}

// E[X | 0 <= X <= 1] for X ~ N(mean, var), by a 10^6-cell Riemann sum.
inline double truncated_mean(double mean, double var, long cells = 1'000'000) {
  const double num = riemann([&](double x) { return x * normal_pdf(x, mean, var); }, 0.0, 1.0, cells);
  const double den = riemann([&](double x) { return normal_pdf(x, mean, var); }, 0.0, 1.0, cells);
  return num / den;
}

// Full covariance built entry by entry.
inline Eigen::MatrixXd covariance(const crowdsel::DomainModel& m) {
  const auto dim = m.mu.size();
  Eigen::MatrixXd s(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) s(i, j) = m.rho(i, j) * m.sigma(i) * m.sigma(j);
  }
  return s;
}

// Conditional mean and variance of the last coordinate given the others,
// obtained by integrating the joint density (inverted with full-pivot LU)
// along the target axis. No Schur complement is involved.
struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

inline Moments conditional_by_integration(const crowdsel::DomainModel& m, const std::vector<double>& h) {
  const auto dim = m.mu.size();
  const Eigen::MatrixXd prec = covariance(m).fullPivLu().inverse();
  Eigen::VectorXd x(dim);
  for (Eigen::Index i = 0; i + 1 < dim; ++i) x(i) = h[static_cast<std::size_t>(i)];
  auto log_joint = [&](double t) {
    x(dim - 1) = t;
    const Eigen::VectorXd d = x - m.mu;
    return -0.5 * d.dot(prec * d);
  };
  // Coarse scan to locate the bulk, then a fine integral around it.
  const double lo = m.mu(dim - 1) - 30.0;
  const double hi = m.mu(dim - 1) + 30.0;
  const long coarse = 600'000;
  double best_t = lo;
  double best = -INFINITY;
  for (long i = 0; i <= coarse; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / coarse;
    const double v = log_joint(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  // Local width from the second difference of the log density.
  const double e = 1e-3;
  const double curv = (log_joint(best_t + e) - 2.0 * log_joint(best_t) + log_joint(best_t - e)) / (e * e);
  const double sd = 1.0 / std::sqrt(-curv);
  const double a = best_t - 20.0 * sd;
  const double b = best_t + 20.0 * sd;
  const long n = 200'000;
  auto w = [&](double t) { return std::exp(log_joint(t) - best); };
  const double z = riemann(w, a, b, n);
  const double m1 = riemann([&](double t) { return t * w(t); }, a, b, n) / z;
  const double m2 = riemann([&](double t) { return (t - m1) * (t - m1) * w(t); }, a, b, n) / z;
  return {m1, m2};
}

// Central difference of f at x along one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

// Minimum of f over an evenly spaced grid on [lo, hi] (inclusive), n points.
struct GridMin {
  double arg = 0.0;
  double value = INFINITY;
};

inline GridMin grid_min(const std::function<double(double)>& f, double lo, double hi, int n) {
  GridMin best;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    const double v = f(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

// A random valid model: correlations from normalized Gram rows, so the
// matrix is positive definite without any projection.
inline crowdsel::DomainModel random_model(int domains, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mu_d(0.3, 0.8);
  std::uniform_real_distribution<double> sd_d(0.08, 0.3);
  std::normal_distribution<double> z(0.0, 1.0);
  const int dim = domains + 1;
  Eigen::MatrixXd a(dim, dim + 2);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim + 2; ++j) a(i, j) = z(rng);
    a.row(i).normalize();
  }
  crowdsel::DomainModel m;
  m.mu.resize(dim);
  m.sigma.resize(dim);
  for (int i = 0; i < dim; ++i) {
    m.mu(i) = mu_d(rng);
    m.sigma(i) = sd_d(rng);
  }
  m.rho = a * a.transpose();
  m.rho.diagonal().setOnes();
  return m;
}

}  // namespace oracle

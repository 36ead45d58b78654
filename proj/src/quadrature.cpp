#include <cmath>
#include <numbers>
#include <stdexcept>

#include "crowdsel/gaussian.hpp"

namespace crowdsel {

Quadrature Quadrature::gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  Quadrature q;
  q.nodes_.assign(static_cast<std::size_t>(n), 0.0);
  q.weights_.assign(static_cast<std::size_t>(n), 0.0);

  // Newton on P_n from the Tricomi initial guesses; roots come in +/- pairs.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the i-th largest root; map to [0,1] in ascending order.
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    q.nodes_[hi] = 0.5 * (1.0 + x);
    q.nodes_[lo] = 0.5 * (1.0 - x);
    q.weights_[hi] = 0.5 * w;
    q.weights_[lo] = 0.5 * w;
  }
  if (n % 2 == 1) q.nodes_[static_cast<std::size_t>(n / 2)] = 0.5;

  for (std::size_t k = 0; k < q.nodes_.size(); ++k) {
    q.log_weights_.push_back(std::log(q.weights_[k]));
    q.log_nodes_.push_back(std::log(q.nodes_[k]));
    q.log1m_nodes_.push_back(std::log1p(-q.nodes_[k]));
  }
  return q;
}

double integrate01(const std::function<double(double)>& f, const Quadrature& quad) {
  double acc = 0.0;
  const auto x = quad.nodes();
  const auto w = quad.weights();
  for (std::size_t k = 0; k < x.size(); ++k) acc += w[k] * f(x[k]);
  return acc;
}

}  // namespace crowdsel

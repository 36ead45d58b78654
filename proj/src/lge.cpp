#include "crowdsel/lge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace crowdsel {

namespace {

constexpr int kStarts = 64;

// Golden-section search for a minimum of f on [lo, hi].
template <typename F>
double golden_section(F&& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int iter = 0; iter < 200 && (b - a) > 1e-13; ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double irt_prob(double alpha, double beta, double K) {
  if (K < 0.0) throw std::invalid_argument("cumulative task count must be non-negative");
  return logistic(alpha * std::log1p(K) - beta);
}

double init_difficulty(double a) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("accuracy must lie in (0,1)");
  return std::log(1.0 / a - 1.0);
}

double cumulative_tasks(int j, double first_round_tasks) {
  if (j < 0) throw std::invalid_argument("round index must be non-negative");
  return (std::ldexp(1.0, j) - 1.0) * first_round_tasks;
}

double cumulative_tasks(int j, long long t, int W0) {
  if (W0 < 1) throw std::invalid_argument("worker pool must be non-empty");
  return cumulative_tasks(j, static_cast<double>(t) / W0);
}

double alpha_objective(double alpha, std::span<const double> h, std::span<const int> n,
                       std::span<const double> p_history, const IrtParams& params, double first_round_tasks) {
  double total = 0.0;
  for (std::size_t d = 0; d < h.size(); ++d) {
    const double r = irt_prob(alpha, params.beta_prior[d], n[d]) - h[d];
    total += r * r;
  }
  for (std::size_t j = 1; j <= p_history.size(); ++j) {
    const double K = cumulative_tasks(static_cast<int>(j) - 1, first_round_tasks);
    const double r = irt_prob(alpha, params.beta_target, K) - p_history[j - 1];
    total += r * r;
  }
  return total;
}

double fit_alpha(std::span<const double> h, std::span<const int> n, std::span<const double> p_history,
                 const IrtParams& params, double first_round_tasks) {
  if (h.size() != n.size() || h.size() > params.beta_prior.size()) {
    throw std::invalid_argument("history, counts and difficulties are misaligned");
  }
  auto f = [&](double a) { return alpha_objective(a, h, n, p_history, params, first_round_tasks); };

  const double step = kAlphaMax / (kStarts - 1);
  std::vector<double> values(kStarts);
  for (int s = 0; s < kStarts; ++s) values[static_cast<std::size_t>(s)] = f(s * step);

  double best_alpha = 0.0;
  double best_value = values[0];
  for (int s = 0; s < kStarts; ++s) {
    const auto i = static_cast<std::size_t>(s);
    if (values[i] < best_value) {
      best_value = values[i];
      best_alpha = s * step;
    }
  }
  // Refine every local minimum of the coarse grid; the objective is a sum of
  // unimodal terms and may have more than one basin.
  for (int s = 0; s < kStarts; ++s) {
    const auto i = static_cast<std::size_t>(s);
    const bool left_ok = s == 0 || values[i] <= values[i - 1];
    const bool right_ok = s == kStarts - 1 || values[i] <= values[i + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = std::max(0.0, (s - 1) * step);
    const double hi = std::min(kAlphaMax, (s + 1) * step);
    const double a = golden_section(f, lo, hi);
    const double v = f(a);
    if (v < best_value) {
      best_value = v;
      best_alpha = a;
    }
  }
  return best_alpha;
}

LgeRoundResult lge_round(std::span<const LgeWorker> workers, const IrtParams& params, int c,
                         double first_round_tasks) {
  if (c < 1) throw std::invalid_argument("round index must be positive");
  LgeRoundResult out;
  out.alpha.reserve(workers.size());
  out.p_hat.reserve(workers.size());
  const double K_c = cumulative_tasks(c, first_round_tasks);
  for (const auto& w : workers) {
    const double alpha = fit_alpha(w.h, w.n, w.p_history, params, first_round_tasks);
    out.alpha.push_back(alpha);
    out.p_hat.push_back(irt_prob(alpha, params.beta_target, K_c));
  }
  return out;
}

}  // namespace crowdsel

#include "crowdsel/types.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace crowdsel {

bool operator==(const DomainModel& a, const DomainModel& b) {
  if (a.mu.size() != b.mu.size() || a.sigma.size() != b.sigma.size() ||
      a.rho.rows() != b.rho.rows() || a.rho.cols() != b.rho.cols()) {
    return false;
  }
  return a.mu == b.mu && a.sigma == b.sigma && a.rho == b.rho;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ours: return "ours";
    case Method::me: return "me";
    case Method::us: return "us";
    case Method::li: return "li";
    case Method::me_cpe: return "me-cpe";
  }
  return "ours";
}

std::string_view to_string(EvalMode m) {
  return m == EvalMode::closed ? "closed" : "sampled";
}

std::optional<Method> parse_method(std::string_view s) {
  for (Method m : all_methods()) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::optional<EvalMode> parse_eval_mode(std::string_view s) {
  if (s == "sampled") return EvalMode::sampled;
  if (s == "closed") return EvalMode::closed;
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::li, Method::me, Method::me_cpe,
                                              Method::ours, Method::us};
  return methods;
}

double SelectionConfig::beta_target() const {
  if (!(a_T > 0.0 && a_T < 1.0)) throw std::invalid_argument("a_T must lie in (0,1)");
  return std::log(1.0 / a_T - 1.0);
}

std::vector<Violation> validate_dataset(const std::vector<WorkerProfile>& workers, int domains) {
  std::vector<Violation> out;
  if (domains < 0) out.push_back({-1, "negative domain count"});
  std::set<WorkerId> seen;
  for (std::size_t i = 0; i < workers.size(); ++i) {
    const auto& w = workers[i];
    const int idx = static_cast<int>(i);
    if (w.id < 0) out.push_back({idx, "negative worker id"});
    if (!seen.insert(w.id).second) out.push_back({idx, "duplicate worker id " + std::to_string(w.id)});
    if (static_cast<int>(w.h.size()) != domains || static_cast<int>(w.n.size()) != domains) {
      out.push_back({idx, "dimension mismatch: expected " + std::to_string(domains) +
                              " domains, got h=" + std::to_string(w.h.size()) +
                              " n=" + std::to_string(w.n.size())});
    }
    for (double v : w.h) {
      if (!(v >= 0.0 && v <= 1.0)) {
        out.push_back({idx, "accuracy out of range"});
        break;
      }
    }
    for (int v : w.n) {
      if (v < 1) {
        out.push_back({idx, "task count below 1"});
        break;
      }
    }
    if (w.true_h_T && !(*w.true_h_T > 0.0 && *w.true_h_T < 1.0)) {
      out.push_back({idx, "true_h_T outside (0,1)"});
    }
    if (w.alpha_true && !(*w.alpha_true >= 0.0 && std::isfinite(*w.alpha_true))) {
      out.push_back({idx, "alpha_true must be finite and non-negative"});
    }
  }
  return out;
}

std::vector<Violation> validate_dataset(const Dataset& dataset) {
  return validate_dataset(dataset.workers, dataset.domains);
}

}  // namespace crowdsel

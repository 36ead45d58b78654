#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crowdsel/gaussian.hpp"
#include "crowdsel/lge.hpp"
#include "crowdsel/rng.hpp"
#include "crowdsel/selection.hpp"
#include "crowdsel/serialize.hpp"
#include "crowdsel/simulator.hpp"

namespace py = pybind11;
using namespace crowdsel;

namespace {

DomainModel make_model(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma, const Eigen::MatrixXd& rho) {
  DomainModel m;
  m.mu = mu;
  m.sigma = sigma;
  m.rho = rho;
  return m;
}

std::string run_json(const std::string& dataset_json, const std::string& method, int k, int Q, std::uint64_t seed,
                     const std::string& eval_mode, std::optional<long long> budget, double a_T, int epochs,
                     int quad_nodes, std::optional<int> eval_tasks) {
  const auto m = parse_method(method);
  if (!m) throw py::value_error("unknown method: " + method);
  const auto mode = parse_eval_mode(eval_mode);
  if (!mode) throw py::value_error("unknown eval mode: " + eval_mode);
  SelectionConfig cfg;
  cfg.k = k;
  cfg.Q = Q;
  cfg.seed = seed;
  cfg.eval_mode = *mode;
  cfg.B = budget;
  cfg.a_T = a_T;
  cfg.G = epochs;
  cfg.quad_nodes = quad_nodes;
  cfg.eval_tasks = eval_tasks;
  const Dataset ds = parse_dataset(dataset_json);
  py::gil_scoped_release release;
  return canonical_serialize(run_experiment(ds, cfg, *m));
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Cross-domain worker selection core";

  py::register_exception<ParseError>(mod, "ParseError", PyExc_ValueError);
  py::register_exception<MassUnderflow>(mod, "MassUnderflow", PyExc_ArithmeticError);

  mod.def(
      "plan_budget",
      [](int W0, int k, int Q, std::optional<long long> B) {
        const BudgetPlan p = plan_budget(W0, k, Q, B);
        py::dict d;
        d["n_rounds"] = p.n_rounds;
        d["t"] = p.t;
        d["B"] = p.B;
        d["batches_total"] = p.batches_total;
        return d;
      },
      py::arg("W0"), py::arg("k"), py::arg("Q"), py::arg("B") = py::none());

  mod.def("irt_prob", &irt_prob, py::arg("alpha"), py::arg("beta"), py::arg("K"));
  mod.def("init_difficulty", &init_difficulty, py::arg("a"));
  mod.def(
      "fit_alpha",
      [](const std::vector<double>& h, const std::vector<int>& n, const std::vector<double>& p_history,
         const std::vector<double>& beta_prior, double beta_target, double first_round_tasks) {
        return fit_alpha(h, n, p_history, IrtParams{beta_prior, beta_target}, first_round_tasks);
      },
      py::arg("h"), py::arg("n"), py::arg("p_history"), py::arg("beta_prior"), py::arg("beta_target"),
      py::arg("first_round_tasks"));

  mod.def(
      "conditional_params",
      [](const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma, const Eigen::MatrixXd& rho,
         const std::vector<double>& h) {
        const ConditionalGaussian cg = conditional_params(make_model(mu, sigma, rho), h);
        return py::make_tuple(cg.mean, cg.variance);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("rho"), py::arg("h"));
  mod.def(
      "truncated_conditional_mean",
      [](double mean, double variance, int quad_nodes) {
        return truncated_conditional_mean({mean, variance}, Quadrature::gauss_legendre(quad_nodes));
      },
      py::arg("mean"), py::arg("variance"), py::arg("quad_nodes") = 512);
  mod.def(
      "log_likelihood",
      [](const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma, const Eigen::MatrixXd& rho,
         const std::vector<std::tuple<std::vector<double>, int, int>>& workers, int quad_nodes) {
        std::vector<WorkerEvidence> ev;
        for (const auto& [h, c, x] : workers) ev.push_back({h, c, x});
        return log_likelihood(make_model(mu, sigma, rho), ev, Quadrature::gauss_legendre(quad_nodes));
      },
      py::arg("mu"), py::arg("sigma"), py::arg("rho"), py::arg("workers"), py::arg("quad_nodes") = 512);

  mod.def(
      "median_eliminate",
      [](const std::vector<double>& scores, const std::vector<WorkerId>& ids) { return median_eliminate(scores, ids); },
      py::arg("scores"), py::arg("ids"));

  mod.def(
      "generate_dataset",
      [](int workers, int domains, std::uint64_t seed, int Q, double a_T,
         std::optional<std::vector<std::pair<double, double>>> moments) {
        GeneratorSpec spec;
        spec.workers = workers;
        spec.domains = domains;
        spec.seed = seed;
        spec.Q = Q;
        spec.a_T = a_T;
        if (moments) spec.moments = *moments;
        return canonical_serialize(generate_dataset(spec));
      },
      py::arg("workers"), py::arg("domains"), py::arg("seed"), py::arg("Q") = 20, py::arg("a_T") = 0.5,
      py::arg("moments") = py::none(), "Synthetic worker pool as canonical JSON text.");
  mod.def("s1_moments", &s1_moments);
  mod.def("rw1_moments", &rw1_moments);

  mod.def("run", &run_json, py::arg("dataset_json"), py::arg("method"), py::arg("k") = 5, py::arg("Q") = 20,
          py::arg("seed") = 0, py::arg("eval_mode") = "sampled", py::arg("budget") = py::none(),
          py::arg("a_T") = 0.5, py::arg("epochs") = 50, py::arg("quad_nodes") = 512,
          py::arg("eval_tasks") = py::none(), "Runs one method on the simulated pool; returns the run as JSON text.");

  mod.def(
      "theorem_probe",
      [](double epsilon, double delta, int trials, int W0, std::uint64_t seed) {
        Rng rng = make_rng(seed, Stream::probe);
        const BoundProbeResult r = theorem_probe(epsilon, delta, trials, W0, rng);
        py::dict d;
        d["epsilon"] = r.epsilon;
        d["delta"] = r.delta;
        d["tasks_per_worker"] = r.tasks_per_worker;
        d["trials"] = r.trials;
        d["failures"] = r.failures;
        d["failure_rate"] = r.failure_rate;
        return d;
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("trials") = 1000, py::arg("W0") = 20, py::arg("seed") = 0);
}

#include "crowdsel/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "crowdsel/gaussian.hpp"
#include "crowdsel/lge.hpp"
#include "crowdsel/log.hpp"
#include "crowdsel/serialize.hpp"

namespace crowdsel {

const Moments& rw1_moments() {
  static const Moments m = {{0.70, 0.22}, {0.88, 0.10}, {0.58, 0.25}, {0.55, 0.17}};
  return m;
}

const Moments& s1_moments() {
  static const Moments m = {{0.72, 0.23}, {0.86, 0.13}, {0.53, 0.29}, {0.49, 0.18}};
  return m;
}

namespace {

// N(mu, Sigma) from the generator moments, off-diagonal rho ~ U(0,1).
DomainModel generator_model(const GeneratorSpec& spec, Rng& rng) {
  const Eigen::Index dim = spec.domains + 1;
  DomainModel model;
  model.mu.resize(dim);
  model.sigma.resize(dim);
  model.rho = Eigen::MatrixXd::Identity(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    model.mu(i) = spec.moments[static_cast<std::size_t>(i)].first;
    model.sigma(i) = spec.moments[static_cast<std::size_t>(i)].second;
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) model.rho(i, j) = model.rho(j, i) = uniform01(rng);
  }
  return project_valid(std::move(model));
}

}  // namespace

double fit_initial_alpha(double first_batch_accuracy, double beta_T, double K1, int batch_size) {
  if (!(K1 > 0.0)) throw std::invalid_argument("K1 must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  const double edge = 1.0 / (2.0 * batch_size);
  const double a = std::clamp(first_batch_accuracy, edge, 1.0 - edge);
  const double alpha = (beta_T + std::log(a / (1.0 - a))) / std::log1p(K1);
  return std::clamp(alpha, 0.0, kAlphaMax);
}

std::vector<SimWorker> generate_population(const GeneratorSpec& spec) {
  if (spec.workers < 1) throw std::invalid_argument("generator needs at least one worker");
  if (spec.domains < 0 || static_cast<int>(spec.moments.size()) != spec.domains + 1) {
    throw std::invalid_argument("generator needs one (mean, stddev) pair per prior domain plus the target");
  }
  if (spec.Q < 1) throw std::invalid_argument("Q must be positive");
  for (const auto& [mean, sd] : spec.moments) {
    if (!(mean > 0.0 && mean < 1.0) || !(sd > 0.0)) {
      throw std::invalid_argument("moments need means in (0,1) and positive stddevs");
    }
  }
  const double beta_T = init_difficulty(spec.a_T);

  Rng rng = make_rng(spec.seed, Stream::generator);
  const DomainModel model = generator_model(spec, rng);

  std::vector<SimWorker> out;
  out.reserve(static_cast<std::size_t>(spec.workers));
  for (int i = 0; i < spec.workers; ++i) {
    const std::vector<double> v = sample_truncated_mvn(model, rng);
    SimWorker w;
    w.profile.id = i;
    w.profile.h.assign(v.begin(), v.begin() + spec.domains);
    w.profile.n.assign(static_cast<std::size_t>(spec.domains), spec.Q);
    w.profile.true_h_T = v.back();
    w.current_h_T = v.back();

    // First batch at the sampled accuracy fixes the learning slope.
    Rng batch_rng = make_rng(spec.seed, Stream::first_batch, {static_cast<std::uint32_t>(i)});
    const Bits first = answer(w, spec.Q, batch_rng);
    const double acc = static_cast<double>(std::count(first.begin(), first.end(), 1)) / spec.Q;
    w.profile.alpha_true = fit_initial_alpha(acc, beta_T, spec.Q, spec.Q);
    out.push_back(std::move(w));
  }
  return out;
}

Dataset generate_dataset(const GeneratorSpec& spec) {
  const auto population = generate_population(spec);
  Dataset ds;
  ds.domains = spec.domains;
  for (const auto& w : population) ds.workers.push_back(w.profile);

  nlohmann::json moments = nlohmann::json::array();
  for (const auto& [mean, sd] : spec.moments) moments.push_back({mean, sd});

  Rng rng = make_rng(spec.seed, Stream::generator);
  const DomainModel model = generator_model(spec, rng);

  ds.meta = {{"generator",
              {{"workers", spec.workers},
               {"domains", spec.domains},
               {"moments", moments},
               {"seed", spec.seed},
               {"Q", spec.Q},
               {"a_T", spec.a_T}}},
             {"generator_model", to_json(model)},
             {"world_a_T", spec.a_T}};
  return ds;
}

Bits answer(const SimWorker& worker, int count, Rng& rng) {
  if (count < 0) throw std::invalid_argument("count must be non-negative");
  Bits out(static_cast<std::size_t>(count));
  for (auto& b : out) b = uniform01(rng) < worker.current_h_T ? 1 : 0;
  return out;
}

SimWorker apply_learning(SimWorker worker, int j, long long t, int W0, double beta_T) {
  if (j < 1) throw std::invalid_argument("batch index must be positive");
  worker.current_h_T = irt_prob(worker.profile.alpha_true.value_or(0.0), beta_T, cumulative_tasks(j, t, W0));
  return worker;
}

double trained_accuracy(const WorkerProfile& worker, double tasks, int batch_size, double beta_T) {
  const double batches = std::floor(tasks / batch_size);
  if (batches < 1.0) return worker.true_h_T.value_or(0.5);
  return irt_prob(worker.alpha_true.value_or(0.0), beta_T, batches * batch_size);
}

double evaluate_selection(std::span<const SimWorker> selected, int working_tasks_per_worker, Rng& rng,
                          EvalMode mode) {
  if (selected.empty()) throw std::invalid_argument("cannot evaluate an empty selection");
  double total = 0.0;
  for (const auto& w : selected) {
    if (mode == EvalMode::closed || working_tasks_per_worker <= 0) {
      total += w.current_h_T;
    } else {
      const Bits bits = answer(w, working_tasks_per_worker, rng);
      total += static_cast<double>(std::count(bits.begin(), bits.end(), 1)) / working_tasks_per_worker;
    }
  }
  return total / static_cast<double>(selected.size());
}

double world_beta_target(const Dataset& dataset) {
  double a = 0.5;
  if (auto it = dataset.meta.find("world_a_T"); it != dataset.meta.end() && it->is_number()) a = it->get<double>();
  return init_difficulty(a);
}

Dataset load_dataset(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::vector<std::string> local;
  Dataset ds = parse_dataset(read_text_file(path), &local);
  for (const auto& w : local) log::warn(path.string() + ": " + w);
  if (warnings) warnings->insert(warnings->end(), local.begin(), local.end());
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, canonical_serialize(dataset));
}

SimulatedOracle::SimulatedOracle(const Dataset& dataset, std::uint64_t seed, Method method, int batch_size,
                                 double beta_T)
    : seed_(seed), method_tag_(static_cast<std::uint32_t>(method)), batch_size_(batch_size), beta_T_(beta_T) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  for (const auto& p : dataset.workers) {
    if (!p.true_h_T || !p.alpha_true) {
      throw std::invalid_argument("worker " + std::to_string(p.id) + " carries no simulator ground truth");
    }
    workers_.push_back({p, *p.true_h_T, 0});
  }
}

AnswerBatch SimulatedOracle::serve(WorkerId worker, int round, int count) {
  if (worker < 0 || worker >= static_cast<int>(workers_.size())) throw std::out_of_range("unknown worker");
  if (count < 0) throw std::invalid_argument("count must be non-negative");
  AnswerBatch batch;
  batch.worker_id = worker;

  Rng truth_rng = make_rng(seed_, Stream::truth, {method_tag_, static_cast<std::uint32_t>(round)});
  batch.ground_truth.resize(static_cast<std::size_t>(count));
  for (auto& g : batch.ground_truth) g = uniform01(truth_rng) < 0.5 ? 1 : 0;

  SimWorker& w = workers_[static_cast<std::size_t>(worker)];
  Rng rng = make_rng(seed_, Stream::answers,
                     {method_tag_, static_cast<std::uint32_t>(worker), static_cast<std::uint32_t>(round)});
  batch.given.resize(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const bool correct = uniform01(rng) < w.current_h_T;
    const auto truth = batch.ground_truth[static_cast<std::size_t>(j)];
    batch.given[static_cast<std::size_t>(j)] = correct ? truth : static_cast<std::uint8_t>(1 - truth);
    ++w.tasks_answered;
    if (w.tasks_answered % batch_size_ == 0) {
      w.current_h_T = irt_prob(*w.profile.alpha_true, beta_T_, w.tasks_answered);
    }
  }
  return batch;
}

RunResult run_experiment(const Dataset& dataset, const SelectionConfig& cfg, Method method) {
  const double beta_world = world_beta_target(dataset);
  SimulatedOracle oracle(dataset, cfg.seed, method, cfg.Q, beta_world);
  RunResult res = run_method(method, dataset, cfg, oracle);

  std::vector<SimWorker> chosen;
  for (WorkerId id : res.selected_ids) chosen.push_back(oracle.workers()[static_cast<std::size_t>(id)]);
  Rng eval_rng = make_rng(cfg.seed, Stream::evaluation, {static_cast<std::uint32_t>(method)});
  res.evaluation = evaluate_selection(chosen, cfg.working_tasks(), eval_rng, cfg.eval_mode);

  const int W0 = static_cast<int>(dataset.workers.size());
  const BudgetPlan plan = plan_budget(W0, cfg.k, cfg.Q, cfg.B);
  const double K_final = cumulative_tasks(plan.n_rounds, plan.t, W0);
  std::vector<double> final_h;
  std::vector<double> trained_h;
  std::vector<WorkerId> ids;
  for (const auto& w : oracle.workers()) {
    ids.push_back(w.profile.id);
    final_h.push_back(trained_accuracy(w.profile, K_final, cfg.Q, beta_world));
    trained_h.push_back(w.current_h_T);
  }
  res.ground_truth_ids = top_by_score(final_h, ids, cfg.k);
  double gt = 0.0;
  for (WorkerId id : res.ground_truth_ids) gt += final_h[static_cast<std::size_t>(id)];
  res.ground_truth_accuracy = gt / static_cast<double>(res.ground_truth_ids.size());
  res.trained_ground_truth_ids = top_by_score(trained_h, ids, cfg.k);
  return res;
}

}  // namespace crowdsel

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"

#include "crowdsel/log.hpp"
#include "crowdsel/rng.hpp"
#include "crowdsel/selection.hpp"
#include "crowdsel/serialize.hpp"
#include "crowdsel/simulator.hpp"

namespace crowdsel::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string fmt_value(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Stats {
  int runs = 0;
  double mean = 0.0;
  std::optional<double> stddev;  // sample stddev, absent for a single run
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  s.runs = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

// Options shared by run, compare and sweep.
struct TuningFlags {
  double a_T = 0.5;
  double r1 = 1e-7;
  double r2 = 1e-4;
  int epochs = 50;
  int quad_nodes = 512;
  double delta0 = 0.1;
  std::string eval_mode = "sampled";
  std::optional<int> eval_tasks;
  std::optional<long long> budget;
  bool li_single_fit = false;

  void attach(CLI::App* app) {
    app->add_option("--a-t", a_T, "Prior accuracy on the target domain")->check(CLI::Range(1e-9, 1.0 - 1e-9));
    app->add_option("--r1", r1, "Learning rate for mu");
    app->add_option("--r2", r2, "Learning rate for sigma and rho");
    app->add_option("--epochs", epochs, "Gradient epochs per round")->check(CLI::NonNegativeNumber);
    app->add_option("--quad-nodes", quad_nodes, "Quadrature nodes")->check(CLI::Range(2, 1 << 16));
    app->add_option("--delta0", delta0, "Initial confidence parameter")->check(CLI::Range(1e-12, 1.0));
    app->add_option("--eval-mode", eval_mode, "Evaluation mode")->check(CLI::IsMember({"sampled", "closed"}));
    app->add_option("--eval-tasks", eval_tasks, "Working tasks per selected worker")->check(CLI::PositiveNumber);
    app->add_option("--budget", budget, "Total budget override")->check(CLI::NonNegativeNumber);
    app->add_flag("--li-single-fit", li_single_fit, "Fit the regression baseline once instead of every round");
  }

  SelectionConfig config(int k, int Q, std::uint64_t seed) const {
    SelectionConfig cfg;
    cfg.k = k;
    cfg.Q = Q;
    cfg.B = budget;
    cfg.delta0 = delta0;
    cfg.r1 = r1;
    cfg.r2 = r2;
    cfg.G = epochs;
    cfg.a_T = a_T;
    cfg.quad_nodes = quad_nodes;
    cfg.seed = seed;
    cfg.eval_tasks = eval_tasks;
    cfg.eval_mode = *parse_eval_mode(eval_mode);
    cfg.li_refit_each_round = !li_single_fit;
    return cfg;
  }
};

// Where compare and sweep get their worker pools: a fixed file, or a fresh
// synthetic pool per seed.
struct PoolFlags {
  std::string data;
  int workers = 40;
  int domains = 3;
  std::string preset = "rw1";
  std::vector<double> moments;
  int gen_q = 20;
  double world_a_T = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--data", data, "Dataset file; otherwise a synthetic pool is generated per seed");
    app->add_option("--workers", workers, "Synthetic pool size")->check(CLI::PositiveNumber);
    app->add_option("--domains", domains, "Synthetic prior domains")->check(CLI::NonNegativeNumber);
    app->add_option("--preset", preset, "Synthetic moments preset")->check(CLI::IsMember({"rw1", "s1"}));
    app->add_option("--moments", moments, "Flat mean,stddev list, target last")->delimiter(',');
    app->add_option("--gen-q", gen_q, "Historical tasks per prior domain")->check(CLI::PositiveNumber);
    app->add_option("--world-a-t", world_a_T, "Target accuracy that sets the world's difficulty")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  }

  std::vector<Dataset> datasets(const std::vector<long long>& seeds) const;
};

Moments moments_from(const std::vector<double>& flat, const std::string& preset, int domains) {
  Moments m;
  if (flat.empty()) {
    m = preset == "s1" ? s1_moments() : rw1_moments();
  } else {
    if (flat.size() % 2 != 0) throw std::invalid_argument("invalid moments: expected mean,stddev pairs");
    for (std::size_t i = 0; i < flat.size(); i += 2) m.emplace_back(flat[i], flat[i + 1]);
  }
  if (static_cast<int>(m.size()) != domains + 1) {
    throw std::invalid_argument("invalid moments: need " + std::to_string(domains + 1) + " pairs for " +
                                std::to_string(domains) + " prior domains, got " + std::to_string(m.size()));
  }
  for (const auto& [mean, sd] : m) {
    if (!(mean > 0.0 && mean < 1.0) || !(sd > 0.0)) {
      throw std::invalid_argument("invalid moments: means must lie in (0,1) and stddevs be positive");
    }
  }
  return m;
}

std::vector<Dataset> PoolFlags::datasets(const std::vector<long long>& seeds) const {
  std::vector<Dataset> out;
  if (!data.empty()) {
    out.push_back(load_dataset(data));
    return out;
  }
  GeneratorSpec spec;
  spec.workers = workers;
  spec.domains = domains;
  spec.moments = moments_from(moments, preset, domains);
  spec.Q = gen_q;
  spec.a_T = world_a_T;
  for (long long s : seeds) {
    spec.seed = static_cast<std::uint64_t>(s);
    out.push_back(generate_dataset(spec));
  }
  return out;
}

struct Job {
  std::size_t dataset = 0;
  SelectionConfig cfg;
  Method method = Method::ours;
};

struct JobOutcome {
  double accuracy = 0.0;
  long long budget_spent = 0;
  int n_rounds = 0;
  long long B = 0;
};

// Runs jobs on up to `threads` workers; outcomes keep the job order.
std::vector<JobOutcome> run_jobs(const std::vector<Dataset>& datasets, const std::vector<Job>& jobs, int threads) {
  std::vector<JobOutcome> out(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& job = jobs[i];
        const RunResult r = run_experiment(datasets[job.dataset], job.cfg, job.method);
        out[i] = {r.evaluation.value_or(0.0), r.budget_spent, r.n_rounds, r.B};
      } catch (const std::exception& e) {
        errors[i] = std::string(to_string(jobs[i].method)) + " seed " + std::to_string(jobs[i].cfg.seed) + ": " +
                    e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return out;
}

std::vector<Method> methods_from(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    auto m = parse_method(n);
    if (!m) throw UsageError("unknown method: " + n);
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) out = all_methods();
  std::sort(out.begin(), out.end(), [](Method a, Method b) { return to_string(a) < to_string(b); });
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateCmd {
  int workers = 0;
  int domains = 0;
  long long seed = 0;
  std::string out;
  std::string preset = "rw1";
  std::vector<double> moments;
  int q = 20;
  double a_T = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--workers", workers, "Number of workers")->required()->check(CLI::PositiveNumber);
    app->add_option("--domains", domains, "Number of prior domains")->required()->check(CLI::NonNegativeNumber);
    app->add_option("--seed", seed, "Random seed")->required()->check(CLI::NonNegativeNumber);
    app->add_option("--out", out, "Output dataset file")->required();
    app->add_option("--preset", preset, "Moments preset when --moments is absent")
        ->check(CLI::IsMember({"rw1", "s1"}));
    app->add_option("--moments", moments, "Flat mean,stddev list, target last")->delimiter(',');
    app->add_option("--q", q, "Historical tasks per prior domain")->check(CLI::PositiveNumber);
    app->add_option("--a-t", a_T, "Target accuracy that sets the world's difficulty")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  }

  int exec(std::ostream& os) const {
    GeneratorSpec spec;
    spec.workers = workers;
    spec.domains = domains;
    spec.moments = moments_from(moments, preset, domains);
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.Q = q;
    spec.a_T = a_T;
    const Dataset ds = generate_dataset(spec);
    save_dataset(ds, out);

    os << "domain,mean,stddev\n";
    auto summary = [&](const std::string& name, auto value) {
      std::vector<double> xs;
      for (const auto& w : ds.workers) xs.push_back(value(w));
      const Stats s = stats_of(xs);
      os << name << ',' << fmt(s.mean) << ',' << (s.stddev ? fmt(*s.stddev) : "") << '\n';
    };
    for (int d = 0; d < domains; ++d) {
      summary("d" + std::to_string(d), [d](const WorkerProfile& w) { return w.h[static_cast<std::size_t>(d)]; });
    }
    summary("target", [](const WorkerProfile& w) { return w.true_h_T.value_or(0.0); });
    return kExitOk;
  }
};

// --------------------------------------------------------------------- run

struct RunCmd {
  std::string data;
  std::string method;
  int k = 0;
  int q = 0;
  long long seed = 0;
  std::string out;
  TuningFlags tuning;

  void attach(CLI::App* app) {
    app->add_option("--data", data, "Dataset file")->required();
    app->add_option("--method", method, "Selection method")
        ->required()
        ->check(CLI::IsMember({"ours", "me", "us", "li", "me-cpe"}));
    app->add_option("--k", k, "Workers to select")->required()->check(CLI::PositiveNumber);
    app->add_option("--q", q, "Tasks per batch")->required()->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Random seed")->required()->check(CLI::NonNegativeNumber);
    app->add_option("--out", out, "Run result file (default <dataset>-<method>-s<seed>.json next to the dataset)");
    tuning.attach(app);
  }

  int exec(std::ostream& os) const {
    const Dataset ds = load_dataset(data);
    const Method m = *parse_method(method);
    const SelectionConfig cfg = tuning.config(k, q, static_cast<std::uint64_t>(seed));
    const RunResult res = run_experiment(ds, cfg, m);

    const std::string stem = std::filesystem::path(data).stem().string();
    const std::filesystem::path target =
        out.empty() ? std::filesystem::path(data).parent_path() /
                          (stem + "-" + std::string(to_string(m)) + "-s" + std::to_string(seed) + ".json")
                    : std::filesystem::path(out);
    write_text_file(target, canonical_serialize(res));

    os << "method,dataset,k,Q,seed,selected_accuracy,budget_spent\n";
    os << to_string(m) << ',' << stem << ',' << k << ',' << q << ',' << seed << ','
       << fmt(res.evaluation.value_or(0.0)) << ',' << res.budget_spent << '\n';
    return kExitOk;
  }
};

// ----------------------------------------------------------------- compare

struct CompareCmd {
  int k = 5;
  int q = 20;
  std::string seeds = "1";
  std::vector<std::string> methods;
  int jobs = 1;
  std::string per_seed_out;
  PoolFlags pool;
  TuningFlags tuning;

  void attach(CLI::App* app) {
    app->add_option("--k", k, "Workers to select")->check(CLI::PositiveNumber);
    app->add_option("--q", q, "Tasks per batch")->check(CLI::PositiveNumber);
    app->add_option("--seeds", seeds, "Seeds, e.g. 1-30 or 1,4,9");
    app->add_option("--methods", methods, "Methods to compare (default all)")->delimiter(',');
    app->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    app->add_option("--per-seed-out", per_seed_out, "Also write one CSV row per (seed, method)");
    pool.attach(app);
    tuning.attach(app);
  }

  int exec(std::ostream& os) const {
    const auto seed_list = parse_int_list(seeds);
    const auto method_list = methods_from(methods);
    const auto datasets = pool.datasets(seed_list);

    std::vector<Job> job_list;
    for (std::size_t s = 0; s < seed_list.size(); ++s) {
      for (Method m : method_list) {
        job_list.push_back({datasets.size() == 1 ? 0 : s, tuning.config(k, q, static_cast<std::uint64_t>(seed_list[s])), m});
      }
    }
    const auto outcomes = run_jobs(datasets, job_list, jobs);

    std::map<Method, std::vector<double>> acc;
    for (std::size_t i = 0; i < job_list.size(); ++i) acc[job_list[i].method].push_back(outcomes[i].accuracy);

    const auto ours_it = acc.find(Method::ours);
    os << "method,runs,mean_accuracy,stddev_accuracy,ours_uplift_pct,ours_win_rate\n";
    for (Method m : method_list) {
      const Stats s = stats_of(acc[m]);
      os << to_string(m) << ',' << s.runs << ',' << fmt(s.mean) << ',' << (s.stddev ? fmt(*s.stddev) : "") << ',';
      if (ours_it != acc.end() && m != Method::ours) {
        const Stats o = stats_of(ours_it->second);
        int wins = 0;
        for (std::size_t i = 0; i < acc[m].size(); ++i) wins += ours_it->second[i] > acc[m][i] ? 1 : 0;
        os << (s.mean > 0.0 ? fmt(100.0 * (o.mean - s.mean) / s.mean) : "") << ','
           << fmt(static_cast<double>(wins) / static_cast<double>(acc[m].size()));
      } else {
        os << ',';
      }
      os << '\n';
    }

    if (!per_seed_out.empty()) {
      std::ostringstream rows;
      rows << "seed,method,selected_accuracy,budget_spent\n";
      for (std::size_t i = 0; i < job_list.size(); ++i) {
        rows << job_list[i].cfg.seed << ',' << to_string(job_list[i].method) << ',' << fmt(outcomes[i].accuracy)
             << ',' << outcomes[i].budget_spent << '\n';
      }
      write_text_file(per_seed_out, rows.str());
    }
    return kExitOk;
  }
};

// ------------------------------------------------------------------- sweep

struct SweepCmd {
  std::string param;
  std::string values;
  int k = 5;
  int q = 20;
  std::string seeds = "1";
  std::vector<std::string> methods;
  int jobs = 1;
  PoolFlags pool;
  TuningFlags tuning;

  void attach(CLI::App* app) {
    app->add_option("--param", param, "Parameter to vary")->required()->check(CLI::IsMember({"k", "Q", "a_T"}));
    app->add_option("--values", values, "Comma-separated values")->required();
    app->add_option("--k", k, "Workers to select when not swept")->check(CLI::PositiveNumber);
    app->add_option("--q", q, "Tasks per batch when not swept")->check(CLI::PositiveNumber);
    app->add_option("--seeds", seeds, "Seeds, e.g. 1-30 or 1,4,9");
    app->add_option("--methods", methods, "Methods (default all)")->delimiter(',');
    app->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    pool.attach(app);
    tuning.attach(app);
  }

  int exec(std::ostream& os) const {
    const auto value_list = parse_double_list(values);
    if (value_list.empty()) throw UsageError("--values must not be empty");
    for (double v : value_list) {
      if (param == "a_T" && !(v > 0.0 && v < 1.0)) throw UsageError("a_T values must lie in (0,1)");
      if (param != "a_T" && (v < 1.0 || v != std::floor(v))) throw UsageError(param + " values must be positive integers");
    }
    const auto seed_list = parse_int_list(seeds);
    const auto method_list = methods_from(methods);
    const auto datasets = pool.datasets(seed_list);

    std::vector<Job> job_list;
    for (double v : value_list) {
      for (std::size_t s = 0; s < seed_list.size(); ++s) {
        for (Method m : method_list) {
          SelectionConfig cfg = tuning.config(k, q, static_cast<std::uint64_t>(seed_list[s]));
          if (param == "k") cfg.k = static_cast<int>(v);
          if (param == "Q") cfg.Q = static_cast<int>(v);
          if (param == "a_T") cfg.a_T = v;
          job_list.push_back({datasets.size() == 1 ? 0 : s, cfg, m});
        }
      }
    }
    const auto outcomes = run_jobs(datasets, job_list, jobs);

    os << "param,value,method,n_rounds,B,runs,mean_accuracy,stddev_accuracy\n";
    const std::size_t per_value = seed_list.size() * method_list.size();
    for (std::size_t vi = 0; vi < value_list.size(); ++vi) {
      for (std::size_t mi = 0; mi < method_list.size(); ++mi) {
        std::vector<double> xs;
        int n_rounds = 0;
        long long B = 0;
        for (std::size_t s = 0; s < seed_list.size(); ++s) {
          const std::size_t i = vi * per_value + s * method_list.size() + mi;
          xs.push_back(outcomes[i].accuracy);
          n_rounds = outcomes[i].n_rounds;
          B = outcomes[i].B;
        }
        const Stats st = stats_of(xs);
        os << param << ',' << fmt_value(value_list[vi]) << ',' << to_string(method_list[mi]) << ',' << n_rounds << ','
           << B << ',' << st.runs << ',' << fmt(st.mean) << ',' << (st.stddev ? fmt(*st.stddev) : "") << '\n';
      }
    }
    return kExitOk;
  }
};

// ------------------------------------------------------------- probe-bound

struct ProbeCmd {
  double epsilon = 0.1;
  double delta = 0.1;
  int trials = 1000;
  int workers = 20;
  long long seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Accuracy gap")->check(CLI::Range(1e-9, 1.0 - 1e-9));
    app->add_option("--delta", delta, "Failure probability")->check(CLI::Range(1e-9, 1.0 - 1e-9));
    app->add_option("--trials", trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
    app->add_option("--workers", workers, "Workers per trial")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Random seed")->check(CLI::NonNegativeNumber);
  }

  int exec(std::ostream& os) const {
    Rng rng = make_rng(static_cast<std::uint64_t>(seed), Stream::probe);
    const BoundProbeResult r = theorem_probe(epsilon, delta, trials, workers, rng);
    os << "epsilon,delta,W0,trials,tasks_per_worker,failures,failure_rate\n";
    os << fmt_value(r.epsilon) << ',' << fmt_value(r.delta) << ',' << workers << ',' << r.trials << ','
       << r.tasks_per_worker << ',' << r.failures << ',' << fmt(r.failure_rate) << '\n';
    return kExitOk;
  }
};

// Pulls `--config <file>` out of args and merges the file's keys.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;
  std::string text;
  try {
    text = read_text_file(*path);
  } catch (const std::exception& e) {
    throw UsageError(std::string("cannot read config: ") + e.what());
  }
  return merge_config(rest, text);
}

}  // namespace

std::vector<long long> parse_int_list(const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      const auto dash = part.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoll(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } else {
        const std::string a = trim(part.substr(0, dash));
        const std::string b = trim(part.substr(dash + 1));
        const long long lo = std::stoll(a, &used);
        if (used != a.size()) throw std::invalid_argument(part);
        const long long hi = std::stoll(b, &used);
        if (used != b.size() || hi < lo) throw std::invalid_argument(part);
        for (long long v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad integer list element: " + part);
    }
  }
  if (out.empty()) throw UsageError("empty integer list");
  for (long long v : out) {
    if (v < 0) throw UsageError("seeds must be non-negative");
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw UsageError("bad number: " + part);
    }
  }
  return out;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::string& config_text) {
  std::vector<std::string> out = args;
  auto present = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::stringstream ss(config_text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value == "true") {
      out.push_back(flag);
    } else if (value != "false") {
      out.push_back(flag);
      out.push_back(value);
    }
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  log::init_from_env();
  CLI::App app{"Cross-domain worker selection with training"};
  app.name("crowdsel");
  app.require_subcommand(1);

  GenerateCmd gen;
  RunCmd run_cmd;
  CompareCmd compare;
  SweepCmd sweep;
  ProbeCmd probe;
  gen.attach(app.add_subcommand("generate", "Generate a synthetic worker pool"));
  run_cmd.attach(app.add_subcommand("run", "Run one selection method on a dataset"));
  compare.attach(app.add_subcommand("compare", "Compare methods over several seeds"));
  sweep.attach(app.add_subcommand("sweep", "Vary k, Q or a_T and compare methods"));
  probe.attach(app.add_subcommand("probe-bound", "Monte-Carlo check of the elimination bound"));

  try {
    const std::vector<std::string> full = expand_config(args);
    std::vector<std::string> storage;
    storage.reserve(full.size() + 1);
    storage.push_back("crowdsel");
    storage.insert(storage.end(), full.begin(), full.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }

    if (app.got_subcommand("generate")) return gen.exec(out);
    if (app.got_subcommand("run")) return run_cmd.exec(out);
    if (app.got_subcommand("compare")) return compare.exec(out);
    if (app.got_subcommand("sweep")) return sweep.exec(out);
    if (app.got_subcommand("probe-bound")) return probe.exec(out);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
}

}  // namespace crowdsel::cli

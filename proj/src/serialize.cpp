#include "crowdsel/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace crowdsel {

using nlohmann::json;

namespace {

void dump_into(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::null:
      out += "null";
      break;
    case json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw std::invalid_argument("cannot serialize non-finite number");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      std::string s(buf);
      // Keep the float type visible so the value re-parses as a float.
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      out += s;
      break;
    }
    case json::value_t::string:
      out += v.dump();
      break;
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        dump_into(e, out);
      }
      out += ']';
      break;
    }
    case json::value_t::object: {
      // nlohmann::json stores objects in a std::map, so iteration is key-sorted.
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_into(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::binary:
    case json::value_t::discarded:
      throw std::invalid_argument("unsupported json value");
  }
}

json model_json(const DomainModel& m) {
  json rho = json::array();
  for (int i = 0; i < m.rho.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.rho.cols(); ++j) row.push_back(m.rho(i, j));
    rho.push_back(std::move(row));
  }
  return json{{"mu", std::vector<double>(m.mu.data(), m.mu.data() + m.mu.size())},
              {"sigma", std::vector<double>(m.sigma.data(), m.sigma.data() + m.sigma.size())},
              {"rho", std::move(rho)}};
}

const json& require(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(ctx + ": missing field \"" + key + "\"");
  return *it;
}

template <typename T>
T get_as(const json& v, const std::string& ctx) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

std::vector<Bits> bits_list(const json& v, const std::string& ctx) {
  std::vector<Bits> out;
  for (const auto& s : get_as<std::vector<std::string>>(v, ctx)) out.push_back(bits_from_string(s));
  return out;
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

std::string canonical_dump(const json& value) {
  std::string out;
  dump_into(value, out);
  out += '\n';
  return out;
}

std::string bits_to_string(const Bits& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s += b ? '1' : '0';
  return s;
}

Bits bits_from_string(std::string_view s) {
  Bits out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw ParseError("bit string contains '" + std::string(1, c) + "'");
    out.push_back(c == '1' ? 1 : 0);
  }
  return out;
}

json to_json(const DomainModel& model) { return model_json(model); }

json to_json(const Dataset& dataset) {
  json workers = json::array();
  for (const auto& w : dataset.workers) {
    json o{{"id", w.id}, {"h", w.h}, {"n", w.n}};
    if (w.true_h_T) o["true_h_T"] = *w.true_h_T;
    if (w.alpha_true) o["alpha_true"] = *w.alpha_true;
    workers.push_back(std::move(o));
  }
  return json{{"domains", dataset.domains}, {"workers", std::move(workers)}, {"meta", dataset.meta}};
}

json to_json(const RoundRecord& r) {
  json answers = json::array();
  for (const auto& a : r.answers) answers.push_back(bits_to_string(a));
  json o{{"round", r.round_index},
         {"surviving_ids", r.surviving_ids},
         {"tasks_per_worker", r.tasks_per_worker},
         {"ground_truth", bits_to_string(r.ground_truth)},
         {"answers", std::move(answers)},
         {"correct_counts", r.correct_counts},
         {"wrong_counts", r.wrong_counts},
         {"p_c", r.p_c},
         {"p_hat_c", r.p_hat_c},
         {"delta_c", r.delta_c},
         {"K_c", r.K_c},
         {"eliminated_ids", r.eliminated_ids},
         {"regression_fallback", r.regression_fallback}};
  if (r.model) o["model"] = model_json(*r.model);
  return o;
}

json to_json(const RunResult& r) {
  json rounds = json::array();
  for (const auto& rec : r.rounds) rounds.push_back(to_json(rec));
  json o{{"method", std::string(to_string(r.method))},
         {"seed", r.seed},
         {"k", r.k},
         {"Q", r.Q},
         {"B", r.B},
         {"n_rounds", r.n_rounds},
         {"t", r.t},
         {"selected_ids", r.selected_ids},
         {"rounds", std::move(rounds)},
         {"fitted_alpha", r.fitted_alpha},
         {"eval_mode", std::string(to_string(r.eval_mode))},
         {"budget_spent", r.budget_spent},
         {"warnings", r.warnings},
         {"ground_truth_ids", r.ground_truth_ids},
         {"trained_ground_truth_ids", r.trained_ground_truth_ids}};
  if (r.final_model) o["final_model"] = model_json(*r.final_model);
  if (r.evaluation) o["evaluation"] = *r.evaluation;
  if (r.ground_truth_accuracy) o["ground_truth_accuracy"] = *r.ground_truth_accuracy;
  return o;
}

std::string canonical_serialize(const Dataset& dataset) { return canonical_dump(to_json(dataset)); }
std::string canonical_serialize(const RunResult& result) { return canonical_dump(to_json(result)); }

DomainModel model_from_json(const json& doc) {
  const std::string ctx = "model";
  const auto mu = get_as<std::vector<double>>(require(doc, "mu", ctx), ctx + ".mu");
  const auto sigma = get_as<std::vector<double>>(require(doc, "sigma", ctx), ctx + ".sigma");
  const auto rho = get_as<std::vector<std::vector<double>>>(require(doc, "rho", ctx), ctx + ".rho");
  const auto dim = static_cast<Eigen::Index>(mu.size());
  if (static_cast<Eigen::Index>(sigma.size()) != dim || static_cast<Eigen::Index>(rho.size()) != dim) {
    throw ParseError(ctx + ": inconsistent dimensions");
  }
  DomainModel m;
  m.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), dim);
  m.sigma = Eigen::Map<const Eigen::VectorXd>(sigma.data(), dim);
  m.rho.resize(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (static_cast<Eigen::Index>(rho[i].size()) != dim) throw ParseError(ctx + ".rho: ragged row");
    for (Eigen::Index j = 0; j < dim; ++j) m.rho(i, j) = rho[i][j];
  }
  return m;
}

Dataset dataset_from_json(const json& doc, std::vector<std::string>* warnings) {
  static const std::set<std::string> known_top = {"domains", "workers", "meta"};
  static const std::set<std::string> known_worker = {"id", "h", "n", "true_h_T", "alpha_true"};
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  if (!doc.is_object()) throw ParseError("dataset: expected a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known_top.count(it.key())) warn("ignoring unknown field \"" + it.key() + "\"");
  }

  Dataset ds;
  ds.domains = get_as<int>(require(doc, "domains", "dataset"), "dataset.domains");
  const json& workers = require(doc, "workers", "dataset");
  if (!workers.is_array()) throw ParseError("dataset.workers: expected an array");
  if (auto it = doc.find("meta"); it != doc.end()) ds.meta = *it;

  for (std::size_t i = 0; i < workers.size(); ++i) {
    const std::string ctx = "worker " + std::to_string(i);
    const json& w = workers[i];
    if (!w.is_object()) throw ParseError(ctx + ": expected an object");
    for (auto it = w.begin(); it != w.end(); ++it) {
      if (!known_worker.count(it.key())) warn(ctx + ": ignoring unknown field \"" + it.key() + "\"");
    }
    WorkerProfile p;
    p.id = get_as<int>(require(w, "id", ctx), ctx + ".id");
    p.h = get_as<std::vector<double>>(require(w, "h", ctx), ctx + ".h");
    p.n = get_as<std::vector<int>>(require(w, "n", ctx), ctx + ".n");
    if (auto it = w.find("true_h_T"); it != w.end() && !it->is_null()) {
      p.true_h_T = get_as<double>(*it, ctx + ".true_h_T");
    }
    if (auto it = w.find("alpha_true"); it != w.end() && !it->is_null()) {
      p.alpha_true = get_as<double>(*it, ctx + ".alpha_true");
    }
    ds.workers.push_back(std::move(p));
  }

  std::stable_sort(ds.workers.begin(), ds.workers.end(),
                   [](const WorkerProfile& a, const WorkerProfile& b) { return a.id < b.id; });
  bool renumbered = false;
  for (std::size_t i = 0; i < ds.workers.size(); ++i) {
    if (i > 0 && ds.workers[i].id == ds.workers[i - 1].id) {
      throw ParseError("dataset.workers: duplicate id " + std::to_string(ds.workers[i].id));
    }
  }
  for (std::size_t i = 0; i < ds.workers.size(); ++i) {
    if (ds.workers[i].id != static_cast<int>(i)) {
      ds.workers[i].id = static_cast<int>(i);
      renumbered = true;
    }
  }
  if (renumbered) warn("worker ids re-numbered densely in ascending id order");
  return ds;
}

Dataset parse_dataset(std::string_view text, std::vector<std::string>* warnings) {
  return dataset_from_json(parse_text(text), warnings);
}

RunResult parse_run_result(std::string_view text) {
  const json doc = parse_text(text);
  const std::string ctx = "run";
  RunResult r;
  const auto method_name = get_as<std::string>(require(doc, "method", ctx), "run.method");
  const auto method = parse_method(method_name);
  if (!method) throw ParseError("run.method: unknown method \"" + method_name + "\"");
  r.method = *method;
  r.seed = get_as<std::uint64_t>(require(doc, "seed", ctx), "run.seed");
  r.k = get_as<int>(require(doc, "k", ctx), "run.k");
  r.Q = get_as<int>(require(doc, "Q", ctx), "run.Q");
  r.B = get_as<long long>(require(doc, "B", ctx), "run.B");
  r.n_rounds = get_as<int>(require(doc, "n_rounds", ctx), "run.n_rounds");
  r.t = get_as<long long>(require(doc, "t", ctx), "run.t");
  r.selected_ids = get_as<std::vector<int>>(require(doc, "selected_ids", ctx), "run.selected_ids");
  r.fitted_alpha = get_as<std::vector<double>>(require(doc, "fitted_alpha", ctx), "run.fitted_alpha");
  const auto mode_name = get_as<std::string>(require(doc, "eval_mode", ctx), "run.eval_mode");
  const auto mode = parse_eval_mode(mode_name);
  if (!mode) throw ParseError("run.eval_mode: unknown mode \"" + mode_name + "\"");
  r.eval_mode = *mode;
  r.budget_spent = get_as<long long>(require(doc, "budget_spent", ctx), "run.budget_spent");
  r.warnings = get_as<std::vector<std::string>>(require(doc, "warnings", ctx), "run.warnings");
  r.ground_truth_ids = get_as<std::vector<int>>(require(doc, "ground_truth_ids", ctx), "run.ground_truth_ids");
  r.trained_ground_truth_ids =
      get_as<std::vector<int>>(require(doc, "trained_ground_truth_ids", ctx), "run.trained_ground_truth_ids");
  if (auto it = doc.find("final_model"); it != doc.end()) r.final_model = model_from_json(*it);
  if (auto it = doc.find("evaluation"); it != doc.end()) r.evaluation = get_as<double>(*it, "run.evaluation");
  if (auto it = doc.find("ground_truth_accuracy"); it != doc.end()) {
    r.ground_truth_accuracy = get_as<double>(*it, "run.ground_truth_accuracy");
  }

  const json& rounds = require(doc, "rounds", ctx);
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const std::string rc = "run.rounds[" + std::to_string(i) + "]";
    const json& o = rounds[i];
    RoundRecord rec;
    rec.round_index = get_as<int>(require(o, "round", rc), rc);
    rec.surviving_ids = get_as<std::vector<int>>(require(o, "surviving_ids", rc), rc);
    rec.tasks_per_worker = get_as<int>(require(o, "tasks_per_worker", rc), rc);
    rec.ground_truth = bits_from_string(get_as<std::string>(require(o, "ground_truth", rc), rc));
    rec.answers = bits_list(require(o, "answers", rc), rc);
    rec.correct_counts = get_as<std::vector<int>>(require(o, "correct_counts", rc), rc);
    rec.wrong_counts = get_as<std::vector<int>>(require(o, "wrong_counts", rc), rc);
    rec.p_c = get_as<std::vector<double>>(require(o, "p_c", rc), rc);
    rec.p_hat_c = get_as<std::vector<double>>(require(o, "p_hat_c", rc), rc);
    rec.delta_c = get_as<double>(require(o, "delta_c", rc), rc);
    rec.K_c = get_as<double>(require(o, "K_c", rc), rc);
    rec.eliminated_ids = get_as<std::vector<int>>(require(o, "eliminated_ids", rc), rc);
    rec.regression_fallback = get_as<bool>(require(o, "regression_fallback", rc), rc);
    if (auto it = o.find("model"); it != o.end()) rec.model = model_from_json(*it);
    r.rounds.push_back(std::move(rec));
  }
  return r;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace crowdsel

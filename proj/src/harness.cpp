#include "sqn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "sqn/errors.hpp"
#include "sqn/quadratic.hpp"
#include "sqn/sr1.hpp"

namespace sqn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

Dataset gen_toy_dataset(std::uint64_t seed) {
  SplitMix64 rng(seed);
  Dataset data;
  const double two_pi = 6.283185307179586476925286766559;
  // class 0: uniform over the inner disk
  for (int i = 0; i < 50; ++i) {
    const double radius = 0.35 * std::sqrt(rng.next_double());
    const double angle = two_pi * rng.next_double();
    data.inputs.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    data.labels.push_back(0);
  }
  // class 1: uniform over the annulus 0.6 <= r <= 1.0
  for (int i = 0; i < 50; ++i) {
    const double r2 = 0.36 + (1.0 - 0.36) * rng.next_double();
    const double radius = std::sqrt(r2);
    const double angle = two_pi * rng.next_double();
    data.inputs.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    data.labels.push_back(1);
  }
  return data;
}

Dataset load_csv_dataset(const std::string& path, std::size_t n_features,
                         bool has_header) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset file: " + path);
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && has_header) continue;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != n_features + 1) {
      throw DatasetError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(n_features + 1) + " fields, got " +
                         std::to_string(fields.size()));
    }
    Vector row(n_features);
    for (std::size_t j = 0; j < n_features; ++j) {
      char* end = nullptr;
      row[j] = std::strtod(fields[j].c_str(), &end);
      if (end == fields[j].c_str() || *end != '\0') {
        throw DatasetError("line " + std::to_string(line_no) +
                           ": non-numeric feature '" + fields[j] + "'");
      }
    }
    char* end = nullptr;
    const long label = std::strtol(fields.back().c_str(), &end, 10);
    if (end == fields.back().c_str() || *end != '\0' || label < 0) {
      throw DatasetError("line " + std::to_string(line_no) +
                         ": bad label '" + fields.back() + "'");
    }
    data.inputs.push_back(std::move(row));
    data.labels.push_back(static_cast<int>(label));
  }
  if (data.inputs.empty()) throw DatasetError("empty dataset: " + path);
  data.validate();
  return data;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.inputs[i]) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g,", v);
      out += buf;
    }
    out += std::to_string(data.labels[i]);
    out += '\n';
  }
  return out;
}

MlpSpec build_network(const std::string& name) {
  MlpSpec spec;
  if (name == "small") {
    spec.layer_sizes = {2, 2, 2, 2, 2, 2, 2};
  } else if (name == "medium") {
    spec.layer_sizes = {2, 4, 8, 8, 4, 2, 2};
  } else if (name == "large") {
    spec.layer_sizes = {2, 10, 20, 20, 10, 2, 2};
  } else {
    throw ConfigError("unknown network name: " + name);
  }
  return spec;
}

void RunConfig::validate() const {
  static const std::vector<std::string> kMethods = {
      "gd",    "adam",    "bfgs",   "lbfgs", "sr1",
      "lsr1",  "s-lbfgs", "s-lsr1", "newton-tr-cg"};
  if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end()) {
    throw ConfigError("unknown method id: " + method);
  }
  if (seeds.empty()) throw ConfigError("seed list must not be empty");
  if (budget.max_epochs < 0.0 || budget.max_iters < 0 ||
      budget.grad_tol < 0.0) {
    throw ConfigError("budgets must be non-negative");
  }
  const bool toy = problem == "toy-small" || problem == "toy-medium" ||
                   problem == "toy-large";
  const bool csv = problem.rfind("csv:", 0) == 0;
  const bool quad = problem.rfind("quadratic:", 0) == 0;
  if (!toy && !csv && !quad) {
    throw ConfigError("unknown problem id: " + problem);
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  try {
    cfg.method = j.at("method").get<std::string>();
    cfg.problem = j.at("problem").get<std::string>();
    cfg.out_dir = j.value("out_dir", std::string{});
    if (j.contains("seeds")) {
      cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    }
    cfg.data_seed = j.value("data_seed", cfg.data_seed);
    if (j.contains("budget")) {
      const auto& b = j["budget"];
      cfg.budget.max_epochs = b.value("max_epochs", cfg.budget.max_epochs);
      cfg.budget.max_iters = b.value("max_iters", cfg.budget.max_iters);
      cfg.budget.grad_tol = b.value("grad_tol", cfg.budget.grad_tol);
    }
    if (j.contains("checkpoints")) {
      cfg.checkpoints = j["checkpoints"].get<std::vector<double>>();
    }
    cfg.record_wall_ms = j.value("record_wall_ms", false);
    cfg.init_scale = j.value("init_scale", cfg.init_scale);

    cfg.qn.memory = j.value("memory", cfg.qn.memory);
    if (j.contains("option")) {
      const std::string opt = j["option"].get<std::string>();
      if (opt == "I") {
        cfg.qn.option = SampleOption::I;
      } else if (opt == "II") {
        cfg.qn.option = SampleOption::II;
      } else {
        throw ConfigError("option must be \"I\" or \"II\"");
      }
    }
    // radius: 1 is right for Option II (scale invariant); Option I wants a
    // small local radius unless overridden
    if (j.contains("radius")) {
      cfg.qn.radius = j["radius"].get<double>();
    } else if (cfg.qn.option == SampleOption::I) {
      cfg.qn.radius = 0.01;
    }
    cfg.qn.eps = j.value("eps", cfg.qn.eps);
    cfg.qn.gamma = j.value("gamma", cfg.qn.gamma);

    if (j.contains("step_mode")) {
      const std::string mode = j["step_mode"].get<std::string>();
      if (mode == "armijo") {
        cfg.step.mode = StepMode::armijo;
      } else if (mode == "constant") {
        cfg.step.mode = StepMode::constant;
      } else {
        throw ConfigError("step_mode must be \"armijo\" or \"constant\"");
      }
    }
    cfg.step.alpha = j.value("alpha", cfg.step.alpha);
    if (j.contains("ls")) {
      const auto& l = j["ls"];
      cfg.step.ls.alpha0 = l.value("alpha0", cfg.step.ls.alpha0);
      cfg.step.ls.c1 = l.value("c1", cfg.step.ls.c1);
      cfg.step.ls.tau = l.value("tau", cfg.step.ls.tau);
      cfg.step.ls.max_backtracks =
          l.value("max_backtracks", cfg.step.ls.max_backtracks);
    }
    if (j.contains("tr")) {
      const auto& t = j["tr"];
      cfg.tr.eta1 = t.value("eta1", cfg.tr.eta1);
      cfg.tr.eta2 = t.value("eta2", cfg.tr.eta2);
      cfg.tr.eta3 = t.value("eta3", cfg.tr.eta3);
      cfg.tr.gamma1 = t.value("gamma1", cfg.tr.gamma1);
      cfg.tr.zeta1 = t.value("zeta1", cfg.tr.zeta1);
      cfg.tr.zeta2 = t.value("zeta2", cfg.tr.zeta2);
      cfg.tr.delta0 = t.value("delta0", cfg.tr.delta0);
      cfg.tr.delta_max = t.value("delta_max", cfg.tr.delta_max);
      cfg.tr.cg_rel_tol = t.value("cg_rel_tol", cfg.tr.cg_rel_tol);
    }
    if (j.contains("adam")) {
      const auto& a = j["adam"];
      cfg.adam.lr = a.value("lr", cfg.adam.lr);
      cfg.adam.beta1 = a.value("beta1", cfg.adam.beta1);
      cfg.adam.beta2 = a.value("beta2", cfg.adam.beta2);
      cfg.adam.eps_hat = a.value("eps_hat", cfg.adam.eps_hat);
      cfg.adam.batch_size = a.value("batch_size", cfg.adam.batch_size);
      cfg.adam_lr_grid = a.value("lr_grid", cfg.adam_lr_grid);
    }
    if (j.contains("csv")) {
      const auto& c = j["csv"];
      cfg.csv_features = c.value("features", cfg.csv_features);
      cfg.csv_has_header = c.value("has_header", cfg.csv_has_header);
      cfg.csv_test_path = c.value("test_path", cfg.csv_test_path);
    }
    if (j.contains("layers")) {
      cfg.layers = j["layers"].get<std::vector<int>>();
    }
    if (j.contains("quadratic")) {
      cfg.quad_cond = j["quadratic"].value("cond", cfg.quad_cond);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ProblemBundle make_problem(const RunConfig& config) {
  ProblemBundle bundle;
  if (config.problem.rfind("quadratic:", 0) == 0) {
    const std::string dim_text = config.problem.substr(10);
    const int d = std::atoi(dim_text.c_str());
    if (d < 1) throw ConfigError("bad quadratic dimension: " + dim_text);
    SplitMix64 rng(config.data_seed);
    Matrix a = random_spd(static_cast<std::size_t>(d), config.quad_cond, rng);
    Vector target(static_cast<std::size_t>(d));
    for (double& v : target) v = rng.next_gaussian();
    const Vector b = matvec(a, target);
    bundle.objective = std::make_unique<QuadraticObjective>(std::move(a), b);
    bundle.dimension = static_cast<std::size_t>(d);
    return bundle;
  }

  MlpSpec spec;
  Dataset train;
  Dataset test;
  if (config.problem.rfind("csv:", 0) == 0) {
    const std::string path = config.problem.substr(4);
    train = load_csv_dataset(path, config.csv_features, config.csv_has_header);
    if (!config.csv_test_path.empty()) {
      test = load_csv_dataset(config.csv_test_path, config.csv_features,
                              config.csv_has_header);
    }
    if (!config.layers.empty()) {
      spec.layer_sizes = config.layers;
    } else {
      const int classes = train.class_count();
      spec.layer_sizes = {static_cast<int>(config.csv_features), 16, 16,
                          classes};
    }
  } else {
    const std::string name = config.problem.substr(4);  // strip "toy-"
    spec = build_network(name);
    train = gen_toy_dataset(config.data_seed);
  }
  auto mlp = std::make_unique<MlpObjective>(spec, train);
  bundle.stochastic = mlp.get();
  bundle.is_mlp = true;
  bundle.spec = spec;
  bundle.train = std::move(train);
  bundle.test = std::move(test);
  bundle.dimension = mlp->dimension();
  bundle.objective = std::move(mlp);
  return bundle;
}

Vector initial_point(const RunConfig& config, const ProblemBundle& problem,
                     std::uint64_t seed) {
  if (problem.is_mlp) {
    return init_params(problem.spec, seed, config.init_scale);
  }
  SplitMix64 rng(seed);
  Vector w0(problem.dimension);
  for (double& v : w0) {
    v = rng.next_uniform(-config.init_scale, config.init_scale);
  }
  return w0;
}

TraceRecorder::Evaluator make_trace_evaluator(const ProblemBundle& problem) {
  if (problem.is_mlp) {
    const MlpSpec spec = problem.spec;
    const Dataset* train = &problem.train;
    const Dataset* test = problem.test.size() > 0 ? &problem.test : nullptr;
    return [spec, train, test](const Vector& w) {
      TraceEval ev;
      const LossAccuracy la = loss_accuracy(spec, w, *train);
      ev.loss = la.loss;
      ev.train_acc = la.accuracy;
      ev.test_acc = test ? loss_accuracy(spec, w, *test).accuracy : -1.0;
      return ev;
    };
  }
  const Objective* obj = problem.objective.get();
  return [obj](const Vector& w) {
    TraceEval ev;
    ev.loss = obj->value(w);
    return ev;
  };
}

RunResult dispatch_run(const RunConfig& config, const ProblemBundle& problem,
                       CountingObjective& counting, const Vector& w0,
                       std::uint64_t seed, TraceRecorder& trace) {
  const std::string& m = config.method;
  if (m == "gd") {
    return gd_run(counting, w0, config.step, config.budget, trace);
  }
  if (m == "adam") {
    AdamHyper hyper = config.adam;
    if (config.adam_lr_grid) {
      hyper.lr = adam_tune_lr(*problem.objective, problem.stochastic, w0,
                              hyper, config.budget, seed);
    }
    return adam_run(counting, w0, hyper, config.budget, seed, trace);
  }
  if (m == "bfgs") {
    return classical_bfgs_run(counting, w0, config.step, config.budget, trace);
  }
  if (m == "lbfgs") {
    return classical_lbfgs_run(counting, w0, config.qn.memory, config.step,
                               config.budget, trace);
  }
  if (m == "sr1") {
    return classical_sr1_run(counting, w0, config.qn.eps, config.tr,
                             config.budget, trace);
  }
  if (m == "lsr1") {
    return classical_lsr1_run(counting, w0, config.qn.memory, config.qn.gamma,
                              config.qn.eps, config.tr, config.budget, trace);
  }
  if (m == "s-lbfgs") {
    return slbfgs_run(counting, w0, config.qn, config.step, config.budget,
                      seed, trace);
  }
  if (m == "s-lsr1") {
    return slsr1_run(counting, w0, config.qn, config.tr, config.budget, seed,
                     trace);
  }
  if (m == "newton-tr-cg") {
    return newton_tr_run(counting, w0, config.tr, config.budget, trace);
  }
  throw ConfigError("unknown method id: " + m);
}

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  if (config.out_dir.empty()) {
    throw ConfigError("run_experiment requires out_dir");
  }
  fs::create_directories(config.out_dir);
  const ProblemBundle problem = make_problem(config);
  const TraceRecorder::Evaluator evaluator = make_trace_evaluator(problem);

  ExperimentResult result;
  std::vector<std::vector<TraceRow>> all_rows;
  for (const std::uint64_t seed : config.seeds) {
    CountingObjective counting(*problem.objective, problem.stochastic);
    TraceRecorder trace(evaluator);
    const Vector w0 = initial_point(config, problem, seed);
    SeedOutcome outcome;
    outcome.seed = seed;
    RunResult run;
    try {
      run = dispatch_run(config, problem, counting, w0, seed, trace);
      outcome.aborted = run.aborted;
      outcome.reason = run.abort_reason;
      outcome.max_approx_norm = run.max_approx_norm;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      run.rows = trace.rows();
      outcome.aborted = true;
      outcome.reason = e.what();
    }
    if (!run.rows.empty()) outcome.final_row = run.rows.back();

    if (!counting.meter().audit()) {
      throw std::logic_error("epoch meter audit failed");
    }
    if (!outcome.aborted) {
      const std::string issue = check_trace_invariants(run.rows);
      if (!issue.empty()) {
        throw std::logic_error("trace invariant violated: " + issue);
      }
    }

    const std::string path =
        (fs::path(config.out_dir) /
         ("trace_seed" + std::to_string(seed) + ".csv"))
            .string();
    std::ofstream out(path, std::ios::binary);
    out << trace_to_csv(run.rows, config.record_wall_ms);
    out.close();
    result.trace_paths.push_back(path);
    result.outcomes.push_back(outcome);
    all_rows.push_back(std::move(run.rows));
  }

  // summary: per-seed final rows plus accuracy quantiles per checkpoint
  ordered_json summary;
  summary["method"] = config.method;
  summary["problem"] = config.problem;
  summary["seeds"] = config.seeds;
  summary["checkpoints"] = config.checkpoints;
  ordered_json quantiles = ordered_json::object();
  for (const double ckpt : config.checkpoints) {
    std::vector<double> accs;
    for (const auto& rows : all_rows) {
      if (rows.empty()) continue;
      accs.push_back(row_at_checkpoint(rows, ckpt).train_acc);
    }
    ordered_json q;
    if (!accs.empty()) {
      q["min"] = quantile(accs, 0.0);
      q["p25"] = quantile(accs, 0.25);
      q["median"] = quantile(accs, 0.5);
      q["p75"] = quantile(accs, 0.75);
      q["max"] = quantile(accs, 1.0);
    }
    char key[40];
    std::snprintf(key, sizeof(key), "%g", ckpt);
    quantiles[key] = q;
  }
  summary["quantiles"] = quantiles;
  ordered_json aborts = ordered_json::array();
  for (const SeedOutcome& o : result.outcomes) {
    if (o.aborted) {
      aborts.push_back({{"seed", o.seed}, {"reason", o.reason}});
    }
  }
  summary["aborts"] = aborts;
  ordered_json finals = ordered_json::array();
  for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
    const SeedOutcome& o = result.outcomes[i];
    finals.push_back({{"seed", o.seed},
                      {"iter", o.final_row.iter},
                      {"epochs", o.final_row.epochs},
                      {"loss", o.final_row.loss},
                      {"train_acc", o.final_row.train_acc},
                      {"test_acc", o.final_row.test_acc},
                      {"grad_norm", o.final_row.grad_norm},
                      {"max_approx_norm", o.max_approx_norm}});
  }
  summary["final"] = finals;

  result.summary_path =
      (fs::path(config.out_dir) / "summary.json").string();
  std::ofstream sout(result.summary_path, std::ios::binary);
  sout << summary.dump(2) << "\n";
  sout.close();

  const bool all_aborted = std::all_of(
      result.outcomes.begin(), result.outcomes.end(),
      [](const SeedOutcome& o) { return o.aborted; });
  result.exit_code = all_aborted ? 2 : 0;
  return result;
}

const TraceRow& row_at_checkpoint(const std::vector<TraceRow>& rows,
                                  double limit) {
  const TraceRow* best = &rows.front();
  for (const TraceRow& r : rows) {
    if (r.epochs <= limit) best = &r;
  }
  return *best;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values.front();
  const double h = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] -
                                                       values[lo]);
}

namespace {

struct ParsedTrace {
  std::vector<TraceRow> rows;
};

bool parse_trace_csv(const std::string& path, ParsedTrace* out) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line)) return false;
  if (line != kTraceHeader) return false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRow r;
    double accepted = 0.0;
    double sampled = 0.0;
    double iter = 0.0;
    const int got = std::sscanf(
        line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &iter,
        &r.epochs, &r.wall_ms, &r.loss, &r.train_acc, &r.test_acc,
        &r.grad_norm, &r.step_or_delta, &accepted, &sampled);
    if (got != 10) return false;
    r.iter = static_cast<std::int64_t>(iter);
    r.pairs_accepted = static_cast<std::int64_t>(accepted);
    r.pairs_sampled = static_cast<std::int64_t>(sampled);
    out->rows.push_back(r);
  }
  return true;
}

}  // namespace

std::string compare_report(const std::vector<std::string>& trace_dirs) {
  struct Entry {
    std::string method;
    std::uint64_t seed;
    double checkpoint;
    double accuracy;
    double loss;
  };
  std::vector<Entry> entries;

  for (const std::string& dir : trace_dirs) {
    const fs::path summary_path = fs::path(dir) / "summary.json";
    ordered_json summary;
    try {
      std::ifstream in(summary_path);
      if (!in) throw DatasetError("missing summary");
      in >> summary;
    } catch (const std::exception&) {
      std::cerr << "warning: skipping " << dir << " (missing or corrupt summary.json)\n";
      continue;
    }
    std::string method;
    std::vector<std::uint64_t> seeds;
    std::vector<double> checkpoints;
    try {
      method = summary.at("method").get<std::string>();
      seeds = summary.at("seeds").get<std::vector<std::uint64_t>>();
      checkpoints = summary.at("checkpoints").get<std::vector<double>>();
    } catch (const std::exception&) {
      std::cerr << "warning: skipping " << dir << " (summary schema)\n";
      continue;
    }
    for (const std::uint64_t seed : seeds) {
      const fs::path trace_path =
          fs::path(dir) / ("trace_seed" + std::to_string(seed) + ".csv");
      ParsedTrace parsed;
      if (!parse_trace_csv(trace_path.string(), &parsed) ||
          parsed.rows.empty()) {
        std::cerr << "warning: skipping " << trace_path.string()
                  << " (missing or corrupt trace)\n";
        continue;
      }
      for (const double ckpt : checkpoints) {
        const TraceRow& row = row_at_checkpoint(parsed.rows, ckpt);
        entries.push_back({method, seed, ckpt, row.train_acc, row.loss});
      }
    }
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.checkpoint < b.checkpoint;
  });

  std::string out = "method,seed,checkpoint_epochs,accuracy,loss\n";
  for (const Entry& e : entries) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%llu,%.17g,%.17g,%.17g\n",
                  e.method.c_str(), static_cast<unsigned long long>(e.seed),
                  e.checkpoint, e.accuracy, e.loss);
    out += buf;
  }
  return out;
}

}  // namespace sqn

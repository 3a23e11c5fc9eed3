#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sqn/bfgs.hpp"
#include "sqn/harness.hpp"
#include "test_support.hpp"

using namespace sqn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("toy dataset geometry") {
  const Dataset data = gen_toy_dataset(7);
  REQUIRE(data.size() == 100);
  int class0 = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = norm2(data.inputs[i]);
    if (data.labels[i] == 0) {
      ++class0;
      CHECK(r <= 0.35);
    } else {
      CHECK(r >= 0.6);
      CHECK(r <= 1.0);
    }
  }
  CHECK(class0 == 50);
  CHECK(gen_toy_dataset(7).inputs == data.inputs);  // deterministic
}

TEST_CASE("toy dataset is not linearly separable") {
  // train logistic regression (affine + softmax) to convergence; a linear
  // boundary cannot split concentric classes
  const Dataset data = gen_toy_dataset(7);
  MlpSpec spec;
  spec.layer_sizes = {2, 2};
  const MlpObjective obj(spec, data);
  CountingObjective counting(obj);
  TraceRecorder trace([&](const Vector& w) {
    const LossAccuracy la = loss_accuracy(spec, w, data);
    return TraceEval{la.loss, la.accuracy, -1.0};
  });
  Budget budget;
  budget.max_iters = 500;
  budget.grad_tol = 1e-10;
  const RunResult res = classical_lbfgs_run(counting, Vector(6, 0.0), 20,
                                            StepRule{}, budget, trace);
  CHECK(loss_accuracy(spec, res.w_final, data).accuracy < 1.0);
}

TEST_CASE("csv round trip and errors") {
  TempDir tmp("sqn_csv_test");
  SUBCASE("well-formed file") {
    const fs::path p = tmp.path / "ok.csv";
    std::ofstream(p) << "0.5,1.5,0\n-1,2,1\n0,0,0\n";
    const Dataset d = load_csv_dataset(p.string(), 2, false);
    CHECK(d.size() == 3);
    CHECK(d.labels[1] == 1);
    CHECK(d.inputs[0][1] == 1.5);
  }
  SUBCASE("round trip through dataset_to_csv") {
    const Dataset d = gen_toy_dataset(3);
    const fs::path p = tmp.path / "toy.csv";
    std::ofstream(p, std::ios::binary) << dataset_to_csv(d);
    const Dataset back = load_csv_dataset(p.string(), 2, false);
    REQUIRE(back.size() == d.size());
    CHECK(back.inputs == d.inputs);
    CHECK(back.labels == d.labels);
  }
  SUBCASE("non-numeric feature names the line") {
    const fs::path p = tmp.path / "bad.csv";
    std::ofstream(p) << "0.5,1.5,0\nx,2,1\n";
    try {
      load_csv_dataset(p.string(), 2, false);
      FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("empty file") {
    const fs::path p = tmp.path / "empty.csv";
    std::ofstream(p) << "";
    CHECK_THROWS_AS(load_csv_dataset(p.string(), 2, false), DatasetError);
  }
  SUBCASE("header skipping") {
    const fs::path p = tmp.path / "hdr.csv";
    std::ofstream(p) << "x,y,label\n1,2,0\n";
    const Dataset d = load_csv_dataset(p.string(), 2, true);
    CHECK(d.size() == 1);
  }
}

TEST_CASE("build_network parameter counts") {
  CHECK(build_network("small").param_count() == 36);
  CHECK(build_network("medium").param_count() == 176);
  CHECK(build_network("large").param_count() == 908);
  CHECK_THROWS_AS(build_network("huge"), ConfigError);
}

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_run_config(R"({
    "method": "s-lsr1",
    "problem": "toy-small",
    "seeds": [1, 2, 3],
    "budget": {"max_epochs": 50, "grad_tol": 1e-6},
    "memory": 8,
    "option": "I"
  })");
  CHECK(cfg.method == "s-lsr1");
  CHECK(cfg.seeds.size() == 3);
  CHECK(cfg.budget.max_epochs == 50.0);
  CHECK(cfg.qn.memory == 8);
  CHECK(cfg.qn.option == SampleOption::I);
  CHECK(cfg.qn.radius == 0.01);  // option I default radius

  CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"method":"foo","problem":"toy-small"})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"method":"gd","problem":"nowhere"})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"method":"gd","problem":"toy-small","seeds":[]})"),
      ConfigError);
}

TEST_CASE("run_experiment writes traces and a summary") {
  TempDir tmp("sqn_exp_test");
  RunConfig cfg;
  cfg.method = "s-lsr1";
  cfg.problem = "toy-small";
  cfg.out_dir = (tmp.path / "out").string();
  cfg.seeds = {1, 2, 3};
  cfg.budget.max_epochs = 8;
  cfg.budget.max_iters = 50;
  cfg.checkpoints = {2, 4, 8};

  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.exit_code == 0);
  REQUIRE(res.trace_paths.size() == 3);
  for (const std::string& p : res.trace_paths) CHECK(fs::exists(p));
  CHECK(fs::exists(res.summary_path));

  const std::string summary = slurp(res.summary_path);
  CHECK(summary.find("\"method\": \"s-lsr1\"") != std::string::npos);
  CHECK(summary.find("\"quantiles\"") != std::string::npos);
  CHECK(summary.find("\"median\"") != std::string::npos);

  const std::string trace = slurp(res.trace_paths[0]);
  CHECK(trace.rfind(kTraceHeader, 0) == 0);
}

TEST_CASE("zero epoch budget yields the initial row only") {
  TempDir tmp("sqn_zero_budget");
  RunConfig cfg;
  cfg.method = "gd";
  cfg.problem = "toy-small";
  cfg.out_dir = (tmp.path / "out").string();
  cfg.seeds = {5};
  cfg.budget.max_epochs = 0;

  const ExperimentResult res = run_experiment(cfg);
  const std::string trace = slurp(res.trace_paths[0]);
  // header plus exactly one data line
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 2);
}

TEST_CASE("reruns are byte identical") {
  TempDir tmp("sqn_repro");
  RunConfig cfg;
  cfg.method = "s-lbfgs";
  cfg.problem = "toy-small";
  cfg.seeds = {11};
  cfg.budget.max_epochs = 6;
  cfg.budget.max_iters = 30;

  cfg.out_dir = (tmp.path / "a").string();
  const ExperimentResult r1 = run_experiment(cfg);
  cfg.out_dir = (tmp.path / "b").string();
  const ExperimentResult r2 = run_experiment(cfg);
  CHECK(slurp(r1.trace_paths[0]) == slurp(r2.trace_paths[0]));
  CHECK(slurp(r1.summary_path) == slurp(r2.summary_path));
}

TEST_CASE("quadratic problem id dispatches") {
  TempDir tmp("sqn_quad");
  RunConfig cfg;
  cfg.method = "newton-tr-cg";
  cfg.problem = "quadratic:6";
  cfg.out_dir = (tmp.path / "out").string();
  cfg.seeds = {1};
  cfg.budget.max_iters = 20;
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.exit_code == 0);
  CHECK(!res.outcomes[0].aborted);
  CHECK(res.outcomes[0].final_row.grad_norm <= 1e-8);
}

TEST_CASE("compare report shape and ordering") {
  TempDir tmp("sqn_compare");
  RunConfig cfg;
  cfg.method = "gd";
  cfg.problem = "toy-small";
  cfg.out_dir = (tmp.path / "gd").string();
  cfg.seeds = {1, 2};
  cfg.budget.max_epochs = 4;
  cfg.checkpoints = {2, 4};
  run_experiment(cfg);
  cfg.method = "adam";
  cfg.out_dir = (tmp.path / "adam").string();
  run_experiment(cfg);

  const std::string csv = compare_report(
      {(tmp.path / "gd").string(), (tmp.path / "adam").string()});
  std::vector<std::string> lines;
  std::stringstream ss(csv);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 2 * 2 * 2);  // header + methods x seeds x ckpts
  CHECK(lines[0] == "method,seed,checkpoint_epochs,accuracy,loss");
  CHECK(lines[1].rfind("adam,1,2,", 0) == 0);  // adam sorts before gd
  CHECK(lines[3].rfind("adam,2,2,", 0) == 0);
  CHECK(lines[5].rfind("gd,1,", 0) == 0);

  // empty directory: header only, with a warning on stderr
  TempDir empty("sqn_compare_empty");
  const std::string none = compare_report({empty.path.string()});
  CHECK(none == "method,seed,checkpoint_epochs,accuracy,loss\n");
}

TEST_CASE("trace rows hold the monotonicity invariants in experiments") {
  TempDir tmp("sqn_invariants");
  RunConfig cfg;
  cfg.method = "lbfgs";
  cfg.problem = "toy-small";
  cfg.out_dir = (tmp.path / "out").string();
  cfg.seeds = {3};
  cfg.budget.max_epochs = 10;
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.exit_code == 0);
  // run_experiment already audits; parse the file back as a double check
  std::ifstream in(res.trace_paths[0]);
  std::string line;
  std::getline(in, line);
  double prev_epochs = -1.0;
  long prev_iter = -1;
  while (std::getline(in, line)) {
    long iter = 0;
    double epochs = 0.0;
    REQUIRE(std::sscanf(line.c_str(), "%ld,%lf", &iter, &epochs) == 2);
    CHECK(iter > prev_iter);
    CHECK(epochs >= prev_epochs);
    prev_iter = iter;
    prev_epochs = epochs;
  }
}

TEST_CASE("exit code 2 when every seed aborts") {
  TempDir tmp("sqn_all_abort");
  RunConfig cfg;
  cfg.method = "gd";
  cfg.problem = "quadratic:4";
  cfg.quad_cond = 100.0;
  cfg.out_dir = (tmp.path / "out").string();
  cfg.seeds = {1, 2};
  cfg.step.mode = StepMode::constant;
  cfg.step.alpha = 1.0;  // alpha * lambda_max = 100: diverges
  cfg.budget.max_iters = 100000;
  cfg.budget.max_epochs = 1e9;
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.exit_code == 2);
  for (const SeedOutcome& o : res.outcomes) CHECK(o.aborted);
  // summary records the reasons
  const std::string summary = slurp(res.summary_path);
  CHECK(summary.find("\"aborts\"") != std::string::npos);
  CHECK(summary.find("non-finite") != std::string::npos);
}

TEST_CASE("initial points are reproducible per seed") {
  RunConfig cfg;
  cfg.method = "gd";
  cfg.problem = "quadratic:4";
  const ProblemBundle problem = make_problem(cfg);
  CHECK(initial_point(cfg, problem, 9) == initial_point(cfg, problem, 9));
  CHECK(initial_point(cfg, problem, 9) != initial_point(cfg, problem, 10));
}

TEST_CASE("quantile interpolation") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.25) == doctest::Approx(1.25));
  CHECK(quantile({5.0}, 0.75) == 5.0);
  CHECK(quantile({1.0, 9.0}, 0.0) == 1.0);
  CHECK(quantile({1.0, 9.0}, 1.0) == 9.0);
}

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sqn/bfgs.hpp"
#include "sqn/dataset.hpp"
#include "sqn/firstorder.hpp"
#include "sqn/mlp.hpp"
#include "sqn/trace.hpp"
#include "sqn/trustregion.hpp"

namespace sqn {

/// 100 points in 2D, not linearly separable: class 0 uniform in the disk of
/// radius 0.35 around the origin, class 1 uniform in the annulus [0.6, 1.0].
/// 50 points per class, deterministic given the seed.
Dataset gen_toy_dataset(std::uint64_t seed);

/// Rows of n_features floats followed by one integer label. Errors name the
/// offending line (1-based).
Dataset load_csv_dataset(const std::string& path, std::size_t n_features,
                         bool has_header);

/// Serializes a dataset in the same CSV layout load_csv_dataset reads.
std::string dataset_to_csv(const Dataset& data);

/// Named toy networks. The published structures list five weight layers; a
/// final 2-unit affine output layer is appended so the parameter counts come
/// out at 36 / 176 / 908.
MlpSpec build_network(const std::string& name);

struct RunConfig {
  std::string method;   // gd|adam|bfgs|lbfgs|sr1|lsr1|s-lbfgs|s-lsr1|newton-tr-cg
  std::string problem;  // toy-small|toy-medium|toy-large|csv:<path>|quadratic:<d>
  std::string out_dir;
  std::vector<std::uint64_t> seeds = {1};
  std::uint64_t data_seed = 7;
  Budget budget;
  std::vector<double> checkpoints = {10, 25, 50, 100};
  bool record_wall_ms = false;
  /// Uniform init half-width. Small values leave deep sigmoid stacks in
  /// their linear regime where every method stalls on the ln(2) plateau;
  /// 3.0 keeps the toy networks trainable.
  double init_scale = 3.0;

  SampledQnOptions qn;      // memory / radius / option / eps / gamma
  StepRule step;            // armijo or constant step for LS methods
  TrustRegionParams tr;
  AdamHyper adam;
  bool adam_lr_grid = false;  // out-of-band lr tuning per seed

  // csv:<path> extras
  std::size_t csv_features = 2;
  bool csv_has_header = false;
  std::string csv_test_path;
  std::vector<int> layers;  // optional custom layer sizes for csv problems

  // quadratic:<d> extras
  double quad_cond = 100.0;

  void validate() const;
};

/// Parses the JSON mirror of RunConfig. Throws ConfigError on malformed
/// input, unknown method, or invalid budgets.
RunConfig parse_run_config(const std::string& json_text);

/// The objective and metadata behind a problem id.
struct ProblemBundle {
  std::unique_ptr<Objective> objective;
  const StochasticObjective* stochastic = nullptr;  // null for quadratics
  bool is_mlp = false;
  MlpSpec spec;   // valid when is_mlp
  Dataset train;  // valid when is_mlp
  Dataset test;   // may be empty
  std::size_t dimension = 0;
};

ProblemBundle make_problem(const RunConfig& config);

/// Initial iterate for one seed: MLP problems use init_params, quadratics a
/// uniform draw of the same scale.
Vector initial_point(const RunConfig& config, const ProblemBundle& problem,
                     std::uint64_t seed);

/// Dispatches one seed of the configured method. The recorder must carry the
/// problem's diagnostic evaluator.
RunResult dispatch_run(const RunConfig& config, const ProblemBundle& problem,
                       CountingObjective& counting, const Vector& w0,
                       std::uint64_t seed, TraceRecorder& trace);

TraceRecorder::Evaluator make_trace_evaluator(const ProblemBundle& problem);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string reason;
  TraceRow final_row;
  double max_approx_norm = 0.0;
};

struct ExperimentResult {
  std::vector<SeedOutcome> outcomes;
  std::vector<std::string> trace_paths;
  std::string summary_path;
  int exit_code = 0;  // 0 ok, 2 when every seed aborted
};

/// Runs every seed, writes one trace CSV per seed plus summary.json into
/// out_dir, and audits the epoch meter and trace invariants of each run.
ExperimentResult run_experiment(const RunConfig& config);

/// Long-format comparison over trace directories written by run_experiment:
/// `method,seed,checkpoint_epochs,accuracy,loss`, ordered by (method, seed,
/// checkpoint). Missing or corrupt inputs are skipped with a warning on
/// stderr.
std::string compare_report(const std::vector<std::string>& trace_dirs);

/// Accuracy/loss at a budget checkpoint: the last row with epochs <= limit,
/// or the first row when none qualifies.
const TraceRow& row_at_checkpoint(const std::vector<TraceRow>& rows,
                                  double limit);

/// Linear-interpolation quantile of a sample (p in [0,1]).
double quantile(std::vector<double> values, double p);

}  // namespace sqn

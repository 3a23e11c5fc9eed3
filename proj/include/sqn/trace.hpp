#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sqn/linalg.hpp"

namespace sqn {

/// One benchmark log record. test_acc is -1 when there is no test split;
/// train_acc/test_acc are -1 for problems without a classification notion.
struct TraceRow {
  std::int64_t iter = 0;
  double epochs = 0.0;
  double wall_ms = 0.0;
  double loss = 0.0;
  double train_acc = -1.0;
  double test_acc = -1.0;
  double grad_norm = 0.0;
  double step_or_delta = 0.0;
  std::int64_t pairs_accepted = 0;
  std::int64_t pairs_sampled = 0;
};

inline constexpr const char* kTraceHeader =
    "iter,epochs,wall_ms,loss,train_acc,test_acc,grad_norm,step_or_delta,"
    "pairs_accepted,pairs_sampled";

/// Diagnostic quantities for a trace row, computed outside the epoch meter.
struct TraceEval {
  double loss = 0.0;
  double train_acc = -1.0;
  double test_acc = -1.0;
};

/// Collects rows during a run. The evaluator computes loss/accuracy columns
/// from the iterate without charging epochs.
class TraceRecorder {
 public:
  using Evaluator = std::function<TraceEval(const Vector& w)>;

  explicit TraceRecorder(Evaluator evaluator)
      : evaluator_(std::move(evaluator)),
        start_(std::chrono::steady_clock::now()) {}

  /// Appends a row; returns false when any field came out non-finite, in
  /// which case the caller must flag the run as aborted.
  bool log(std::int64_t iter, double epochs, const Vector& w, double grad_norm,
           double step_or_delta, std::int64_t pairs_accepted,
           std::int64_t pairs_sampled) {
    const TraceEval ev = evaluator_(w);
    TraceRow row;
    row.iter = iter;
    row.epochs = epochs;
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
    row.loss = ev.loss;
    row.train_acc = ev.train_acc;
    row.test_acc = ev.test_acc;
    row.grad_norm = grad_norm;
    row.step_or_delta = step_or_delta;
    row.pairs_accepted = pairs_accepted;
    row.pairs_sampled = pairs_sampled;
    rows_.push_back(row);
    return std::isfinite(row.loss) && std::isfinite(row.train_acc) &&
           std::isfinite(row.test_acc) && std::isfinite(row.grad_norm) &&
           std::isfinite(row.step_or_delta) && std::isfinite(row.epochs);
  }

  const std::vector<TraceRow>& rows() const { return rows_; }

 private:
  Evaluator evaluator_;
  std::chrono::steady_clock::time_point start_;
  std::vector<TraceRow> rows_;
};

/// Stop conditions shared by every runner. A runner stops before an
/// iteration once any bound is reached; work inside an iteration is never
/// cut short, so epochs may overshoot max_epochs by one iteration's cost.
struct Budget {
  double max_epochs = std::numeric_limits<double>::infinity();
  std::int64_t max_iters = std::numeric_limits<std::int64_t>::max();
  double grad_tol = 1e-8;
};

struct RunResult {
  std::vector<TraceRow> rows;
  Vector w_final;
  double final_grad_norm = 0.0;
  bool aborted = false;
  std::string abort_reason;
  /// Largest |eigenvalue| estimate seen across approximation probes
  /// (trust-region quasi-Newton runners only; 0 when not probed).
  double max_approx_norm = 0.0;
};

/// Serializes rows in the pinned CSV schema. When write_wall_ms is false the
/// wall_ms column is written as 0 so that traces are byte-reproducible.
std::string trace_to_csv(const std::vector<TraceRow>& rows,
                         bool write_wall_ms = false);

/// Validates monotonicity invariants: iter strictly increasing, epochs
/// non-decreasing, all fields finite. Returns an empty string when fine.
std::string check_trace_invariants(const std::vector<TraceRow>& rows);

}  // namespace sqn

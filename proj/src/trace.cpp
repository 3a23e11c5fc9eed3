#include "sqn/trace.hpp"

#include <cmath>
#include <cstdio>

namespace sqn {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string trace_to_csv(const std::vector<TraceRow>& rows,
                         bool write_wall_ms) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const TraceRow& r : rows) {
    out += std::to_string(r.iter);
    out += ',';
    append_double(out, r.epochs);
    out += ',';
    append_double(out, write_wall_ms ? r.wall_ms : 0.0);
    out += ',';
    append_double(out, r.loss);
    out += ',';
    append_double(out, r.train_acc);
    out += ',';
    append_double(out, r.test_acc);
    out += ',';
    append_double(out, r.grad_norm);
    out += ',';
    append_double(out, r.step_or_delta);
    out += ',';
    out += std::to_string(r.pairs_accepted);
    out += ',';
    out += std::to_string(r.pairs_sampled);
    out += '\n';
  }
  return out;
}

std::string check_trace_invariants(const std::vector<TraceRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TraceRow& r = rows[i];
    const bool finite = std::isfinite(r.epochs) && std::isfinite(r.loss) &&
                        std::isfinite(r.train_acc) &&
                        std::isfinite(r.test_acc) &&
                        std::isfinite(r.grad_norm) &&
                        std::isfinite(r.step_or_delta);
    if (!finite) return "non-finite field in row " + std::to_string(i);
    if (i > 0) {
      if (r.iter <= rows[i - 1].iter) {
        return "iter not strictly increasing at row " + std::to_string(i);
      }
      if (r.epochs < rows[i - 1].epochs) {
        return "epochs decreased at row " + std::to_string(i);
      }
    }
  }
  return {};
}

}  // namespace sqn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqn/linalg.hpp"

namespace sqn {

/// Full-batch objective contract. Implementations are immutable after
/// construction and all evaluations are pure, so instances may be shared
/// across concurrent runs. Cost accounting is not done here; runs wrap the
/// objective in a CountingObjective.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(const Vector& w) const = 0;
  virtual Vector gradient(const Vector& w) const = 0;
  virtual Vector hvp(const Vector& w, const Vector& v) const = 0;

  /// Column-wise Hessian products. The default loops hvp; implementations
  /// may batch internally but must match column-wise hvp to 1e-12.
  virtual std::vector<Vector> hvp_batch(const Vector& w,
                                        const std::vector<Vector>& cols) const;
};

/// Optional capability: per-sample gradients for mini-batch methods.
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;
  virtual std::size_t sample_count() const = 0;
  /// Mean gradient over the given sample indices.
  virtual Vector gradient_batch(const Vector& w,
                                std::span<const int> indices) const = 0;
};

/// Epoch ledger. One epoch is one full pass of access over the data: a
/// value, gradient, hvp, or batched-hvp evaluation each costs exactly 1;
/// a mini-batch gradient over b of n samples costs b/n. The running total
/// is kept alongside per-category counters so an audit can recompute it.
class EpochMeter {
 public:
  void charge_value() { ++values_; }
  void charge_gradient() { ++gradients_; }
  void charge_hvp() { ++hvps_; }
  void charge_hvp_batch() { ++hvp_batches_; }
  void charge_samples(std::int64_t batch, std::int64_t total) {
    samples_ += batch;
    sample_total_ = total;
  }

  double epochs() const {
    double e = static_cast<double>(values_ + gradients_ + hvps_ + hvp_batches_);
    if (sample_total_ > 0) {
      e += static_cast<double>(samples_) / static_cast<double>(sample_total_);
    }
    return e;
  }

  std::int64_t values() const { return values_; }
  std::int64_t gradients() const { return gradients_; }
  std::int64_t hvps() const { return hvps_; }
  std::int64_t hvp_batches() const { return hvp_batches_; }
  std::int64_t samples() const { return samples_; }

  /// Audit: recomputes the total from the invocation counters and compares
  /// with epochs(). The two agree by construction unless a charge site is
  /// buggy, which is exactly what the audit exists to catch.
  bool audit() const {
    const double recomputed =
        static_cast<double>(values_) + static_cast<double>(gradients_) +
        static_cast<double>(hvps_) + static_cast<double>(hvp_batches_) +
        (sample_total_ > 0 ? static_cast<double>(samples_) /
                                 static_cast<double>(sample_total_)
                           : 0.0);
    return recomputed == epochs();
  }

 private:
  std::int64_t values_ = 0;
  std::int64_t gradients_ = 0;
  std::int64_t hvps_ = 0;
  std::int64_t hvp_batches_ = 0;
  std::int64_t samples_ = 0;
  std::int64_t sample_total_ = 0;
};

/// Routes every data-touching evaluation through the epoch meter. Runners
/// only ever see this wrapper; diagnostic evaluations (trace loss/accuracy
/// columns) deliberately bypass it by using the raw objective.
class CountingObjective {
 public:
  explicit CountingObjective(const Objective& inner,
                             const StochasticObjective* stochastic = nullptr)
      : inner_(&inner), stochastic_(stochastic) {}

  std::size_t dimension() const { return inner_->dimension(); }

  double value(const Vector& w) {
    meter_.charge_value();
    return inner_->value(w);
  }
  Vector gradient(const Vector& w) {
    meter_.charge_gradient();
    return inner_->gradient(w);
  }
  Vector hvp(const Vector& w, const Vector& v) {
    meter_.charge_hvp();
    return inner_->hvp(w, v);
  }
  std::vector<Vector> hvp_batch(const Vector& w,
                                const std::vector<Vector>& cols) {
    meter_.charge_hvp_batch();
    return inner_->hvp_batch(w, cols);
  }
  Vector gradient_batch(const Vector& w, std::span<const int> indices) {
    if (stochastic_ == nullptr) {
      throw ConfigError("objective has no mini-batch capability");
    }
    meter_.charge_samples(static_cast<std::int64_t>(indices.size()),
                          static_cast<std::int64_t>(
                              stochastic_->sample_count()));
    return stochastic_->gradient_batch(w, indices);
  }

  bool stochastic() const { return stochastic_ != nullptr; }
  std::size_t sample_count() const {
    return stochastic_ != nullptr ? stochastic_->sample_count() : 1;
  }

  const EpochMeter& meter() const { return meter_; }
  const Objective& inner() const { return *inner_; }

 private:
  const Objective* inner_;
  const StochasticObjective* stochastic_;
  EpochMeter meter_;
};

/// Dense Hessian by basis-vector Hessian products, symmetrized. Guarded to
/// keep dense storage honest at desk scale. Does not charge epochs (callers
/// are diagnostics and tests).
Matrix full_hessian(const Objective& obj, const Vector& w,
                    std::size_t dim_guard = 4096);

}  // namespace sqn

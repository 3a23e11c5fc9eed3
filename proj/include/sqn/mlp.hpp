#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqn/dataset.hpp"
#include "sqn/objective.hpp"

namespace sqn {

/// Dense feed-forward classifier description. layer_sizes lists unit counts
/// from input to output (at least two entries). Every layer but the last
/// applies a sigmoid; the last layer is affine and feeds softmax
/// cross-entropy.
///
/// Parameter layout in the flat vector, in layer order: the weight matrix of
/// layer l, row-major (rows = layer_sizes[l+1], cols = layer_sizes[l]),
/// followed by its bias vector.
struct MlpSpec {
  std::vector<int> layer_sizes;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  std::size_t weight_layers() const { return layer_sizes.size() - 1; }
  std::size_t param_count() const;

  void validate() const;
};

/// Uniform entries on [-scale, scale] from a splitmix64 stream seeded with
/// `seed`. Deterministic given (spec, seed, scale).
Vector init_params(const MlpSpec& spec, std::uint64_t seed, double scale);

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean softmax cross-entropy and argmax accuracy (ties broken by the lowest
/// class index). Forward pass only; does not touch the epoch meter, which is
/// what makes it usable for trace columns.
LossAccuracy loss_accuracy(const MlpSpec& spec, const Vector& w,
                           const Dataset& data);

/// Full-batch MLP objective. value/gradient by reverse-mode accumulation;
/// hvp by forward-over-reverse (the backward pass run in dual-number
/// arithmetic), so Hessian products are exact to rounding.
class MlpObjective final : public Objective, public StochasticObjective {
 public:
  MlpObjective(MlpSpec spec, Dataset data);

  std::size_t dimension() const override { return spec_.param_count(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  Vector hvp(const Vector& w, const Vector& v) const override;

  std::size_t sample_count() const override { return data_.size(); }
  Vector gradient_batch(const Vector& w,
                        std::span<const int> indices) const override;

  const MlpSpec& spec() const { return spec_; }
  const Dataset& data() const { return data_; }

 private:
  MlpSpec spec_;
  Dataset data_;
};

}  // namespace sqn

#pragma once

#include <optional>
#include <vector>

#include "sqn/linalg.hpp"

namespace sqn {

/// Labeled classification data. Inputs are dense rows of equal width; labels
/// are class indices in [0, class_count).
struct Dataset {
  std::vector<Vector> inputs;
  std::vector<int> labels;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_dim() const {
    return inputs.empty() ? 0 : inputs.front().size();
  }
  int class_count() const;

  /// Throws DatasetError on empty data, ragged rows, non-finite inputs, or
  /// negative labels; if expected_classes > 0, labels must fall below it.
  void validate(int expected_classes = 0) const;
};

}  // namespace sqn

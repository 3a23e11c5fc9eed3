#include "sqn/dataset.hpp"

#include <algorithm>
#include <string>

#include "sqn/errors.hpp"

namespace sqn {

int Dataset::class_count() const {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return m + 1;
}

void Dataset::validate(int expected_classes) const {
  if (inputs.empty()) throw DatasetError("dataset is empty");
  if (inputs.size() != labels.size()) {
    throw DatasetError("dataset input/label count mismatch");
  }
  const std::size_t dim = inputs.front().size();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != dim) {
      throw DatasetError("ragged dataset row " + std::to_string(i));
    }
    if (!all_finite(inputs[i])) {
      throw DatasetError("non-finite input in row " + std::to_string(i));
    }
    if (labels[i] < 0) {
      throw DatasetError("negative label in row " + std::to_string(i));
    }
    if (expected_classes > 0 && labels[i] >= expected_classes) {
      throw DatasetError("label out of range in row " + std::to_string(i));
    }
  }
}

}  // namespace sqn

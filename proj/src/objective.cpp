#include "sqn/objective.hpp"

namespace sqn {

std::vector<Vector> Objective::hvp_batch(const Vector& w,
                                         const std::vector<Vector>& cols) const {
  std::vector<Vector> out;
  out.reserve(cols.size());
  for (const Vector& c : cols) out.push_back(hvp(w, c));
  return out;
}

Matrix full_hessian(const Objective& obj, const Vector& w,
                    std::size_t dim_guard) {
  const std::size_t d = obj.dimension();
  if (d > dim_guard) {
    throw DimensionError("full_hessian dimension guard exceeded");
  }
  Matrix h(d, d);
  Vector e(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    e[j] = 1.0;
    const Vector col = obj.hvp(w, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < d; ++i) h(i, j) = col[i];
  }
  h.symmetrize();
  return h;
}

}  // namespace sqn

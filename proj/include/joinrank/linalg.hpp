#pragma once

#include <limits>

#include "core.hpp"

namespace joinrank {

struct RankInfo {
  std::size_t rank = 0;
  std::size_t nullity = 0;  // columns minus rank
  bool ambiguous = false;
  double gap = 0.0;  // sigma_rank / sigma_{rank+1}, infinite when the tail is exactly zero
  Eigen::VectorXd singular_values;
};

// Numerical rank from singular values. A value is kept when it exceeds 1e-8 * sigma_max;
// the decision is ambiguous when some singular value falls in the grey zone
// [1e-10, 1e-6] * sigma_max and no gap ratio of at least 1e6 separates the kept values
// from the dropped ones.
inline RankInfo numerical_rank(const CMat& M) {
  RankInfo out;
  const std::size_t cols = static_cast<std::size_t>(M.cols());
  if (M.rows() == 0 || M.cols() == 0) {
    out.nullity = cols;
    return out;
  }
  Eigen::JacobiSVD<CMat> svd(M);
  const Eigen::VectorXd s = svd.singularValues();
  out.singular_values = s;
  const double smax = s[0];
  if (smax == 0.0) {
    out.nullity = cols;
    return out;
  }
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(s.size()) && s[static_cast<Index>(r)] > 1e-8 * smax) ++r;
  out.rank = r;
  out.nullity = cols - r;
  if (r < static_cast<std::size_t>(s.size())) {
    const double next = s[static_cast<Index>(r)];
    out.gap = next > 0 ? s[static_cast<Index>(r) - 1] / next : std::numeric_limits<double>::infinity();
  } else {
    out.gap = std::numeric_limits<double>::infinity();
  }
  bool grey = false;
  for (Index i = 0; i < s.size(); ++i)
    if (s[i] >= 1e-10 * smax && s[i] <= 1e-6 * smax) grey = true;
  out.ambiguous = grey && out.gap < 1e6;
  return out;
}

}  // namespace joinrank

#pragma once

#include <optional>

#include "polynomial.hpp"
#include "rng.hpp"

namespace joinrank {

// Affine-linear system A*x - b = 0.
struct LinearSlice {
  CMat A;
  CVec b;
  std::uint64_t seed = 0;

  std::size_t codim() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t num_vars() const { return static_cast<std::size_t>(A.cols()); }

  CVec evaluate(const CVec& x) const { return A * x - b; }

  PolynomialSystem as_system() const {
    std::vector<Polynomial> rows;
    const auto vars = iota_coords(0, num_vars());
    for (Index i = 0; i < A.rows(); ++i) rows.push_back(Polynomial::linear(num_vars(), vars, A.row(i).transpose(), -b[i]));
    return PolynomialSystem(num_vars(), std::move(rows));
  }

  LinearSlice translated(const CVec& direction, double s) const {
    LinearSlice out = *this;
    out.b = b + s * direction;
    return out;
  }

  LinearSlice through(const CVec& p) const {
    LinearSlice out = *this;
    out.b = A * p;
    return out;
  }
};

inline LinearSlice empty_slice(std::size_t num_vars) {
  return LinearSlice{CMat(0, static_cast<Index>(num_vars)), CVec(0), 0};
}

inline LinearSlice stack(const LinearSlice& top, const LinearSlice& bottom) {
  if (top.num_vars() != bottom.num_vars()) throw Error(ErrorKind::Input, "stack: slices over different spaces");
  LinearSlice s;
  s.A.resize(top.A.rows() + bottom.A.rows(), top.A.cols());
  s.A << top.A, bottom.A;
  s.b.resize(top.b.size() + bottom.b.size());
  s.b << top.b, bottom.b;
  s.seed = top.seed ^ splitmix64(bottom.seed);
  return s;
}

inline bool full_row_rank(const CMat& A) {
  if (A.rows() == 0) return true;
  Eigen::JacobiSVD<CMat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() < A.rows()) return false;
  return s[s.size() - 1] > 1e-10 * s[0];
}

// Random slice whose nonzero columns are restricted to `coords`. With `through` given
// (a full-length point), b = A*through so the slice contains it exactly.
inline LinearSlice random_slice_on(std::size_t num_vars, const std::vector<std::size_t>& coords, std::size_t codim,
                                   const std::optional<CVec>& through, Rng& rng) {
  if (codim > coords.size()) throw Error(ErrorKind::Input, "random_slice: codim exceeds number of coordinates");
  if (through && static_cast<std::size_t>(through->size()) != num_vars)
    throw Error(ErrorKind::Input, "random_slice: through-point has wrong length");
  if (codim == 0) return empty_slice(num_vars);
  for (int attempt = 0; attempt < 3; ++attempt) {
    const std::uint64_t seed = rng.next_u64();
    Rng local(seed);
    LinearSlice s;
    s.seed = seed;
    s.A = CMat::Zero(static_cast<Index>(codim), static_cast<Index>(num_vars));
    for (std::size_t i = 0; i < codim; ++i)
      for (auto c : coords) s.A(static_cast<Index>(i), static_cast<Index>(c)) = local.unit_complex();
    if (through)
      s.b = s.A * (*through);
    else
      s.b = local.unit_complex_vector(static_cast<Index>(codim));
    if (full_row_rank(s.A)) return s;
  }
  throw Error(ErrorKind::Internal, "random_slice: rank check failed three times");
}

inline LinearSlice random_slice(std::size_t num_vars, std::size_t codim, const std::optional<CVec>& through, Rng& rng) {
  return random_slice_on(num_vars, iota_coords(0, num_vars), codim, through, rng);
}

}  // namespace joinrank

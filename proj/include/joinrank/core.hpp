#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace joinrank {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Index = Eigen::Index;

enum class ErrorKind {
  Input,
  Precondition,
  Internal,
  EmptyWitness,
  GapAmbiguous,
  GenericFailure,
  EmptyFiber,
  Numerical,
  File,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input: return "InputError";
    case ErrorKind::Precondition: return "PreconditionError";
    case ErrorKind::Internal: return "InternalError";
    case ErrorKind::EmptyWitness: return "EmptyWitness";
    case ErrorKind::GapAmbiguous: return "GapAmbiguous";
    case ErrorKind::GenericFailure: return "GenericFailure";
    case ErrorKind::EmptyFiber: return "EmptyFiber";
    case ErrorKind::Numerical: return "NumericalFailure";
    case ErrorKind::File: return "FileError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline double inf_norm(const CVec& v) {
  double m = 0;
  for (Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

// Distance scaled by the larger of the two magnitudes, as used for deduplication.
inline double relative_distance(const CVec& a, const CVec& b) {
  return (a - b).norm() / (1.0 + std::max(a.norm(), b.norm()));
}

inline CVec restrict_coords(const CVec& x, const std::vector<std::size_t>& coords) {
  CVec out(static_cast<Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) out[static_cast<Index>(i)] = x[static_cast<Index>(coords[i])];
  return out;
}

inline std::vector<std::size_t> iota_coords(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(i);
  return out;
}

}  // namespace joinrank

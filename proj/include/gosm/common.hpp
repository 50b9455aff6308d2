#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gosm {

using Complex = std::complex<double>;
inline constexpr Complex kI{0.0, 1.0};

using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using SpMatC = Eigen::SparseMatrix<Complex>;
using SpMatR = Eigen::SparseMatrix<double>;
using TripletC = Eigen::Triplet<Complex>;
using TripletR = Eigen::Triplet<double>;

/// Linear map on coefficient vectors, applied out-of-place.
using LinearOp = std::function<CVec(const CVec&)>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input breaks a documented precondition.
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// Raised by factorizations and iterative solvers on numerical breakdown.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Whether a coefficient vector lives in a trace space or in its dual.
enum class Role { Primal, Dual };

inline const char* to_string(Role r) { return r == Role::Primal ? "primal" : "dual"; }

/// Real matrix times complex vector without materialising a complex copy of the matrix.
template <class RealMatrix>
CVec real_times(const RealMatrix& m, const CVec& v) {
  RVec re = m * v.real();
  RVec im = m * v.imag();
  CVec out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

/// Runs fn(i) for i in [0, n). Uses worker threads when more than one hardware thread
/// is available; each index must write only to state owned by that index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gosm

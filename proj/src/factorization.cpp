#include "gosm/factorization.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace gosm {

struct SparseLu::Impl {
  Eigen::SparseLU<SpMatC, Eigen::COLAMDOrdering<int>> lu;
};

SparseLu::SparseLu(const SpMatC& matrix) : impl_(std::make_unique<Impl>()), n_(matrix.rows()) {
  if (matrix.rows() != matrix.cols()) throw InvalidInput("SparseLu: matrix is not square");
  SpMatC a = matrix;
  a.makeCompressed();
  impl_->lu.analyzePattern(a);
  impl_->lu.factorize(a);
  if (impl_->lu.info() != Eigen::Success)
    throw NumericalError("SparseLu: factorization failed (" + impl_->lu.lastErrorMessage() + ")");
}

SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;
SparseLu::~SparseLu() = default;

CVec SparseLu::solve(const CVec& rhs) const {
  if (rhs.size() != n_) throw InvalidInput("SparseLu: right-hand side has wrong size");
  return impl_->lu.solve(rhs);
}

CMat SparseLu::solve(const CMat& rhs) const {
  if (rhs.rows() != n_) throw InvalidInput("SparseLu: right-hand side has wrong size");
  return impl_->lu.solve(rhs);
}

struct SparseCholesky::Impl {
  Eigen::SimplicialLLT<SpMatR, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

SparseCholesky::SparseCholesky(const SpMatR& matrix)
    : impl_(std::make_unique<Impl>()), n_(matrix.rows()) {
  if (matrix.rows() != matrix.cols()) throw InvalidInput("SparseCholesky: matrix is not square");
  impl_->llt.compute(matrix);
  if (impl_->llt.info() != Eigen::Success)
    throw NumericalError("SparseCholesky: matrix is not positive definite");
}

SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;
SparseCholesky::~SparseCholesky() = default;

RVec SparseCholesky::solve(const RVec& rhs) const {
  if (rhs.size() != n_) throw InvalidInput("SparseCholesky: right-hand side has wrong size");
  return impl_->llt.solve(rhs);
}

CVec SparseCholesky::solve(const CVec& rhs) const {
  if (rhs.size() != n_) throw InvalidInput("SparseCholesky: right-hand side has wrong size");
  RMat parts(n_, 2);
  parts.col(0) = rhs.real();
  parts.col(1) = rhs.imag();
  RMat x = impl_->llt.solve(parts);
  CVec out(n_);
  out.real() = x.col(0);
  out.imag() = x.col(1);
  return out;
}

RMat SparseCholesky::solve(const RMat& rhs) const {
  if (rhs.rows() != n_) throw InvalidInput("SparseCholesky: right-hand side has wrong size");
  return impl_->llt.solve(rhs);
}

CVec factorize_and_solve(const SpMatC& matrix, const CVec& rhs, double tol) {
  SparseLu lu(matrix);
  CVec x = lu.solve(rhs);
  const double rn = rhs.norm();
  const double res = (matrix * x - rhs).norm();
  if (res > tol * (rn > 0.0 ? rn : 1.0))
    throw NumericalError("factorize_and_solve: residual " + std::to_string(res / (rn > 0 ? rn : 1)) +
                         " exceeds tolerance");
  return x;
}

}  // namespace gosm

#pragma once

#include <memory>

#include "gosm/common.hpp"

namespace gosm {

/// Sparse LU factorization of a complex square matrix, reusable for any number of
/// right-hand sides. Backed by Eigen::SparseLU with COLAMD ordering.
class SparseLu {
public:
  explicit SparseLu(const SpMatC& matrix);
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;
  ~SparseLu();

  CVec solve(const CVec& rhs) const;
  CMat solve(const CMat& rhs) const;
  int size() const { return n_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

/// Sparse Cholesky factorization of a real symmetric positive definite matrix.
/// Complex right-hand sides are solved as two real systems.
class SparseCholesky {
public:
  explicit SparseCholesky(const SpMatR& matrix);
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;
  ~SparseCholesky();

  RVec solve(const RVec& rhs) const;
  CVec solve(const CVec& rhs) const;
  RMat solve(const RMat& rhs) const;
  int size() const { return n_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

/// One-shot helper: factorizes, solves and checks the relative residual against tol.
CVec factorize_and_solve(const SpMatC& matrix, const CVec& rhs, double tol = 1e-10);

}  // namespace gosm

#pragma once

#include <cstdint>
#include <vector>

#include "gosm/common.hpp"
#include "gosm/factorization.hpp"

namespace gosm {

enum class StopReason { Cap, Tolerance, Stagnation };

const char* to_string(StopReason r);

struct PcgOptions {
  int max_iterations = 1000;  ///< cap k on the number of iterations (0 returns x0)
  double rel_tol = 0.0;       ///< stop when ||b - Mx||_P <= rel_tol ||b||_P
  int stagnation_window = 10;  ///< stop when the best residual (already below sqrt(eps)) has not improved for this many steps
};

struct PcgOutcome {
  CVec x;
  int iterations = 0;
  /// Relative preconditioned residual ||b - Mx||_P / ||b||_P before the first iteration and
  /// after each iteration (size iterations + 1).
  std::vector<double> residual_history;
  StopReason stop = StopReason::Cap;
};

/// Preconditioned conjugate gradient for a hermitian positive definite M with hermitian
/// positive definite preconditioner P, started from x0. After k iterations the iterate
/// minimises the M-norm error over x0 + span{r0, PM r0, ..., (PM)^{k-1} r0}, r0 = P(b - M x0).
///
/// Each iteration applies M and P exactly once. The loop also stops once the relative
/// residual drops below 1e2 machine epsilon (round-off floor) or stagnates.
/// Throws NumericalError if a non-positive curvature or preconditioned residual norm shows
/// that M or P is not positive definite.
PcgOutcome pcg(const LinearOp& apply_M, const LinearOp& apply_P, const CVec& b, const CVec& x0,
               const PcgOptions& options);

struct ConditionOptions {
  int dense_threshold = 5000;  ///< dense eigenvalues up to this dimension, Lanczos above
  int lanczos_steps = 300;
  std::uint64_t seed = 12345;
};

struct ConditionEstimate {
  double cond = 1.0;
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  bool approximate = false;  ///< true for Lanczos estimates
};

/// Spectral condition number of a hermitian positive definite operator of the given dimension.
/// Throws NumericalError if a non-positive eigenvalue is found.
ConditionEstimate estimate_condition(const LinearOp& apply_op, int dim,
                                     const ConditionOptions& options = {});

/// Spectral condition number of P M for hermitian positive definite M and P. The Lanczos path
/// works in the M inner product, where P M is self-adjoint.
ConditionEstimate estimate_condition_preconditioned(const LinearOp& apply_M, const LinearOp& apply_P,
                                                    int dim, const ConditionOptions& options = {});

/// Dense matrix of a linear operator, column by column.
CMat dense_matrix(const LinearOp& op, int dim);

}  // namespace gosm

#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "gosm/common.hpp"
#include "gosm/decomp.hpp"
#include "gosm/factorization.hpp"
#include "gosm/fem.hpp"
#include "gosm/impedance.hpp"
#include "gosm/krylov.hpp"

namespace gosm {

/// Result of one approximate exchange: 2 T R p - q with p = PCG_k(x0, R^T q).
struct ExchangeResult {
  SkeletonVector value;  ///< dual
  SingleTrace p;         ///< primal, to be recycled as the next initial guess
  PcgOutcome pcg;
};

/// Skeleton formulation of the decomposed Helmholtz problem: local Robin-type solvers,
/// impedance, exchange operator and right-hand side. Built once, then immutable.
class DdmSystem {
public:
  DdmSystem(const TriMesh& mesh, Partition partition, const HelmholtzProblem& problem,
            const ImpedanceOptions& impedance = {});

  const Partition& partition() const { return partition_; }
  const HelmholtzProblem& problem() const { return problem_; }
  const ImpedanceT& impedance() const { return impedance_; }
  NNPreconditioner preconditioner() const { return {partition_, impedance_}; }
  const ComplexSparseMatrix& local_matrix(int j) const { return local_matrices_[j]; }
  const VolumeTuple& load() const { return load_; }
  /// Right-hand side g = -Pi (2i T B (A - i B^T T B)^{-1} l) of the skeleton equation (dual).
  const SkeletonVector& g() const { return g_; }
  const SpMatR& skeleton_impedance() const { return skeleton_; }

  /// Scattering operator q -> q + 2i T B (A - i B^T T B)^{-1} B^T q, blockwise. dual -> dual.
  SkeletonVector apply_S(const SkeletonVector& q) const;
  /// Dense diagonal block S_j, by one multi-right-hand-side local solve.
  CMat scattering_block(int j) const;
  /// Euclidean adjoint of apply_S (role-free, used by matrix-free spectral estimates).
  SkeletonVector apply_S_adjoint(const SkeletonVector& q) const;
  /// Blockwise 2i T B (A - i B^T T B)^{-1} l.
  SkeletonVector scattered_load() const;
  /// -Pi applied to the scattered load: with this right-hand side the skeleton solution
  /// reconstructs the monodomain solution through u = (A - i B^T T B)^{-1} (B^T q + l).
  SkeletonVector compute_g() const;

  /// (R^T T R) p on the skeleton. primal -> dual.
  SingleTrace apply_skeleton_impedance(const SingleTrace& p) const;
  /// (R^T T R)^{-1} b by sparse Cholesky. dual -> primal.
  SingleTrace solve_skeleton(const SingleTrace& b) const;
  /// Energy norm sqrt(p^H R^T T R p).
  double skeleton_energy_norm(const SingleTrace& p) const;

  /// Pi q = 2 T R (R^T T R)^{-1} R^T q - q. dual -> dual.
  SkeletonVector apply_exchange_exact(const SkeletonVector& q) const;
  /// Euclidean adjoint of the exchange operator (role-free).
  SkeletonVector apply_exchange_adjoint(const SkeletonVector& q) const;
  /// Exchange with the skeleton solve replaced by at most k_max PCG iterations from x0.
  ExchangeResult apply_exchange_approx(const SkeletonVector& q, const SingleTrace& x0, int k_max,
                                       double rel_tol) const;
  /// 2 T R p - q.
  SkeletonVector exchange_from_solution(const SkeletonVector& q, const SingleTrace& p) const;

  /// (Id + Pi S) q.
  SkeletonVector apply_skeleton_operator(const SkeletonVector& q) const;

  /// u = (A - i B^T T B)^{-1} (B^T q + l), blockwise.
  VolumeTuple reconstruct_u(const SkeletonVector& q) const;

private:
  CVec solve_local(int j, const CVec& rhs) const;

  Partition partition_;
  HelmholtzProblem problem_;
  ImpedanceT impedance_;
  std::vector<ComplexSparseMatrix> local_matrices_;  ///< A_j
  std::vector<SparseLu> local_solvers_;              ///< A_j - i B_j^T T_j B_j
  SpMatR skeleton_;
  SparseCholesky skeleton_solver_;
  VolumeTuple load_;
  SkeletonVector g_;
};

/// Dense block-diagonal scattering matrix in the flat multi-trace layout.
CMat dense_scattering(const DdmSystem& system);
/// Dense exchange matrix (real).
RMat dense_exchange(const DdmSystem& system);
/// Dense Id + Pi S.
CMat dense_skeleton_operator(const DdmSystem& system);

/// Reference solution of (Id + Pi S) q = g by dense LU. Throws NumericalError if the
/// T^{-1}-relative residual exceeds 1e-10.
SkeletonVector reference_skeleton_solution(const DdmSystem& system);

enum class ExchangeMode { Exact, Approx };

struct RichardsonConfig {
  double alpha = 0.5;
  ExchangeMode mode = ExchangeMode::Exact;
  bool recycle = true;           ///< approx mode: warm-start PCG with the previous p
  std::optional<int> k_max;      ///< PCG cap; empty means iterate until tolerance or stagnation
  double pcg_rel_tol = 0.0;
  int max_iterations = 1000;
  double target = 1e-10;         ///< stop once the relative error is below this
  int plateau_window = 0;        ///< > 0: stop when this many iterations improve the error by
  double plateau_improvement = 0.01;  ///<   less than this fraction
  double step_tolerance = 0.0;   ///< > 0: stop once ||q_n - q_{n-1}|| <= step_tolerance ||q_n|| (T^{-1})

  void validate() const;
};

struct IterationRecord {
  int n = 0;
  double rel_error = std::numeric_limits<double>::quiet_NaN();  ///< ||q_n - q_inf|| / ||q_inf|| in T^{-1}
  int pcg_iterations = 0;
  double step_norm = 0.0;  ///< ||q_n - q_{n-1}||_{T^{-1}}
  /// ||p_inf - p_n|| in the R^T T R energy, with p_inf the exact skeleton solve (approx mode).
  double inner_error = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceHistory {
  std::vector<IterationRecord> records;

  /// First n with rel_error < target.
  std::optional<int> iterations_to_target(double target) const;
  double min_error() const;
};

/// True when the last `window` iterations improved the error by less than `improvement`
/// (relative), i.e. err[n] > (1 - improvement) err[n - window].
bool plateau_detected(const ConvergenceHistory& history, int window, double improvement);

struct RichardsonResult {
  SkeletonVector q;
  ConvergenceHistory history;
  bool reached_target = false;
  bool plateau = false;
  bool step_converged = false;
};

/// Relaxed Richardson iteration q <- (1 - alpha) q - alpha Pi S q + alpha g from q = 0,
/// with the exchange computed exactly or by (recycled) truncated PCG. When a reference
/// solution is given, the relative T^{-1} error is recorded and used for termination.
/// Throws NumericalError if the relative error exceeds 1e6.
RichardsonResult richardson(const DdmSystem& system, const RichardsonConfig& config,
                            const SkeletonVector* reference = nullptr);

struct GlobalField {
  CVec u;                 ///< nodal values, averaged over the subdomains sharing a vertex
  double max_jump = 0.0;  ///< max |u_j - u_k| over vertices shared by subdomains j and k
};

/// Glues a volume tuple into one nodal field on the original mesh.
GlobalField glue_volume(const Partition& p, const VolumeTuple& u, int n_vertices);

}  // namespace gosm

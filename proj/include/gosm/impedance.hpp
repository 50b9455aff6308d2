#pragma once

#include <vector>

#include "gosm/common.hpp"
#include "gosm/decomp.hpp"
#include "gosm/fem.hpp"

namespace gosm {

/// Energy minimised by the impedance over the layered region.
enum class ImpedanceForm {
  Gradient,  ///< |grad v|^2 + kappa^2 |v|^2 over the region, plus kappa |v|^2 on its inner boundary
  Literal,   ///< (1 + kappa^2) |v|^2 over the region, plus kappa |v|^2 on its inner boundary
};

struct ImpedanceOptions {
  int n_layers = 5;
  ImpedanceForm form = ImpedanceForm::Gradient;
};

/// Near-boundary part of a subdomain: the triangles reached from its boundary within a
/// number of vertex-adjacency rounds.
struct LayeredRegion {
  std::vector<int> triangles;    ///< indices into the subdomain's local triangle list
  LocalMesh mesh;                ///< region mesh; edges off the subdomain boundary are Truncation
  std::vector<int> gamma_local;  ///< region dof of each boundary vertex, in Subdomain::gamma order
};

LayeredRegion build_layered_subdomain(const Partition& p, int j, int n_layers);

/// Dense Schur complement onto the listed dofs of a real SPD matrix.
/// Throws NumericalError if the eliminated block is not positive definite.
RMat schur_complement(const SpMatR& matrix, const std::vector<int>& keep);

/// Impedance block of one subdomain: minimal energy of extensions of a boundary trace
/// into the layered region.
RMat assemble_Tj(const LayeredRegion& region, double kappa, ImpedanceForm form);

/// Block-diagonal symmetric positive definite impedance on the multi-trace space, with
/// Cholesky factors of every block.
class ImpedanceT {
public:
  ImpedanceT(const Partition& p, double kappa, const ImpedanceOptions& options);
  /// From explicit blocks (must be SPD).
  ImpedanceT(std::vector<RMat> blocks, int n_layers);

  int n_blocks() const { return static_cast<int>(blocks_.size()); }
  int n_layers() const { return n_layers_; }
  const RMat& block(int j) const { return blocks_[j]; }
  /// Lower-triangular L with T_j = L L^T.
  const RMat& cholesky_factor(int j) const { return factors_[j]; }

  CVec apply_block(int j, const CVec& v) const;
  CVec apply_inverse_block(int j, const CVec& q) const;

  /// primal -> dual
  SkeletonVector apply(const SkeletonVector& v) const;
  /// dual -> primal
  SkeletonVector apply_inverse(const SkeletonVector& q) const;

  double norm_T(const SkeletonVector& v) const;
  double norm_Tinv(const SkeletonVector& q) const;

private:
  void factorize();
  double checked_sqrt(double sq, double scale) const;

  std::vector<RMat> blocks_;
  std::vector<RMat> factors_;
  int n_layers_ = 0;
};

/// Single-level Neumann-Neumann preconditioner for the assembled skeleton impedance:
/// P b = W R^T T^{-1} R W b with W the inverse multiplicity.
class NNPreconditioner {
public:
  NNPreconditioner(const Partition& p, const ImpedanceT& t);

  /// dual -> primal
  SingleTrace apply(const SingleTrace& b) const;
  CVec apply(const CVec& b) const;

private:
  const Partition* partition_;
  const ImpedanceT* impedance_;
  RVec weights_;
};

/// R^T T R assembled on the skeleton (sparse, SPD).
SpMatR assemble_skeleton_impedance(const Partition& p, const ImpedanceT& t);

}  // namespace gosm

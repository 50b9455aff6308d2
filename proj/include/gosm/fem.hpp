#pragma once

#include <array>
#include <initializer_list>
#include <numbers>
#include <vector>

#include "gosm/common.hpp"
#include "gosm/mesh.hpp"

namespace gosm {

/// Role of a boundary edge of a local (sub)mesh.
enum class EdgeKind {
  Exterior,    ///< lies on the physical boundary, carries the Robin term
  Interface,   ///< shared with another subdomain
  Truncation,  ///< inner boundary of a layered near-boundary region
};

struct LocalEdge {
  std::array<int, 2> v{};
  EdgeKind kind = EdgeKind::Exterior;
};

/// Triangulation of a subset of the global mesh with local vertex numbering.
/// Every edge owned by a single local triangle must appear in boundary_edges.
struct LocalMesh {
  std::vector<int> global_ids;  ///< local vertex -> global vertex, ascending
  std::vector<Point> coords;
  std::vector<std::array<int, 3>> triangles;
  std::vector<LocalEdge> boundary_edges;

  int n_dofs() const { return static_cast<int>(coords.size()); }
};

/// Whole mesh as a local mesh whose boundary edges are all exterior.
LocalMesh whole_mesh(const TriMesh& mesh);

/// Throws InvalidInput if some boundary edge of the triangle set is not listed, or a listed
/// edge is not on the boundary.
void validate_local_mesh(const LocalMesh& mesh);

struct ElementMatrices {
  Eigen::Matrix3d stiffness;
  Eigen::Matrix3d mass;
  /// Edge e joins local vertices e and (e + 1) % 3.
  std::array<Eigen::Matrix2d, 3> edge_mass;
};

/// Closed-form P1 element matrices. Throws InvalidInput on a degenerate triangle.
ElementMatrices element_matrices(const std::array<Point, 3>& verts);

Eigen::Matrix2d edge_mass_matrix(const Point& a, const Point& b);

/// Helmholtz data: wavenumber and plane-wave boundary source exp(i kappa d.x).
struct HelmholtzProblem {
  double kappa = 1.0;
  Point direction{-1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2};
  /// Multiplies the source, used for linearity and zero-data checks.
  Complex amplitude{1.0, 0.0};

  void validate() const;
  Complex source(const Point& x) const;
};

struct ComplexSparseMatrix {
  SpMatC matrix;
  bool symmetric = false;  ///< M == M^T
  bool hermitian = false;  ///< M == M^H
};

/// Checks the symmetry flags entrywise: |(M - M^T)_ij| <= tol * max|M_ij| (and likewise for
/// M^H). Returns false if a set flag does not hold.
bool flags_hold(const ComplexSparseMatrix& m, double tol = 1e-12);

SpMatR assemble_stiffness(const LocalMesh& mesh);
SpMatR assemble_mass(const LocalMesh& mesh);
/// Boundary mass restricted to the edges whose kind is listed.
SpMatR assemble_boundary_mass(const LocalMesh& mesh, std::initializer_list<EdgeKind> kinds);

/// Stiff - kappa^2 Mass - i kappa BoundaryMass(exterior edges); complex symmetric.
ComplexSparseMatrix assemble_subdomain(const LocalMesh& mesh, double kappa);

/// Boundary load of the nodal interpolant of the source over exterior edges.
CVec assemble_load(const LocalMesh& mesh, const HelmholtzProblem& problem);

/// Monodomain P1 solve by sparse LU; checks the relative residual against 1e-10.
CVec solve_global_direct(const TriMesh& mesh, const HelmholtzProblem& problem);

}  // namespace gosm

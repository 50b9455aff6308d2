#include "gosm/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "gosm/factorization.hpp"

namespace gosm {

namespace {

using EdgeKey = std::pair<int, int>;
EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

template <class Fn>
SpMatR assemble_triangles(const LocalMesh& mesh, Fn&& element) {
  std::vector<TripletR> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const Eigen::Matrix3d ke = element(std::array<Point, 3>{mesh.coords[t[0]], mesh.coords[t[1]],
                                                             mesh.coords[t[2]]});
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.emplace_back(t[a], t[b], ke(a, b));
  }
  SpMatR m(mesh.n_dofs(), mesh.n_dofs());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

LocalMesh whole_mesh(const TriMesh& mesh) {
  LocalMesh lm;
  lm.global_ids.resize(mesh.vertices.size());
  for (int i = 0; i < mesh.n_vertices(); ++i) lm.global_ids[i] = i;
  lm.coords = mesh.vertices;
  lm.triangles = mesh.triangles;
  for (const auto& e : mesh.boundary_edges) lm.boundary_edges.push_back({e.v, EdgeKind::Exterior});
  return lm;
}

void validate_local_mesh(const LocalMesh& mesh) {
  if (mesh.global_ids.size() != mesh.coords.size())
    throw InvalidInput("local mesh: global id map and coordinates differ in size");
  std::map<EdgeKey, int> count;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      for (int v : t)
        if (v < 0 || v >= mesh.n_dofs()) throw InvalidInput("local mesh: vertex out of range");
      ++count[key(t[e], t[(e + 1) % 3])];
    }
  std::map<EdgeKey, int> listed;
  for (const auto& e : mesh.boundary_edges) ++listed[key(e.v[0], e.v[1])];
  for (const auto& [edge, n] : count) {
    const auto it = listed.find(edge);
    const int tags = it == listed.end() ? 0 : it->second;
    if (n == 1 && tags != 1)
      throw InvalidInput("local mesh: boundary edge (" + std::to_string(edge.first) + ", " +
                         std::to_string(edge.second) + ") is untagged");
    if (n > 1 && tags != 0) throw InvalidInput("local mesh: interior edge tagged as boundary");
  }
  for (const auto& [edge, n] : listed)
    if (!count.count(edge)) throw InvalidInput("local mesh: tagged edge is not a mesh edge");
}

ElementMatrices element_matrices(const std::array<Point, 3>& p) {
  const double area =
      0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
  const double scale = std::max({std::abs(p[1].x - p[0].x), std::abs(p[1].y - p[0].y),
                                 std::abs(p[2].x - p[0].x), std::abs(p[2].y - p[0].y)});
  if (!(std::abs(area) > 1e-14 * scale * scale)) throw InvalidInput("degenerate triangle");
  const double a = std::abs(area);

  // gradients of barycentric coordinates: grad(lambda_i) = (b_i, c_i) / (2 area)
  std::array<double, 3> b{}, c{};
  for (int i = 0; i < 3; ++i) {
    const Point& pj = p[(i + 1) % 3];
    const Point& pk = p[(i + 2) % 3];
    b[i] = pj.y - pk.y;
    c[i] = pk.x - pj.x;
  }
  ElementMatrices em;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      em.stiffness(i, j) = (b[i] * b[j] + c[i] * c[j]) / (4.0 * a);
      em.mass(i, j) = a / 12.0 * (i == j ? 2.0 : 1.0);
    }
  for (int e = 0; e < 3; ++e) em.edge_mass[e] = edge_mass_matrix(p[e], p[(e + 1) % 3]);
  return em;
}

Eigen::Matrix2d edge_mass_matrix(const Point& a, const Point& b) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  Eigen::Matrix2d m;
  m << 2.0, 1.0, 1.0, 2.0;
  return m * (len / 6.0);
}

void HelmholtzProblem::validate() const {
  if (!(kappa > 0.0)) throw InvalidInput("wavenumber must be positive");
  if (std::abs(std::hypot(direction.x, direction.y) - 1.0) > 1e-12)
    throw InvalidInput("source direction must be a unit vector");
}

Complex HelmholtzProblem::source(const Point& x) const {
  return amplitude * std::exp(kI * kappa * (direction.x * x.x + direction.y * x.y));
}

bool flags_hold(const ComplexSparseMatrix& m, double tol) {
  auto max_abs = [](const SpMatC& s) {
    double v = 0.0;
    for (int k = 0; k < s.outerSize(); ++k)
      for (SpMatC::InnerIterator it(s, k); it; ++it) v = std::max(v, std::abs(it.value()));
    return v;
  };
  const double scale = max_abs(m.matrix);
  const double bound = tol * (scale > 0.0 ? scale : 1.0);
  if (m.symmetric && max_abs(m.matrix - SpMatC(m.matrix.transpose())) > bound) return false;
  if (m.hermitian && max_abs(m.matrix - SpMatC(m.matrix.adjoint())) > bound) return false;
  return true;
}

SpMatR assemble_stiffness(const LocalMesh& mesh) {
  return assemble_triangles(mesh, [](const auto& p) { return element_matrices(p).stiffness; });
}

SpMatR assemble_mass(const LocalMesh& mesh) {
  return assemble_triangles(mesh, [](const auto& p) { return element_matrices(p).mass; });
}

SpMatR assemble_boundary_mass(const LocalMesh& mesh, std::initializer_list<EdgeKind> kinds) {
  std::vector<TripletR> trip;
  for (const auto& e : mesh.boundary_edges) {
    if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) continue;
    const Eigen::Matrix2d me = edge_mass_matrix(mesh.coords[e.v[0]], mesh.coords[e.v[1]]);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) trip.emplace_back(e.v[a], e.v[b], me(a, b));
  }
  SpMatR m(mesh.n_dofs(), mesh.n_dofs());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

ComplexSparseMatrix assemble_subdomain(const LocalMesh& mesh, double kappa) {
  validate_local_mesh(mesh);
  const SpMatR stiff = assemble_stiffness(mesh);
  const SpMatR mass = assemble_mass(mesh);
  const SpMatR robin = assemble_boundary_mass(mesh, {EdgeKind::Exterior});
  ComplexSparseMatrix out;
  out.matrix = (stiff - kappa * kappa * mass).cast<Complex>() - (kI * kappa) * robin.cast<Complex>();
  out.matrix.prune(Complex(0.0, 0.0));
  out.symmetric = true;
  return out;
}

CVec assemble_load(const LocalMesh& mesh, const HelmholtzProblem& problem) {
  CVec f(mesh.n_dofs());
  for (int i = 0; i < mesh.n_dofs(); ++i) f[i] = problem.source(mesh.coords[i]);
  const SpMatR robin = assemble_boundary_mass(mesh, {EdgeKind::Exterior});
  return real_times(robin, f);
}

CVec solve_global_direct(const TriMesh& mesh, const HelmholtzProblem& problem) {
  problem.validate();
  const LocalMesh lm = whole_mesh(mesh);
  const ComplexSparseMatrix a = assemble_subdomain(lm, problem.kappa);
  const CVec l = assemble_load(lm, problem);
  if (l.norm() == 0.0) return CVec::Zero(lm.n_dofs());
  return factorize_and_solve(a.matrix, l, 1e-10);
}

}  // namespace gosm

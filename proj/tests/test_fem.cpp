#include <doctest.h>

#include <cmath>
#include <random>

#include "gosm/decomp.hpp"
#include "gosm/factorization.hpp"
#include "gosm/fem.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gosm;

namespace {

LocalMesh single_triangle(EdgeKind first_edge, EdgeKind others) {
  LocalMesh m;
  m.global_ids = {0, 1, 2};
  m.coords = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary_edges = {{{0, 1}, first_edge}, {{1, 2}, others}, {{2, 0}, others}};
  return m;
}

LocalMesh interior_only(const TriMesh& mesh) {
  LocalMesh m = whole_mesh(mesh);
  for (auto& e : m.boundary_edges) e.kind = EdgeKind::Interface;
  return m;
}

double max_abs(const SpMatC& m) {
  double r = 0.0;
  for (int c = 0; c < m.outerSize(); ++c)
    for (SpMatC::InnerIterator it(m, c); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

}  // namespace

TEST_CASE("reference triangle element matrices") {
  const ElementMatrices e = element_matrices({Point{0, 0}, Point{1, 0}, Point{0, 1}});
  Eigen::Matrix3d k;
  k << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  k *= 0.5;
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  m /= 24.0;
  CHECK((e.stiffness - k).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((e.mass - m).cwiseAbs().maxCoeff() <= 1e-15);
  Eigen::Matrix2d em;
  em << 2, 1, 1, 2;
  CHECK((e.edge_mass[0] - em / 6.0).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((e.edge_mass[1] - em * std::sqrt(2.0) / 6.0).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("unit edge mass") {
  Eigen::Matrix2d em;
  em << 2, 1, 1, 2;
  CHECK((edge_mass_matrix({0.3, 0.1}, {0.3, 1.1}) - em / 6.0).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("element matrices match quadrature on random triangles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<Point, 3> p{Point{u(rng), u(rng)}, Point{u(rng), u(rng)}, Point{u(rng), u(rng)}};
    const double orient = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
    if (std::abs(orient) < 0.1) continue;
    if (orient < 0) std::swap(p[1], p[2]);
    const ElementMatrices e = element_matrices(p);
    const testing::ElementOracle o = testing::quadrature_oracle(p);
    CHECK((e.stiffness - o.stiffness).cwiseAbs().maxCoeff() <= 1e-13 * o.stiffness.cwiseAbs().maxCoeff());
    CHECK((e.mass - o.mass).cwiseAbs().maxCoeff() <= 1e-13 * o.mass.cwiseAbs().maxCoeff());
    CHECK(std::abs(e.stiffness.rowwise().sum().maxCoeff()) <= 1e-12 * o.stiffness.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("degenerate triangle is rejected") {
  CHECK_THROWS_AS(element_matrices({Point{0, 0}, Point{1, 1}, Point{2, 2}}), InvalidInput);
}

TEST_CASE("kappa to zero without exterior edges leaves the singular Laplacian") {
  const LocalMesh m = interior_only(testing::unit_square(0.25));
  const ComplexSparseMatrix a = assemble_subdomain(m, 1e-12);
  const CVec ones = CVec::Ones(m.n_dofs());
  CHECK((a.matrix * ones).norm() <= 1e-12);
  CHECK(max_abs(SpMatC(a.matrix.imag().cast<Complex>())) == 0.0);
  CHECK(a.symmetric);
  CHECK(flags_hold(a));
}

TEST_CASE("no exterior boundary means a real operator") {
  const LocalMesh m = interior_only(testing::unit_square(0.25));
  const ComplexSparseMatrix a = assemble_subdomain(m, 5.0);
  for (int c = 0; c < a.matrix.outerSize(); ++c)
    for (SpMatC::InnerIterator it(a.matrix, c); it; ++it) CHECK(it.value().imag() == 0.0);
  CHECK(assemble_load(m, testing::SmallSystem::problem(5.0)).norm() == 0.0);
}

TEST_CASE("one triangle with one exterior edge matches hand assembly") {
  const LocalMesh m = single_triangle(EdgeKind::Exterior, EdgeKind::Interface);
  const ComplexSparseMatrix a = assemble_subdomain(m, 1.0);
  Eigen::Matrix3cd expected = Eigen::Matrix3cd::Zero();
  Eigen::Matrix3d k;
  k << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  Eigen::Matrix3d mass;
  mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected.real() = 0.5 * k - mass / 24.0;
  expected(0, 0) -= Complex(0, 2.0 / 6.0);
  expected(1, 1) -= Complex(0, 2.0 / 6.0);
  expected(0, 1) -= Complex(0, 1.0 / 6.0);
  expected(1, 0) -= Complex(0, 1.0 / 6.0);
  CHECK((Eigen::Matrix3cd(a.matrix) - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("load of a unit source on a unit edge") {
  const LocalMesh m = single_triangle(EdgeKind::Exterior, EdgeKind::Interface);
  HelmholtzProblem p;
  p.kappa = 3.0;
  p.direction = {0.0, 1.0};  // d.x = 0 along y = 0, so f = 1 there
  const CVec l = assemble_load(m, p);
  CHECK(std::abs(l[0] - 0.5) <= 1e-15);
  CHECK(std::abs(l[1] - 0.5) <= 1e-15);
  CHECK(std::abs(l[2]) == 0.0);
}

TEST_CASE("load moduli are invariant under a global phase") {
  const LocalMesh m = whole_mesh(testing::unit_square(0.125));
  HelmholtzProblem p;
  p.kappa = 7.0;
  const CVec l0 = assemble_load(m, p);
  p.amplitude = std::polar(1.0, 0.73);
  const CVec l1 = assemble_load(m, p);
  CHECK((l0.cwiseAbs() - l1.cwiseAbs()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("imaginary part of the energy is the boundary Robin term") {
  const TriMesh mesh = testing::holed_square(0.125);
  const LocalMesh m = whole_mesh(mesh);
  const double kappa = 4.0;
  const ComplexSparseMatrix a = assemble_subdomain(m, kappa);
  const SpMatR mb = assemble_boundary_mass(m, {EdgeKind::Exterior});
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const CVec v = testing::random_cvec(m.n_dofs(), rng);
    const Complex form = v.dot(a.matrix * v);  // <A v, conj(v)>
    const double boundary = v.dot(real_times(mb, v)).real();
    CHECK(std::abs(form.imag() + kappa * boundary) <= 1e-10 * kappa * boundary);
  }
}

TEST_CASE("global assembly equals the sum of subdomain assemblies") {
  const TriMesh mesh = testing::holed_square(0.125);
  const Partition p = partition_mesh(mesh, 4);
  const double kappa = 6.0;
  const SpMatC global = assemble_subdomain(whole_mesh(mesh), kappa).matrix;
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(mesh.n_vertices(), mesh.n_vertices());
  for (const auto& sd : p.subdomains) {
    const SpMatC a = assemble_subdomain(sd.mesh, kappa).matrix;
    for (int c = 0; c < a.outerSize(); ++c)
      for (SpMatC::InnerIterator it(a, c); it; ++it)
        sum(sd.mesh.global_ids[it.row()], sd.mesh.global_ids[it.col()]) += it.value();
  }
  CHECK((Eigen::MatrixXcd(global) - sum).cwiseAbs().maxCoeff() <= 1e-12 * sum.cwiseAbs().maxCoeff());
}

TEST_CASE("untagged boundary edges are rejected") {
  LocalMesh m = single_triangle(EdgeKind::Exterior, EdgeKind::Interface);
  m.boundary_edges.pop_back();
  CHECK_THROWS_AS(validate_local_mesh(m), InvalidInput);
  CHECK_THROWS_AS(assemble_subdomain(m, 1.0), InvalidInput);
}

TEST_CASE("global direct solve: zero data and linearity") {
  const TriMesh mesh = testing::unit_square(0.1);
  HelmholtzProblem p;
  p.kappa = 8.0;
  const CVec u = solve_global_direct(mesh, p);
  CHECK(u.norm() > 0.0);
  HelmholtzProblem zero = p;
  zero.amplitude = 0.0;
  CHECK(solve_global_direct(mesh, zero).norm() == 0.0);
  HelmholtzProblem scaled = p;
  scaled.amplitude = Complex(2.0, -1.0);
  CHECK((solve_global_direct(mesh, scaled) - Complex(2.0, -1.0) * u).norm() <= 1e-12 * u.norm());
}

TEST_CASE("invalid problems are rejected") {
  HelmholtzProblem p;
  p.kappa = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p.kappa = 1.0;
  p.direction = {1.0, 1.0};
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}

TEST_CASE("factorize_and_solve") {
  SUBCASE("identity") {
    SpMatC id(3, 3);
    id.setIdentity();
    const CVec b = CVec::LinSpaced(3, 1.0, 3.0);
    CHECK((factorize_and_solve(id, b) - b).norm() == 0.0);
  }
  SUBCASE("2x2 by hand") {
    SpMatC a(2, 2);
    a.insert(0, 0) = 2;
    a.insert(0, 1) = 1;
    a.insert(1, 0) = 1;
    a.insert(1, 1) = 2;
    const CVec x = factorize_and_solve(a, CVec::Constant(2, 3.0));
    CHECK(std::abs(x[0] - 1.0) <= 1e-15);
    CHECK(std::abs(x[1] - 1.0) <= 1e-15);
  }
  SUBCASE("complex symmetric Helmholtz operator") {
    const LocalMesh m = whole_mesh(testing::holed_square(0.0625));
    const ComplexSparseMatrix a = assemble_subdomain(m, 20.0);
    const CVec l = assemble_load(m, testing::SmallSystem::problem(20.0));
    const CVec x = factorize_and_solve(a.matrix, l);
    CHECK((a.matrix * x - l).norm() <= 1e-10 * l.norm());
  }
  SUBCASE("singular matrix") {
    SpMatC z(2, 2);
    z.insert(0, 0) = 1;
    z.insert(0, 1) = 1;
    z.insert(1, 0) = 1;
    z.insert(1, 1) = 1;
    CHECK_THROWS_AS(factorize_and_solve(z, CVec::Ones(2)), NumericalError);
  }
}

TEST_CASE("sparse Cholesky rejects indefinite matrices") {
  SpMatR a(2, 2);
  a.insert(0, 0) = 1;
  a.insert(1, 1) = -1;
  CHECK_THROWS_AS(SparseCholesky{a}, NumericalError);
}

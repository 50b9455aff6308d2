#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gosm/mesh.hpp"
#include "support.hpp"

using namespace gosm;

namespace {

double total_area(const TriMesh& m) {
  double a = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) a += triangle_area(m, t);
  return a;
}

}  // namespace

TEST_CASE("unit square with target_h 0.5 is a 2x2 grid") {
  const TriMesh m = testing::unit_square(0.5);
  CHECK(m.n_vertices() == 9);
  CHECK(m.n_triangles() == 8);
  CHECK(m.boundary_edges.size() == 8);
  CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-14));
  const MeshStats s = mesh_stats(m);
  CHECK(s.n_vertices == 9);
  CHECK(s.n_triangles == 8);
  CHECK(s.h_max == doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-14));
  CHECK_NOTHROW(validate_mesh(m));
}

TEST_CASE("vertices are row-major and diagonals run lower-left to upper-right") {
  const TriMesh m = testing::unit_square(0.5);
  CHECK(m.vertices[1].x == 0.5);
  CHECK(m.vertices[1].y == 0.0);
  CHECK(m.vertices[3].x == 0.0);
  CHECK(m.vertices[3].y == 0.5);
  // first cell: (v0, v1, v4) and (v0, v4, v3)
  CHECK(m.triangles[0] == std::array<int, 3>{0, 1, 4});
  CHECK(m.triangles[1] == std::array<int, 3>{0, 4, 3});
}

TEST_CASE("reference triangle stats") {
  const TriMesh m = make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  const MeshStats s = mesh_stats(m);
  CHECK(s.n_vertices == 3);
  CHECK(s.n_triangles == 1);
  CHECK(s.h_max == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(m.boundary_edges.size() == 3);
}

TEST_CASE("holed square: area and cell accounting") {
  const TriMesh m = testing::holed_square(0.125);
  CHECK(std::abs(total_area(m) - 3.75) <= 1e-12);
  // 16 x 16 cells, 4 x 4 of them in the hole
  CHECK(m.n_triangles() == 2 * (16 * 16 - 4 * 4));
  CHECK_NOTHROW(validate_mesh(m));
  // outer perimeter 64 edges, hole perimeter 16 edges
  CHECK(m.boundary_edges.size() == 80);
}

TEST_CASE("snapping refines the grid until the hole is aligned") {
  const TriMesh m = build_mesh({{0, 0, 1, 1}, Rect{0.3, 0.3, 0.6, 0.6}, 0.5});
  CHECK_NOTHROW(validate_mesh(m));
  CHECK(std::abs(total_area(m) - (1.0 - 0.09)) <= 1e-12);
  CHECK(mesh_stats(m).h_max <= std::sqrt(2.0) * 0.5 + 1e-14);
}

TEST_CASE("unaligned hole is rejected") {
  CHECK_THROWS_AS(build_mesh({{0, 0, 1, 1}, Rect{0.1234567, 0.3, 0.6, 0.6}, 0.5}), InvalidInput);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(build_mesh({{0, 0, 1, 1}, std::nullopt, 0.0}), InvalidInput);
  CHECK_THROWS_AS(build_mesh({{0, 0, 1, 1}, Rect{-0.5, 0.2, 0.5, 0.5}, 0.1}), InvalidInput);
  CHECK_THROWS_AS(build_mesh({{1, 0, 0, 1}, std::nullopt, 0.1}), InvalidInput);
}

TEST_CASE("mesh generation is deterministic") {
  std::ostringstream a, b;
  write_mesh(a, testing::holed_square(0.125));
  write_mesh(b, testing::holed_square(0.125));
  CHECK(a.str() == b.str());
}

TEST_CASE("text format round trip") {
  const TriMesh m = testing::holed_square(0.25);
  std::stringstream ss;
  write_mesh(ss, m);
  const TriMesh r = read_mesh(ss);
  REQUIRE(r.n_vertices() == m.n_vertices());
  REQUIRE(r.n_triangles() == m.n_triangles());
  REQUIRE(r.boundary_edges.size() == m.boundary_edges.size());
  for (int v = 0; v < m.n_vertices(); ++v) {
    CHECK(r.vertices[v].x == m.vertices[v].x);
    CHECK(r.vertices[v].y == m.vertices[v].y);
  }
  CHECK(r.triangles == m.triangles);
  std::istringstream bad("3 1 0\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(bad), InvalidInput);
}

TEST_CASE("validation catches broken meshes") {
  TriMesh m = testing::unit_square(0.5);
  SUBCASE("clockwise triangle") {
    std::swap(m.triangles[0][1], m.triangles[0][2]);
    CHECK_THROWS_AS(validate_mesh(m), InvalidInput);
  }
  SUBCASE("missing boundary tag") {
    m.boundary_edges.pop_back();
    CHECK_THROWS_AS(validate_mesh(m), InvalidInput);
  }
  SUBCASE("duplicate vertex") {
    m.vertices.push_back(m.vertices[0]);
    CHECK_THROWS_AS(validate_mesh(m), InvalidInput);
  }
  SUBCASE("non-conforming edge") {
    m.triangles.push_back(m.triangles[0]);
    CHECK_THROWS_AS(validate_mesh(m), InvalidInput);
  }
}

#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gosm {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

/// Rectangle with an optional rectangular hole, meshed with element size at most target_h
/// along the grid axes.
struct DomainSpec {
  Rect outer;
  std::optional<Rect> hole;
  double target_h = 0.1;

  double area() const { return outer.area() - (hole ? hole->area() : 0.0); }
};

enum class BoundaryTag { Exterior };

struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag = BoundaryTag::Exterior;
};

/// Conforming P1 triangulation. Triangles are counter-clockwise.
struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
};

struct MeshStats {
  int n_vertices = 0;
  int n_triangles = 0;
  double h_max = 0.0;
};

/// Structured mesh of the domain: the grid is snapped so that the hole edges lie on grid
/// lines, every cell is split along its lower-left to upper-right diagonal and cells inside
/// the hole are dropped. Vertices are numbered row-major.
/// Throws InvalidInput if the hole cannot be aligned with the grid.
TriMesh build_mesh(const DomainSpec& spec);

/// Builds a mesh from raw triangles, orienting them counter-clockwise and tagging every
/// edge that belongs to a single triangle as exterior boundary.
TriMesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

MeshStats mesh_stats(const TriMesh& mesh);

double triangle_area(const TriMesh& mesh, int t);

/// Checks orientation, conformity, duplicate vertices and boundary tagging.
/// Throws InvalidInput describing the first violation.
void validate_mesh(const TriMesh& mesh);

/// Plain-text mesh format:
///   nv nt nbe
///   x y                (nv lines)
///   a b c              (nt lines, 0-based vertex ids)
///   a b exterior       (nbe lines)
void write_mesh(std::ostream& os, const TriMesh& mesh);
TriMesh read_mesh(std::istream& is);

}  // namespace gosm

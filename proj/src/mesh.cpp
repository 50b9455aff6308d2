#include "gosm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "gosm/common.hpp"

namespace gosm {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

// Number of uniform cells covering [lo, hi] with size <= h such that every cut in `cuts`
// falls on a grid line.
int snapped_cells(double lo, double hi, double h, const std::vector<double>& cuts) {
  const double len = hi - lo;
  const int n0 = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
  for (int n = n0; n <= 8 * n0; ++n) {
    const double d = len / n;
    const bool aligned = std::all_of(cuts.begin(), cuts.end(), [&](double c) {
      const double s = (c - lo) / d;
      return std::abs(s - std::round(s)) < 1e-9;
    });
    if (aligned) return n;
  }
  std::ostringstream msg;
  msg << "hole edges cannot be aligned with a grid of spacing <= " << h << " on [" << lo << ", "
      << hi << "]";
  throw InvalidInput(msg.str());
}

std::vector<BoundaryEdge> single_owner_edges(const std::vector<std::array<int, 3>>& triangles) {
  std::map<EdgeKey, int> count;
  for (const auto& t : triangles)
    for (int e = 0; e < 3; ++e) ++count[key(t[e], t[(e + 1) % 3])];
  std::vector<BoundaryEdge> edges;
  for (const auto& t : triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      if (count[key(a, b)] == 1) edges.push_back({{a, b}, BoundaryTag::Exterior});
    }
  return edges;
}

}  // namespace

TriMesh build_mesh(const DomainSpec& spec) {
  const Rect& o = spec.outer;
  if (!(spec.target_h > 0.0)) throw InvalidInput("target_h must be positive");
  if (!(o.x1 > o.x0 && o.y1 > o.y0)) throw InvalidInput("outer rectangle is empty");
  std::vector<double> xcuts, ycuts;
  if (spec.hole) {
    const Rect& h = *spec.hole;
    if (!(h.x0 > o.x0 && h.x1 < o.x1 && h.y0 > o.y0 && h.y1 < o.y1 && h.x0 < h.x1 && h.y0 < h.y1))
      throw InvalidInput("hole must be a non-empty rectangle strictly inside the outer one");
    xcuts = {h.x0, h.x1};
    ycuts = {h.y0, h.y1};
  }
  const int nx = snapped_cells(o.x0, o.x1, spec.target_h, xcuts);
  const int ny = snapped_cells(o.y0, o.y1, spec.target_h, ycuts);
  const double dx = o.width() / nx;
  const double dy = o.height() / ny;

  auto cell_kept = [&](int i, int j) {
    if (!spec.hole) return true;
    const double cx = o.x0 + (i + 0.5) * dx;
    const double cy = o.y0 + (j + 0.5) * dy;
    const Rect& h = *spec.hole;
    return !(cx > h.x0 && cx < h.x1 && cy > h.y0 && cy < h.y1);
  };

  // grid vertex (i, j) -> mesh vertex id, row-major over retained vertices
  std::vector<int> id((nx + 1) * (ny + 1), -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (cell_kept(i, j))
        for (int dj = 0; dj < 2; ++dj)
          for (int di = 0; di < 2; ++di) id[(j + dj) * (nx + 1) + i + di] = 0;

  TriMesh mesh;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      int& v = id[j * (nx + 1) + i];
      if (v < 0) continue;
      v = mesh.n_vertices();
      // exact end points keep the outer and hole boundaries on the prescribed coordinates
      const double x = (i == nx) ? o.x1 : o.x0 + i * dx;
      const double y = (j == ny) ? o.y1 : o.y0 + j * dy;
      mesh.vertices.push_back({x, y});
    }

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!cell_kept(i, j)) continue;
      const int v00 = id[j * (nx + 1) + i];
      const int v10 = id[j * (nx + 1) + i + 1];
      const int v01 = id[(j + 1) * (nx + 1) + i];
      const int v11 = id[(j + 1) * (nx + 1) + i + 1];
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  mesh.boundary_edges = single_owner_edges(mesh.triangles);
  return mesh;
}

TriMesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles) {
  TriMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  for (auto& t : mesh.triangles) {
    for (int v : t)
      if (v < 0 || v >= mesh.n_vertices()) throw InvalidInput("triangle vertex index out of range");
    if (signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) < 0.0)
      std::swap(t[1], t[2]);
  }
  mesh.boundary_edges = single_owner_edges(mesh.triangles);
  return mesh;
}

double triangle_area(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  return signed_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
}

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats s{mesh.n_vertices(), mesh.n_triangles(), 0.0};
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const Point& a = mesh.vertices[t[e]];
      const Point& b = mesh.vertices[t[(e + 1) % 3]];
      s.h_max = std::max(s.h_max, std::hypot(b.x - a.x, b.y - a.y));
    }
  return s;
}

void validate_mesh(const TriMesh& mesh) {
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= mesh.n_vertices()) throw InvalidInput("triangle vertex index out of range");
    if (!(triangle_area(mesh, t) > 0.0))
      throw InvalidInput("triangle " + std::to_string(t) + " is not positively oriented");
  }

  std::map<EdgeKey, std::vector<int>> owners;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) owners[key(tri[e], tri[(e + 1) % 3])].push_back(t);
  }
  std::map<EdgeKey, int> tagged;
  for (const auto& be : mesh.boundary_edges) ++tagged[key(be.v[0], be.v[1])];
  for (const auto& [edge, ts] : owners) {
    if (ts.size() > 2) throw InvalidInput("edge shared by more than two triangles");
    const auto it = tagged.find(edge);
    const int n_tags = it == tagged.end() ? 0 : it->second;
    if (ts.size() == 1 && n_tags != 1) throw InvalidInput("boundary edge is not tagged exactly once");
    if (ts.size() == 2 && n_tags != 0) throw InvalidInput("interior edge is tagged as boundary");
  }
  if (tagged.size() != mesh.boundary_edges.size())
    throw InvalidInput("duplicate boundary edge records");
  for (const auto& [edge, n] : tagged)
    if (!owners.count(edge)) throw InvalidInput("boundary edge record is not a mesh edge");

  std::vector<std::pair<double, double>> coords;
  coords.reserve(mesh.vertices.size());
  for (const auto& p : mesh.vertices) coords.emplace_back(p.x, p.y);
  std::sort(coords.begin(), coords.end());
  if (std::adjacent_find(coords.begin(), coords.end()) != coords.end())
    throw InvalidInput("duplicate vertices");

  std::vector<char> used(mesh.vertices.size(), 0);
  for (const auto& t : mesh.triangles)
    for (int v : t) used[v] = 1;
  if (std::find(used.begin(), used.end(), 0) != used.end())
    throw InvalidInput("vertex not referenced by any triangle");
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  const auto old_precision = os.precision(17);
  os << mesh.n_vertices() << ' ' << mesh.n_triangles() << ' ' << mesh.boundary_edges.size() << '\n';
  for (const auto& p : mesh.vertices) os << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) os << e.v[0] << ' ' << e.v[1] << " exterior\n";
  os.precision(old_precision);
}

TriMesh read_mesh(std::istream& is) {
  long nv = -1, nt = -1, nbe = -1;
  if (!(is >> nv >> nt >> nbe) || nv < 0 || nt < 0 || nbe < 0)
    throw InvalidInput("malformed mesh header");
  TriMesh mesh;
  mesh.vertices.resize(nv);
  for (auto& p : mesh.vertices)
    if (!(is >> p.x >> p.y)) throw InvalidInput("malformed vertex record");
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles)
    if (!(is >> t[0] >> t[1] >> t[2])) throw InvalidInput("malformed triangle record");
  mesh.boundary_edges.resize(nbe);
  for (auto& e : mesh.boundary_edges) {
    std::string tag;
    if (!(is >> e.v[0] >> e.v[1] >> tag)) throw InvalidInput("malformed boundary edge record");
    if (tag != "exterior") throw InvalidInput("unknown boundary tag '" + tag + "'");
  }
  validate_mesh(mesh);
  return mesh;
}

}  // namespace gosm

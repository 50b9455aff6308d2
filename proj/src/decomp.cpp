#include "gosm/decomp.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <string>

namespace gosm {

namespace {

using EdgeKey = std::pair<int, int>;
EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

Point centroid(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  Point c;
  for (int v : tri) {
    c.x += mesh.vertices[v].x / 3.0;
    c.y += mesh.vertices[v].y / 3.0;
  }
  return c;
}

void bisect(const std::vector<Point>& centroids, std::vector<int> ids, int parts, int first,
            std::vector<int>& owner) {
  if (parts == 1) {
    for (int t : ids) owner[t] = first;
    return;
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (int t : ids) {
    xmin = std::min(xmin, centroids[t].x);
    xmax = std::max(xmax, centroids[t].x);
    ymin = std::min(ymin, centroids[t].y);
    ymax = std::max(ymax, centroids[t].y);
  }
  const bool split_x = (xmax - xmin) >= (ymax - ymin);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const Point& pa = centroids[a];
    const Point& pb = centroids[b];
    const double ka = split_x ? pa.x : pa.y;
    const double kb = split_x ? pb.x : pb.y;
    if (ka != kb) return ka < kb;
    if (pa.x != pb.x) return pa.x < pb.x;
    if (pa.y != pb.y) return pa.y < pb.y;
    return a < b;
  });
  const int left_parts = parts / 2;
  const std::size_t n_left = ids.size() * left_parts / parts;
  if (n_left == 0 || n_left == ids.size())
    throw InvalidInput("partition: bisection produced an empty side (" + std::to_string(ids.size()) +
                       " triangles into " + std::to_string(parts) + " parts)");
  std::vector<int> left(ids.begin(), ids.begin() + n_left);
  std::vector<int> right(ids.begin() + n_left, ids.end());
  bisect(centroids, std::move(left), left_parts, first, owner);
  bisect(centroids, std::move(right), parts - left_parts, first + left_parts, owner);
}

int index_of(const std::vector<int>& sorted, int value) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  if (it == sorted.end() || *it != value) throw Error("internal: index lookup failed");
  return static_cast<int>(it - sorted.begin());
}

}  // namespace

Partition partition_mesh(const TriMesh& mesh, int n_subdomains) {
  if (n_subdomains < 1 || n_subdomains > mesh.n_triangles())
    throw InvalidInput("partition: subdomain count must be in [1, #triangles]");
  std::vector<Point> centroids(mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) centroids[t] = centroid(mesh, t);
  std::vector<int> ids(mesh.triangles.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<int> owner(mesh.triangles.size(), -1);
  bisect(centroids, std::move(ids), n_subdomains, 0, owner);
  return make_partition(mesh, std::move(owner), n_subdomains);
}

Partition make_partition(const TriMesh& mesh, std::vector<int> elem_owner, int n_subdomains) {
  if (static_cast<int>(elem_owner.size()) != mesh.n_triangles())
    throw InvalidInput("partition: owner array size differs from triangle count");
  std::set<EdgeKey> exterior;
  for (const auto& e : mesh.boundary_edges) exterior.insert(key(e.v[0], e.v[1]));

  Partition p;
  p.n_subdomains = n_subdomains;
  p.elem_owner = std::move(elem_owner);
  p.subdomains.resize(n_subdomains);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const int j = p.elem_owner[t];
    if (j < 0 || j >= n_subdomains) throw InvalidInput("partition: owner id out of range");
    p.subdomains[j].triangles.push_back(t);
  }

  std::set<int> sigma;
  for (int j = 0; j < n_subdomains; ++j) {
    Subdomain& sd = p.subdomains[j];
    if (sd.triangles.empty()) throw InvalidInput("partition: empty subdomain " + std::to_string(j));
    std::vector<int>& gids = sd.mesh.global_ids;
    for (int t : sd.triangles)
      for (int v : mesh.triangles[t]) gids.push_back(v);
    std::sort(gids.begin(), gids.end());
    gids.erase(std::unique(gids.begin(), gids.end()), gids.end());
    for (int v : gids) sd.mesh.coords.push_back(mesh.vertices[v]);

    std::map<EdgeKey, int> count;
    for (int t : sd.triangles) {
      const auto& tri = mesh.triangles[t];
      sd.mesh.triangles.push_back(
          {index_of(gids, tri[0]), index_of(gids, tri[1]), index_of(gids, tri[2])});
      for (int e = 0; e < 3; ++e) ++count[key(tri[e], tri[(e + 1) % 3])];
    }
    std::set<int> gamma;
    for (int t : sd.triangles) {
      const auto& tri = mesh.triangles[t];
      for (int e = 0; e < 3; ++e) {
        const int a = tri[e], b = tri[(e + 1) % 3];
        if (count[key(a, b)] != 1) continue;
        const EdgeKind kind = exterior.count(key(a, b)) ? EdgeKind::Exterior : EdgeKind::Interface;
        sd.mesh.boundary_edges.push_back({{index_of(gids, a), index_of(gids, b)}, kind});
        gamma.insert(a);
        gamma.insert(b);
      }
    }
    sd.gamma.assign(gamma.begin(), gamma.end());
    for (int v : sd.gamma) sd.gamma_local.push_back(index_of(gids, v));
    sigma.insert(gamma.begin(), gamma.end());
  }

  p.sigma.assign(sigma.begin(), sigma.end());
  p.multiplicity.assign(p.sigma.size(), 0);
  p.offsets.assign(1, 0);
  for (auto& sd : p.subdomains) {
    for (int v : sd.gamma) {
      const int s = index_of(p.sigma, v);
      sd.gamma_sigma.push_back(s);
      ++p.multiplicity[s];
    }
    p.offsets.push_back(p.offsets.back() + static_cast<int>(sd.gamma.size()));
  }
  return p;
}

void validate_partition(const TriMesh& mesh, const Partition& p) {
  std::vector<int> seen(mesh.triangles.size(), 0);
  for (const auto& sd : p.subdomains)
    for (int t : sd.triangles) ++seen[t];
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
    throw InvalidInput("partition: triangles not covered exactly once");

  std::vector<int> mult(p.sigma.size(), 0);
  for (const auto& sd : p.subdomains)
    for (std::size_t g = 0; g < sd.gamma.size(); ++g) {
      const int s = sd.gamma_sigma[g];
      if (p.sigma[s] != sd.gamma[g]) throw InvalidInput("partition: skeleton map inconsistent");
      ++mult[s];
    }
  if (mult != p.multiplicity) throw InvalidInput("partition: multiplicities inconsistent");
  if (std::any_of(mult.begin(), mult.end(), [](int m) { return m < 1; }))
    throw InvalidInput("partition: skeleton vertex on no subdomain boundary");

  // edge-connectivity of each subdomain
  for (std::size_t j = 0; j < p.subdomains.size(); ++j) {
    const auto& tris = p.subdomains[j].triangles;
    std::map<EdgeKey, std::vector<int>> by_edge;
    for (std::size_t i = 0; i < tris.size(); ++i) {
      const auto& tri = mesh.triangles[tris[i]];
      for (int e = 0; e < 3; ++e) by_edge[key(tri[e], tri[(e + 1) % 3])].push_back(int(i));
    }
    std::vector<char> visited(tris.size(), 0);
    std::queue<int> queue;
    queue.push(0);
    visited[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const int i = queue.front();
      queue.pop();
      const auto& tri = mesh.triangles[tris[i]];
      for (int e = 0; e < 3; ++e)
        for (int nb : by_edge[key(tri[e], tri[(e + 1) % 3])])
          if (!visited[nb]) {
            visited[nb] = 1;
            ++reached;
            queue.push(nb);
          }
    }
    if (reached != tris.size())
      throw InvalidInput("partition: subdomain " + std::to_string(j) + " is not edge-connected");
  }
}

void write_partition(std::ostream& os, const Partition& p) {
  os << p.elem_owner.size() << ' ' << p.n_subdomains << '\n';
  for (int o : p.elem_owner) os << o << '\n';
}

std::vector<int> read_partition_owners(std::istream& is, int& n_subdomains) {
  long nt = -1;
  if (!(is >> nt >> n_subdomains) || nt < 0 || n_subdomains < 1)
    throw InvalidInput("malformed partition header");
  std::vector<int> owner(nt);
  for (auto& o : owner)
    if (!(is >> o) || o < 0 || o >= n_subdomains) throw InvalidInput("malformed owner record");
  return owner;
}

SkeletonVector zero_skeleton(const Partition& p, Role role) {
  std::vector<CVec> blocks;
  for (int j = 0; j < p.n_subdomains; ++j) blocks.push_back(CVec::Zero(p.gamma_size(j)));
  return {std::move(blocks), role};
}

SkeletonVector skeleton_from_flat(const Partition& p, Role role, const CVec& flat) {
  if (flat.size() != p.n_multi()) throw InvalidInput("skeleton vector has wrong length");
  std::vector<CVec> blocks;
  for (int j = 0; j < p.n_subdomains; ++j)
    blocks.push_back(flat.segment(p.offsets[j], p.gamma_size(j)));
  return {std::move(blocks), role};
}

VolumeTuple zero_volume(const Partition& p, Role role) {
  std::vector<CVec> blocks;
  for (const auto& sd : p.subdomains) blocks.push_back(CVec::Zero(sd.mesh.n_dofs()));
  return {std::move(blocks), role};
}

SkeletonVector apply_B(const Partition& p, const VolumeTuple& u) {
  if (u.role() != Role::Primal) throw InvalidInput("apply_B expects a primal volume tuple");
  if (u.n_blocks() != p.n_subdomains) throw InvalidInput("apply_B: block count mismatch");
  std::vector<CVec> blocks(p.n_subdomains);
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto& sd = p.subdomains[j];
    if (u.block(j).size() != sd.mesh.n_dofs()) throw InvalidInput("apply_B: block size mismatch");
    blocks[j].resize(p.gamma_size(j));
    for (int g = 0; g < p.gamma_size(j); ++g) blocks[j][g] = u.block(j)[sd.gamma_local[g]];
  }
  return {std::move(blocks), Role::Primal};
}

VolumeTuple apply_B_adjoint(const Partition& p, const SkeletonVector& q) {
  if (q.role() != Role::Dual) throw InvalidInput("apply_B_adjoint expects a dual skeleton vector");
  if (q.n_blocks() != p.n_subdomains) throw InvalidInput("apply_B_adjoint: block count mismatch");
  std::vector<CVec> blocks(p.n_subdomains);
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto& sd = p.subdomains[j];
    if (q.block(j).size() != p.gamma_size(j))
      throw InvalidInput("apply_B_adjoint: block size mismatch");
    blocks[j] = CVec::Zero(sd.mesh.n_dofs());
    for (int g = 0; g < p.gamma_size(j); ++g) blocks[j][sd.gamma_local[g]] = q.block(j)[g];
  }
  return {std::move(blocks), Role::Dual};
}

std::vector<CVec> restrict_to_boundaries(const Partition& p, const CVec& v) {
  if (v.size() != p.n_sigma()) throw InvalidInput("skeleton trace has wrong length");
  std::vector<CVec> blocks(p.n_subdomains);
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto& sd = p.subdomains[j];
    blocks[j].resize(p.gamma_size(j));
    for (int g = 0; g < p.gamma_size(j); ++g) blocks[j][g] = v[sd.gamma_sigma[g]];
  }
  return blocks;
}

CVec sum_from_boundaries(const Partition& p, const std::vector<CVec>& blocks) {
  if (static_cast<int>(blocks.size()) != p.n_subdomains)
    throw InvalidInput("sum_from_boundaries: block count mismatch");
  CVec out = CVec::Zero(p.n_sigma());
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto& sd = p.subdomains[j];
    if (blocks[j].size() != p.gamma_size(j))
      throw InvalidInput("sum_from_boundaries: block size mismatch");
    for (int g = 0; g < p.gamma_size(j); ++g) out[sd.gamma_sigma[g]] += blocks[j][g];
  }
  return out;
}

SkeletonVector apply_R(const Partition& p, const SingleTrace& v) {
  if (v.role != Role::Primal) throw InvalidInput("apply_R expects a primal skeleton trace");
  return {restrict_to_boundaries(p, v.values), Role::Primal};
}

SingleTrace apply_R_adjoint(const Partition& p, const SkeletonVector& q) {
  if (q.role() != Role::Dual) throw InvalidInput("apply_R_adjoint expects a dual skeleton vector");
  return {sum_from_boundaries(p, q.blocks()), Role::Dual};
}

Complex pairing(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) throw InvalidInput("pairing: size mismatch");
  return (a.array() * b.array()).sum();
}

Complex pairing(const SkeletonVector& a, const SkeletonVector& b) { return pairing(a.flat(), b.flat()); }

Complex pairing(const VolumeTuple& a, const VolumeTuple& b) { return pairing(a.flat(), b.flat()); }

}  // namespace gosm

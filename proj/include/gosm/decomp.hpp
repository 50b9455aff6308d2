#pragma once

#include <cmath>
#include <iosfwd>
#include <vector>

#include "gosm/common.hpp"
#include "gosm/fem.hpp"
#include "gosm/mesh.hpp"

namespace gosm {

/// One subdomain of a non-overlapping partition.
struct Subdomain {
  std::vector<int> triangles;    ///< global triangle ids, ascending
  LocalMesh mesh;                ///< boundary edges tagged Exterior or Interface
  std::vector<int> gamma;        ///< global vertex ids on the subdomain boundary, ascending
  std::vector<int> gamma_local;  ///< local dof of each gamma entry
  std::vector<int> gamma_sigma;  ///< skeleton index of each gamma entry
};

/// Non-overlapping partition with its skeleton (union of subdomain boundaries).
/// Skeleton vertices are indexed 0..n_sigma()-1 in ascending global id order.
struct Partition {
  int n_subdomains = 0;
  std::vector<int> elem_owner;
  std::vector<Subdomain> subdomains;
  std::vector<int> sigma;         ///< global vertex ids of the skeleton
  std::vector<int> multiplicity;  ///< per skeleton index, number of boundaries containing it
  std::vector<int> offsets;       ///< start of each subdomain block in the multi-trace layout

  int n_sigma() const { return static_cast<int>(sigma.size()); }
  /// Dimension of the multi-trace space (sum of boundary sizes).
  int n_multi() const { return offsets.empty() ? 0 : offsets.back(); }
  int gamma_size(int j) const { return static_cast<int>(subdomains[j].gamma.size()); }
};

/// Recursive coordinate bisection of triangle centroids along the longer axis of their
/// bounding box; ties broken lexicographically by centroid. Throws InvalidInput if a split
/// would leave one side empty.
Partition partition_mesh(const TriMesh& mesh, int n_subdomains);

/// Builds all partition maps from an explicit triangle -> subdomain array.
Partition make_partition(const TriMesh& mesh, std::vector<int> elem_owner, int n_subdomains);

/// Checks coverage, skeleton consistency, multiplicities and edge-connectivity of subdomains.
void validate_partition(const TriMesh& mesh, const Partition& p);

/// Companion file of the mesh format: "nt J" followed by one owner id per line.
void write_partition(std::ostream& os, const Partition& p);
std::vector<int> read_partition_owners(std::istream& is, int& n_subdomains);

/// Tuple of per-subdomain coefficient vectors with a primal/dual role. Arithmetic is only
/// defined between tuples of the same kind and role.
template <class Kind>
class BlockVector {
public:
  BlockVector() = default;
  BlockVector(std::vector<CVec> blocks, Role role) : blocks_(std::move(blocks)), role_(role) {}

  Role role() const { return role_; }
  int n_blocks() const { return static_cast<int>(blocks_.size()); }
  CVec& block(int j) { return blocks_[j]; }
  const CVec& block(int j) const { return blocks_[j]; }
  const std::vector<CVec>& blocks() const { return blocks_; }

  int size() const {
    int n = 0;
    for (const auto& b : blocks_) n += static_cast<int>(b.size());
    return n;
  }

  CVec flat() const {
    CVec out(size());
    int o = 0;
    for (const auto& b : blocks_) {
      out.segment(o, b.size()) = b;
      o += static_cast<int>(b.size());
    }
    return out;
  }

  BlockVector& operator+=(const BlockVector& o) {
    check_compatible(o);
    for (int j = 0; j < n_blocks(); ++j) blocks_[j] += o.blocks_[j];
    return *this;
  }
  BlockVector& operator-=(const BlockVector& o) {
    check_compatible(o);
    for (int j = 0; j < n_blocks(); ++j) blocks_[j] -= o.blocks_[j];
    return *this;
  }
  BlockVector& operator*=(Complex s) {
    for (auto& b : blocks_) b *= s;
    return *this;
  }

  friend BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
  friend BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
  friend BlockVector operator*(Complex s, BlockVector a) { return a *= s; }

  BlockVector conjugate() const {
    BlockVector out = *this;
    for (auto& b : out.blocks_) b = b.conjugate();
    return out;
  }

  double euclidean_norm() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.squaredNorm();
    return std::sqrt(s);
  }

private:
  void check_compatible(const BlockVector& o) const {
    if (o.role_ != role_) throw InvalidInput("block vector arithmetic between primal and dual");
    if (o.blocks_.size() != blocks_.size()) throw InvalidInput("block count mismatch");
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      if (o.blocks_[j].size() != blocks_[j].size()) throw InvalidInput("block size mismatch");
  }

  std::vector<CVec> blocks_;
  Role role_ = Role::Primal;
};

struct SkeletonTag;
struct VolumeTag;

/// Element of the multi-trace space (block j indexed like Subdomain::gamma) or its dual.
using SkeletonVector = BlockVector<SkeletonTag>;
/// Element of the broken volume space (block j indexed by subdomain-local dofs).
using VolumeTuple = BlockVector<VolumeTag>;

/// Single-valued trace on the skeleton, indexed like Partition::sigma.
struct SingleTrace {
  CVec values;
  Role role = Role::Primal;
};

SkeletonVector zero_skeleton(const Partition& p, Role role);
SkeletonVector skeleton_from_flat(const Partition& p, Role role, const CVec& flat);
VolumeTuple zero_volume(const Partition& p, Role role);

/// Restriction of every local function to its subdomain boundary. primal -> primal.
SkeletonVector apply_B(const Partition& p, const VolumeTuple& u);
/// Transpose of apply_B (zero extension). dual -> dual.
VolumeTuple apply_B_adjoint(const Partition& p, const SkeletonVector& q);
/// Copies each skeleton value into every boundary containing it. primal -> primal.
SkeletonVector apply_R(const Partition& p, const SingleTrace& v);
/// Transpose of apply_R: sums the copies back per skeleton vertex. dual -> dual.
SingleTrace apply_R_adjoint(const Partition& p, const SkeletonVector& q);

/// Role-free versions used inside preconditioners and dense assemblies.
std::vector<CVec> restrict_to_boundaries(const Partition& p, const CVec& sigma_values);
CVec sum_from_boundaries(const Partition& p, const std::vector<CVec>& blocks);

/// Bilinear (unconjugated) pairing of two vectors of the same layout.
Complex pairing(const CVec& a, const CVec& b);
Complex pairing(const SkeletonVector& a, const SkeletonVector& b);
Complex pairing(const VolumeTuple& a, const VolumeTuple& b);

}  // namespace gosm

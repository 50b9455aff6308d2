#include "gosm/impedance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "gosm/factorization.hpp"

namespace gosm {

namespace {

using EdgeKey = std::pair<int, int>;
EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

}  // namespace

LayeredRegion build_layered_subdomain(const Partition& p, int j, int n_layers) {
  if (n_layers < 1) throw InvalidInput("layer count must be at least 1");
  const Subdomain& sd = p.subdomains.at(j);
  const LocalMesh& m = sd.mesh;

  std::vector<char> front(m.n_dofs(), 0);
  for (int v : sd.gamma_local) front[v] = 1;
  std::vector<char> taken(m.triangles.size(), 0);
  for (int layer = 0; layer < n_layers; ++layer) {
    bool grew = false;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      if (taken[t]) continue;
      const auto& tri = m.triangles[t];
      if (front[tri[0]] || front[tri[1]] || front[tri[2]]) {
        taken[t] = 2;  // added this round
        grew = true;
      }
    }
    if (!grew) break;
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
      if (taken[t] == 2) {
        taken[t] = 1;
        for (int v : m.triangles[t]) front[v] = 1;
      }
  }

  LayeredRegion region;
  std::vector<int> region_id(m.n_dofs(), -1);
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (taken[t]) {
      region.triangles.push_back(static_cast<int>(t));
      for (int v : m.triangles[t]) region_id[v] = 0;
    }
  for (int v = 0; v < m.n_dofs(); ++v)
    if (region_id[v] >= 0) {
      region_id[v] = region.mesh.n_dofs();
      region.mesh.global_ids.push_back(m.global_ids[v]);
      region.mesh.coords.push_back(m.coords[v]);
    }

  std::map<EdgeKey, EdgeKind> subdomain_boundary;
  for (const auto& e : m.boundary_edges) subdomain_boundary[key(e.v[0], e.v[1])] = e.kind;
  std::map<EdgeKey, int> count;
  for (int t : region.triangles) {
    const auto& tri = m.triangles[t];
    region.mesh.triangles.push_back({region_id[tri[0]], region_id[tri[1]], region_id[tri[2]]});
    for (int e = 0; e < 3; ++e) ++count[key(tri[e], tri[(e + 1) % 3])];
  }
  for (int t : region.triangles) {
    const auto& tri = m.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      if (count[key(a, b)] != 1) continue;
      const auto it = subdomain_boundary.find(key(a, b));
      const EdgeKind kind = it == subdomain_boundary.end() ? EdgeKind::Truncation : it->second;
      region.mesh.boundary_edges.push_back({{region_id[a], region_id[b]}, kind});
    }
  }
  for (int v : sd.gamma_local) region.gamma_local.push_back(region_id[v]);
  return region;
}

RMat schur_complement(const SpMatR& matrix, const std::vector<int>& keep) {
  const int n = matrix.rows();
  std::vector<int> pos(n, -1);  // >= 0: index among kept, < 0: -(1 + index among eliminated)
  for (std::size_t g = 0; g < keep.size(); ++g) pos[keep[g]] = static_cast<int>(g);
  int n_elim = 0;
  for (int i = 0; i < n; ++i)
    if (pos[i] < 0) pos[i] = -(1 + n_elim++);
  const int n_keep = static_cast<int>(keep.size());

  RMat kgg = RMat::Zero(n_keep, n_keep);
  RMat kig = RMat::Zero(n_elim, n_keep);
  std::vector<TripletR> trip;
  for (int c = 0; c < matrix.outerSize(); ++c)
    for (SpMatR::InnerIterator it(matrix, c); it; ++it) {
      const int r = pos[it.row()], s = pos[it.col()];
      if (r >= 0 && s >= 0)
        kgg(r, s) += it.value();
      else if (r < 0 && s >= 0)
        kig(-r - 1, s) += it.value();
      else if (r < 0 && s < 0)
        trip.emplace_back(-r - 1, -s - 1, it.value());
    }
  if (n_elim == 0) return kgg;
  SpMatR kii(n_elim, n_elim);
  kii.setFromTriplets(trip.begin(), trip.end());
  const SparseCholesky chol(kii);
  const RMat x = chol.solve(kig);
  RMat s = kgg - kig.transpose() * x;
  return 0.5 * (s + s.transpose());
}

RMat assemble_Tj(const LayeredRegion& region, double kappa, ImpedanceForm form) {
  const SpMatR mass = assemble_mass(region.mesh);
  const SpMatR truncation = assemble_boundary_mass(region.mesh, {EdgeKind::Truncation});
  SpMatR energy;
  if (form == ImpedanceForm::Gradient)
    energy = assemble_stiffness(region.mesh) + kappa * kappa * mass + kappa * truncation;
  else
    energy = (1.0 + kappa * kappa) * mass + kappa * truncation;
  return schur_complement(energy, region.gamma_local);
}

ImpedanceT::ImpedanceT(const Partition& p, double kappa, const ImpedanceOptions& options)
    : n_layers_(options.n_layers) {
  if (!(kappa > 0.0)) throw InvalidInput("impedance needs a positive wavenumber");
  blocks_.resize(p.n_subdomains);
  parallel_for(p.n_subdomains, [&](std::size_t j) {
    const LayeredRegion region = build_layered_subdomain(p, static_cast<int>(j), options.n_layers);
    blocks_[j] = assemble_Tj(region, kappa, options.form);
  });
  factorize();
}

ImpedanceT::ImpedanceT(std::vector<RMat> blocks, int n_layers)
    : blocks_(std::move(blocks)), n_layers_(n_layers) {
  factorize();
}

void ImpedanceT::factorize() {
  factors_.clear();
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    const RMat& t = blocks_[j];
    if (t.rows() != t.cols()) throw InvalidInput("impedance block is not square");
    const double asym = (t - t.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, t.cwiseAbs().maxCoeff()))
      throw NumericalError("impedance block " + std::to_string(j) + " is not symmetric");
    Eigen::LLT<RMat> llt(t);
    if (llt.info() != Eigen::Success)
      throw NumericalError("impedance block " + std::to_string(j) + " is not positive definite");
    factors_.push_back(llt.matrixL());
  }
}

CVec ImpedanceT::apply_block(int j, const CVec& v) const {
  if (v.size() != blocks_[j].rows()) throw InvalidInput("impedance: block size mismatch");
  return real_times(blocks_[j], v);
}

CVec ImpedanceT::apply_inverse_block(int j, const CVec& q) const {
  if (q.size() != blocks_[j].rows()) throw InvalidInput("impedance: block size mismatch");
  const auto l = factors_[j].triangularView<Eigen::Lower>();
  RMat parts(q.size(), 2);
  parts.col(0) = q.real();
  parts.col(1) = q.imag();
  l.solveInPlace(parts);
  l.transpose().solveInPlace(parts);
  CVec out(q.size());
  out.real() = parts.col(0);
  out.imag() = parts.col(1);
  return out;
}

SkeletonVector ImpedanceT::apply(const SkeletonVector& v) const {
  if (v.role() != Role::Primal) throw InvalidInput("impedance T expects a primal vector");
  if (v.n_blocks() != n_blocks()) throw InvalidInput("impedance: block count mismatch");
  std::vector<CVec> out(n_blocks());
  for (int j = 0; j < n_blocks(); ++j) out[j] = apply_block(j, v.block(j));
  return {std::move(out), Role::Dual};
}

SkeletonVector ImpedanceT::apply_inverse(const SkeletonVector& q) const {
  if (q.role() != Role::Dual) throw InvalidInput("impedance inverse expects a dual vector");
  if (q.n_blocks() != n_blocks()) throw InvalidInput("impedance: block count mismatch");
  std::vector<CVec> out(n_blocks());
  for (int j = 0; j < n_blocks(); ++j) out[j] = apply_inverse_block(j, q.block(j));
  return {std::move(out), Role::Primal};
}

double ImpedanceT::checked_sqrt(double sq, double scale) const {
  if (sq < -1e-12 * scale)
    throw NumericalError("impedance norm squared is negative: " + std::to_string(sq));
  return std::sqrt(std::max(sq, 0.0));
}

double ImpedanceT::norm_T(const SkeletonVector& v) const {
  const SkeletonVector tv = apply(v);
  double sq = 0.0, scale = 0.0;
  for (int j = 0; j < n_blocks(); ++j) {
    sq += v.block(j).dot(tv.block(j)).real();  // v^H T v
    scale += v.block(j).squaredNorm() * blocks_[j].cwiseAbs().maxCoeff();
  }
  return checked_sqrt(sq, scale);
}

double ImpedanceT::norm_Tinv(const SkeletonVector& q) const {
  if (q.role() != Role::Dual) throw InvalidInput("T^{-1} norm expects a dual vector");
  if (q.n_blocks() != n_blocks()) throw InvalidInput("impedance: block count mismatch");
  double sq = 0.0;
  for (int j = 0; j < n_blocks(); ++j) {
    // ||L^{-1} q||^2 == q^H T^{-1} q
    RMat parts(q.block(j).size(), 2);
    parts.col(0) = q.block(j).real();
    parts.col(1) = q.block(j).imag();
    factors_[j].triangularView<Eigen::Lower>().solveInPlace(parts);
    sq += parts.squaredNorm();
  }
  return checked_sqrt(sq, 1.0);
}

NNPreconditioner::NNPreconditioner(const Partition& p, const ImpedanceT& t)
    : partition_(&p), impedance_(&t), weights_(p.n_sigma()) {
  if (t.n_blocks() != p.n_subdomains) throw InvalidInput("preconditioner: block count mismatch");
  for (int s = 0; s < p.n_sigma(); ++s) weights_[s] = 1.0 / p.multiplicity[s];
}

CVec NNPreconditioner::apply(const CVec& b) const {
  const CVec wb = weights_.cast<Complex>().cwiseProduct(b);
  std::vector<CVec> local = restrict_to_boundaries(*partition_, wb);
  for (int j = 0; j < partition_->n_subdomains; ++j)
    local[j] = impedance_->apply_inverse_block(j, local[j]);
  return weights_.cast<Complex>().cwiseProduct(sum_from_boundaries(*partition_, local));
}

SingleTrace NNPreconditioner::apply(const SingleTrace& b) const {
  if (b.role != Role::Dual) throw InvalidInput("preconditioner expects a dual skeleton trace");
  return {apply(b.values), Role::Primal};
}

SpMatR assemble_skeleton_impedance(const Partition& p, const ImpedanceT& t) {
  std::vector<TripletR> trip;
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto& map = p.subdomains[j].gamma_sigma;
    const RMat& tj = t.block(j);
    for (int a = 0; a < tj.rows(); ++a)
      for (int b = 0; b < tj.cols(); ++b) trip.emplace_back(map[a], map[b], tj(a, b));
  }
  SpMatR m(p.n_sigma(), p.n_sigma());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace gosm

#include "gosm/ddm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace gosm {

namespace {

SpMatC robin_local_operator(const ComplexSparseMatrix& a, const Subdomain& sd, const RMat& tj) {
  std::vector<TripletC> trip;
  trip.reserve(a.matrix.nonZeros() + tj.size());
  for (int c = 0; c < a.matrix.outerSize(); ++c)
    for (SpMatC::InnerIterator it(a.matrix, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int r = 0; r < tj.rows(); ++r)
    for (int c = 0; c < tj.cols(); ++c)
      trip.emplace_back(sd.gamma_local[r], sd.gamma_local[c], -kI * tj(r, c));
  SpMatC f(a.matrix.rows(), a.matrix.cols());
  f.setFromTriplets(trip.begin(), trip.end());
  return f;
}

std::vector<ComplexSparseMatrix> assemble_all(const Partition& p, double kappa) {
  std::vector<ComplexSparseMatrix> out(p.n_subdomains);
  parallel_for(p.n_subdomains, [&](std::size_t j) { out[j] = assemble_subdomain(p.subdomains[j].mesh, kappa); });
  return out;
}

std::vector<SparseLu> factorize_all(const Partition& p, const std::vector<ComplexSparseMatrix>& a,
                                    const ImpedanceT& t) {
  std::vector<std::optional<SparseLu>> slots(p.n_subdomains);
  parallel_for(p.n_subdomains, [&](std::size_t j) {
    slots[j].emplace(robin_local_operator(a[j], p.subdomains[j], t.block(static_cast<int>(j))));
  });
  std::vector<SparseLu> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

VolumeTuple assemble_loads(const Partition& p, const HelmholtzProblem& problem) {
  std::vector<CVec> blocks(p.n_subdomains);
  for (int j = 0; j < p.n_subdomains; ++j) blocks[j] = assemble_load(p.subdomains[j].mesh, problem);
  return {std::move(blocks), Role::Dual};
}

CVec gather(const CVec& local, const std::vector<int>& idx) {
  CVec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = local[idx[i]];
  return out;
}

void check_dual(const Partition& p, const SkeletonVector& q, const char* what) {
  if (q.role() != Role::Dual) throw InvalidInput(std::string(what) + " expects a dual skeleton vector");
  if (q.n_blocks() != p.n_subdomains) throw InvalidInput(std::string(what) + ": block count mismatch");
  for (int j = 0; j < p.n_subdomains; ++j)
    if (q.block(j).size() != p.gamma_size(j)) throw InvalidInput(std::string(what) + ": block size mismatch");
}

}  // namespace

DdmSystem::DdmSystem(const TriMesh& mesh, Partition partition, const HelmholtzProblem& problem,
                     const ImpedanceOptions& impedance)
    : partition_(std::move(partition)),
      problem_((problem.validate(), problem)),
      impedance_(partition_, problem_.kappa, impedance),
      local_matrices_(assemble_all(partition_, problem_.kappa)),
      local_solvers_(factorize_all(partition_, local_matrices_, impedance_)),
      skeleton_(assemble_skeleton_impedance(partition_, impedance_)),
      skeleton_solver_(skeleton_),
      load_(assemble_loads(partition_, problem_)) {
  if (static_cast<int>(partition_.elem_owner.size()) != mesh.n_triangles())
    throw InvalidInput("partition does not match the mesh");
  g_ = compute_g();
}

CVec DdmSystem::solve_local(int j, const CVec& rhs) const { return local_solvers_[j].solve(rhs); }

SkeletonVector DdmSystem::apply_S(const SkeletonVector& q) const {
  check_dual(partition_, q, "apply_S");
  std::vector<CVec> out(partition_.n_subdomains);
  parallel_for(partition_.n_subdomains, [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    const auto& sd = partition_.subdomains[j];
    CVec w = CVec::Zero(sd.mesh.n_dofs());
    for (int g = 0; g < partition_.gamma_size(j); ++g) w[sd.gamma_local[g]] = q.block(j)[g];
    const CVec u = solve_local(j, w);
    out[j] = q.block(j) + 2.0 * kI * impedance_.apply_block(j, gather(u, sd.gamma_local));
  });
  return {std::move(out), Role::Dual};
}

CMat DdmSystem::scattering_block(int j) const {
  const auto& sd = partition_.subdomains[j];
  const int gj = partition_.gamma_size(j);
  CMat e = CMat::Zero(sd.mesh.n_dofs(), gj);
  for (int c = 0; c < gj; ++c) e(sd.gamma_local[c], c) = 1.0;
  const CMat u = local_solvers_[j].solve(e);
  CMat trace(gj, gj);
  for (int r = 0; r < gj; ++r) trace.row(r) = u.row(sd.gamma_local[r]);
  const RMat& t = impedance_.block(j);
  CMat out = CMat::Identity(gj, gj);
  out.real() -= 2.0 * t * trace.imag();
  out.imag() += 2.0 * t * trace.real();
  return out;
}

SkeletonVector DdmSystem::apply_S_adjoint(const SkeletonVector& q) const {
  std::vector<CVec> out(partition_.n_subdomains);
  parallel_for(partition_.n_subdomains, [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    const auto& sd = partition_.subdomains[j];
    const CVec t = impedance_.apply_block(j, q.block(j));
    CVec w = CVec::Zero(sd.mesh.n_dofs());
    for (int g = 0; g < partition_.gamma_size(j); ++g) w[sd.gamma_local[g]] = t[g];
    // F is complex symmetric, so F^{-H} w = conj(F^{-1} conj(w))
    const CVec u = solve_local(j, w.conjugate()).conjugate();
    out[j] = q.block(j) - 2.0 * kI * gather(u, sd.gamma_local);
  });
  return {std::move(out), q.role()};
}

SkeletonVector DdmSystem::compute_g() const {
  SkeletonVector g = apply_exchange_exact(scattered_load());
  g *= -1.0;
  return g;
}

SkeletonVector DdmSystem::scattered_load() const {
  std::vector<CVec> out(partition_.n_subdomains);
  parallel_for(partition_.n_subdomains, [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    const CVec u = solve_local(j, load_.block(j));
    out[j] = 2.0 * kI * impedance_.apply_block(j, gather(u, partition_.subdomains[j].gamma_local));
  });
  return {std::move(out), Role::Dual};
}

SingleTrace DdmSystem::apply_skeleton_impedance(const SingleTrace& p) const {
  if (p.role != Role::Primal) throw InvalidInput("R^T T R expects a primal skeleton trace");
  return {real_times(skeleton_, p.values), Role::Dual};
}

SingleTrace DdmSystem::solve_skeleton(const SingleTrace& b) const {
  if (b.role != Role::Dual) throw InvalidInput("skeleton solve expects a dual skeleton trace");
  return {skeleton_solver_.solve(b.values), Role::Primal};
}

double DdmSystem::skeleton_energy_norm(const SingleTrace& p) const {
  return std::sqrt(std::max(p.values.dot(real_times(skeleton_, p.values)).real(), 0.0));
}

SkeletonVector DdmSystem::exchange_from_solution(const SkeletonVector& q, const SingleTrace& p) const {
  SkeletonVector out = impedance_.apply(apply_R(partition_, p));
  out *= 2.0;
  out -= q;
  return out;
}

SkeletonVector DdmSystem::apply_exchange_exact(const SkeletonVector& q) const {
  check_dual(partition_, q, "apply_exchange_exact");
  return exchange_from_solution(q, solve_skeleton(apply_R_adjoint(partition_, q)));
}

SkeletonVector DdmSystem::apply_exchange_adjoint(const SkeletonVector& q) const {
  std::vector<CVec> t(partition_.n_subdomains);
  for (int j = 0; j < partition_.n_subdomains; ++j) t[j] = impedance_.apply_block(j, q.block(j));
  const CVec p = skeleton_solver_.solve(sum_from_boundaries(partition_, t));
  std::vector<CVec> out = restrict_to_boundaries(partition_, p);
  for (int j = 0; j < partition_.n_subdomains; ++j) out[j] = 2.0 * out[j] - q.block(j);
  return {std::move(out), q.role()};
}

ExchangeResult DdmSystem::apply_exchange_approx(const SkeletonVector& q, const SingleTrace& x0, int k_max,
                                                double rel_tol) const {
  check_dual(partition_, q, "apply_exchange_approx");
  if (x0.role != Role::Primal) throw InvalidInput("PCG initial guess must be a primal skeleton trace");
  const SingleTrace b = apply_R_adjoint(partition_, q);
  const NNPreconditioner precond = preconditioner();
  PcgOutcome outcome = pcg([&](const CVec& v) { return real_times(skeleton_, v); },
                           [&](const CVec& v) { return precond.apply(v); }, b.values, x0.values,
                           PcgOptions{k_max, rel_tol, 5});
  SingleTrace p{outcome.x, Role::Primal};
  SkeletonVector value = exchange_from_solution(q, p);
  return {std::move(value), std::move(p), std::move(outcome)};
}

SkeletonVector DdmSystem::apply_skeleton_operator(const SkeletonVector& q) const {
  return q + apply_exchange_exact(apply_S(q));
}

VolumeTuple DdmSystem::reconstruct_u(const SkeletonVector& q) const {
  check_dual(partition_, q, "reconstruct_u");
  const VolumeTuple rhs = apply_B_adjoint(partition_, q) + load_;
  std::vector<CVec> out(partition_.n_subdomains);
  parallel_for(partition_.n_subdomains, [&](std::size_t j) {
    out[j] = solve_local(static_cast<int>(j), rhs.block(static_cast<int>(j)));
  });
  return {std::move(out), Role::Primal};
}

namespace {

std::vector<CMat> scattering_blocks(const DdmSystem& system) {
  std::vector<CMat> blocks(system.partition().n_subdomains);
  parallel_for(blocks.size(), [&](std::size_t j) { blocks[j] = system.scattering_block(static_cast<int>(j)); });
  return blocks;
}

}  // namespace

CMat dense_scattering(const DdmSystem& system) {
  const Partition& p = system.partition();
  const std::vector<CMat> blocks = scattering_blocks(system);
  CMat s = CMat::Zero(p.n_multi(), p.n_multi());
  for (int j = 0; j < p.n_subdomains; ++j) s.block(p.offsets[j], p.offsets[j], p.gamma_size(j), p.gamma_size(j)) = blocks[j];
  return s;
}

RMat dense_exchange(const DdmSystem& system) {
  const Partition& p = system.partition();
  const int n = p.n_multi();
  RMat rt = RMat::Zero(p.n_sigma(), n);  // R^T
  for (int j = 0; j < p.n_subdomains; ++j)
    for (int a = 0; a < p.gamma_size(j); ++a) rt(p.subdomains[j].gamma_sigma[a], p.offsets[j] + a) = 1.0;
  const SparseCholesky chol(system.skeleton_impedance());
  const RMat x = chol.solve(rt);  // (R^T T R)^{-1} R^T
  RMat pi(n, n);
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto& map = p.subdomains[j].gamma_sigma;
    RMat rx(map.size(), n);
    for (std::size_t a = 0; a < map.size(); ++a) rx.row(a) = x.row(map[a]);
    pi.middleRows(p.offsets[j], p.gamma_size(j)) = 2.0 * system.impedance().block(j) * rx;
  }
  pi -= RMat::Identity(n, n);
  return pi;
}

CMat dense_skeleton_operator(const DdmSystem& system) {
  const Partition& p = system.partition();
  const int n = p.n_multi();
  const RMat pi = dense_exchange(system);
  const std::vector<CMat> blocks = scattering_blocks(system);
  CMat out(n, n);
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto cols = pi.middleCols(p.offsets[j], p.gamma_size(j));
    const RMat re = cols * blocks[j].real();
    const RMat im = cols * blocks[j].imag();
    out.middleCols(p.offsets[j], p.gamma_size(j)).real() = re;
    out.middleCols(p.offsets[j], p.gamma_size(j)).imag() = im;
  }
  out += CMat::Identity(n, n);
  return out;
}

SkeletonVector reference_skeleton_solution(const DdmSystem& system) {
  const Partition& p = system.partition();
  const SkeletonVector& g = system.g();
  const double g_norm = system.impedance().norm_Tinv(g);
  if (g_norm == 0.0) return zero_skeleton(p, Role::Dual);
  const CMat op = dense_skeleton_operator(system);
  const Eigen::PartialPivLU<CMat> lu(op);
  const CVec q = lu.solve(g.flat());
  if (!q.allFinite()) throw NumericalError("reference solution: singular skeleton operator");
  const SkeletonVector residual = skeleton_from_flat(p, Role::Dual, op * q - g.flat());
  const double rel = system.impedance().norm_Tinv(residual) / g_norm;
  if (!(rel <= 1e-10))
    throw NumericalError("reference solution: relative residual " + std::to_string(rel) + " exceeds 1e-10");
  return skeleton_from_flat(p, Role::Dual, q);
}

void RichardsonConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("relaxation parameter must lie in (0, 1)");
  if (k_max && *k_max < 0) throw InvalidInput("PCG cap must be non-negative");
  if (max_iterations < 0) throw InvalidInput("outer iteration cap must be non-negative");
  if (plateau_window < 0) throw InvalidInput("plateau window must be non-negative");
  if (!(step_tolerance >= 0.0)) throw InvalidInput("step tolerance must be non-negative");
}

std::optional<int> ConvergenceHistory::iterations_to_target(double target) const {
  for (const auto& r : records)
    if (r.rel_error < target) return r.n;
  return std::nullopt;
}

double ConvergenceHistory::min_error() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : records)
    if (!std::isnan(r.rel_error)) m = std::min(m, r.rel_error);
  return m;
}

bool plateau_detected(const ConvergenceHistory& history, int window, double improvement) {
  const auto& r = history.records;
  if (window <= 0 || static_cast<int>(r.size()) <= window) return false;
  const double now = r.back().rel_error;
  const double before = r[r.size() - 1 - window].rel_error;
  return now > (1.0 - improvement) * before;
}

RichardsonResult richardson(const DdmSystem& system, const RichardsonConfig& config,
                            const SkeletonVector* reference) {
  config.validate();
  const Partition& part = system.partition();
  const ImpedanceT& t = system.impedance();
  const double alpha = config.alpha;

  const double ref_norm = reference ? t.norm_Tinv(*reference) : 0.0;
  auto relative_error = [&](const SkeletonVector& q) {
    if (!reference) return std::numeric_limits<double>::quiet_NaN();
    const double e = t.norm_Tinv(q - *reference);
    return ref_norm > 0.0 ? e / ref_norm : e;
  };

  RichardsonResult result;
  result.q = zero_skeleton(part, Role::Dual);
  SingleTrace p{CVec::Zero(part.n_sigma()), Role::Primal};
  const SingleTrace zero_trace = p;
  const int unbounded_cap = std::max(1000, 10 * part.n_sigma());

  result.history.records.push_back({0, relative_error(result.q), 0, 0.0});
  if (result.history.records.back().rel_error < config.target) {
    result.reached_target = true;
    return result;
  }

  for (int n = 1; n <= config.max_iterations; ++n) {
    const SkeletonVector sq = system.apply_S(result.q);
    IterationRecord rec;
    rec.n = n;
    SingleTrace p_next;
    if (config.mode == ExchangeMode::Exact) {
      p_next = system.solve_skeleton(apply_R_adjoint(part, sq));
    } else {
      const SingleTrace& x0 = config.recycle ? p : zero_trace;
      const SingleTrace b = apply_R_adjoint(part, sq);
      ExchangeResult ex =
          system.apply_exchange_approx(sq, x0, config.k_max.value_or(unbounded_cap), config.pcg_rel_tol);
      p_next = std::move(ex.p);
      rec.pcg_iterations = ex.pcg.iterations;
      const SingleTrace exact = system.solve_skeleton(b);
      rec.inner_error = system.skeleton_energy_norm({exact.values - p_next.values, Role::Primal});
    }
    // q <- ((1 - alpha) Id + alpha S) q - 2 alpha T R p + alpha g
    SkeletonVector q_next = Complex(1.0 - alpha) * result.q + Complex(alpha) * sq;
    SkeletonVector trp = t.apply(apply_R(part, p_next));
    trp *= 2.0 * alpha;
    q_next -= trp;
    q_next += Complex(alpha) * system.g();

    rec.step_norm = t.norm_Tinv(q_next - result.q);
    result.q = std::move(q_next);
    p = std::move(p_next);
    rec.rel_error = relative_error(result.q);
    result.history.records.push_back(rec);

    if (rec.rel_error > 1e6)
      throw NumericalError("richardson: diverged (relative error " + std::to_string(rec.rel_error) + ")");
    if (rec.rel_error < config.target) {
      result.reached_target = true;
      break;
    }
    if (config.step_tolerance > 0.0 && rec.step_norm <= config.step_tolerance * t.norm_Tinv(result.q)) {
      result.step_converged = true;
      break;
    }
    if (config.plateau_window > 0 &&
        plateau_detected(result.history, config.plateau_window, config.plateau_improvement)) {
      result.plateau = true;
      break;
    }
  }
  return result;
}

GlobalField glue_volume(const Partition& p, const VolumeTuple& u, int n_vertices) {
  if (u.n_blocks() != p.n_subdomains) throw InvalidInput("glue_volume: block count mismatch");
  std::vector<std::vector<Complex>> values(n_vertices);
  for (int j = 0; j < p.n_subdomains; ++j) {
    const auto& ids = p.subdomains[j].mesh.global_ids;
    if (static_cast<int>(ids.size()) != u.block(j).size()) throw InvalidInput("glue_volume: block size mismatch");
    for (std::size_t a = 0; a < ids.size(); ++a) values[ids[a]].push_back(u.block(j)[a]);
  }
  GlobalField out;
  out.u = CVec::Zero(n_vertices);
  for (int g = 0; g < n_vertices; ++g) {
    const auto& v = values[g];
    for (std::size_t a = 0; a < v.size(); ++a) {
      out.u[g] += v[a];
      for (std::size_t b = a + 1; b < v.size(); ++b) out.max_jump = std::max(out.max_jump, std::abs(v[a] - v[b]));
    }
    if (!v.empty()) out.u[g] /= static_cast<double>(v.size());
  }
  return out;
}

}  // namespace gosm

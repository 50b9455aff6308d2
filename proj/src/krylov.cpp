#include "gosm/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace gosm {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Cap: return "cap";
    case StopReason::Tolerance: return "tolerance";
    case StopReason::Stagnation: return "stagnation";
  }
  return "?";
}

PcgOutcome pcg(const LinearOp& apply_M, const LinearOp& apply_P, const CVec& b, const CVec& x0,
               const PcgOptions& options) {
  if (b.size() != x0.size()) throw InvalidInput("pcg: right-hand side and initial guess differ in size");
  if (options.max_iterations < 0) throw InvalidInput("pcg: negative iteration cap");
  const double floor = 1e2 * std::numeric_limits<double>::epsilon();
  const double stagnation_level = std::sqrt(std::numeric_limits<double>::epsilon());

  PcgOutcome out;
  out.x = x0;
  CVec r = b - apply_M(x0);
  CVec z = apply_P(r);
  double rz = r.dot(z).real();  // r^H P r
  if (rz < 0.0) throw NumericalError("pcg: preconditioner is not positive definite");
  if (rz == 0.0) {
    out.residual_history.push_back(0.0);
    out.stop = StopReason::Tolerance;
    return out;
  }

  double b_norm = 0.0;
  if (x0.isZero(0.0)) {
    b_norm = std::sqrt(rz);
  } else {
    const double bpb = b.dot(apply_P(b)).real();
    if (bpb < 0.0) throw NumericalError("pcg: preconditioner is not positive definite");
    b_norm = std::sqrt(bpb);
  }
  if (b_norm == 0.0) b_norm = std::sqrt(rz);

  double res = std::sqrt(rz) / b_norm;
  out.residual_history.push_back(res);
  auto converged = [&](double value) -> bool {
    if (value <= options.rel_tol) {
      out.stop = StopReason::Tolerance;
      return true;
    }
    if (value <= floor) {
      out.stop = StopReason::Stagnation;
      return true;
    }
    return false;
  };
  if (converged(res)) return out;

  double best = res;
  int since_best = 0;
  CVec p = z;
  out.stop = StopReason::Cap;
  for (int k = 0; k < options.max_iterations; ++k) {
    const CVec q = apply_M(p);
    const double pq = p.dot(q).real();
    if (!(pq > 0.0)) throw NumericalError("pcg: operator is not positive definite (p^H M p <= 0)");
    const double step = rz / pq;
    out.x += step * p;
    r -= step * q;
    z = apply_P(r);
    const double rz_new = r.dot(z).real();
    if (rz_new < 0.0) throw NumericalError("pcg: preconditioner is not positive definite");
    ++out.iterations;
    res = std::sqrt(rz_new) / b_norm;
    out.residual_history.push_back(res);
    if (rz_new == 0.0 || converged(res)) {
      if (rz_new == 0.0) out.stop = StopReason::Tolerance;
      return out;
    }
    if (res < best) {
      best = res;
      since_best = 0;
    } else if (++since_best >= options.stagnation_window && best <= stagnation_level) {
      out.stop = StopReason::Stagnation;
      return out;
    }
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  out.stop = StopReason::Cap;
  return out;
}

CMat dense_matrix(const LinearOp& op, int dim) {
  CMat m(dim, dim);
  CVec e = CVec::Zero(dim);
  for (int c = 0; c < dim; ++c) {
    e[c] = 1.0;
    m.col(c) = op(e);
    e[c] = 0.0;
  }
  return m;
}

namespace {

ConditionEstimate from_extremes(double lo, double hi, bool approximate) {
  if (!(lo > 0.0)) throw NumericalError("condition estimate: non-positive eigenvalue " + std::to_string(lo));
  return {hi / lo, lo, hi, approximate};
}

ConditionEstimate dense_hermitian(const CMat& a) {
  const CMat h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  const RVec ev = es.eigenvalues();
  return from_extremes(ev.minCoeff(), ev.maxCoeff(), false);
}

// Lanczos with full reorthogonalisation for an operator self-adjoint in the inner product
// <x, y>_G = y^H G x. When apply_G is empty, G is the identity.
ConditionEstimate lanczos(const LinearOp& apply_A, const LinearOp& apply_G, int dim,
                          const ConditionOptions& options) {
  const int steps = std::min(dim, options.lanczos_steps);
  auto gram = [&](const CVec& v) { return apply_G ? apply_G(v) : v; };
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  CVec v(dim);
  for (auto& c : v) c = Complex(normal(rng), normal(rng));
  CVec gv = gram(v);
  double nrm = std::sqrt(v.dot(gv).real());
  v /= nrm;
  gv /= nrm;

  std::vector<CVec> basis{v}, gbasis{gv};
  std::vector<double> alpha, beta;
  for (int j = 0; j < steps; ++j) {
    CVec w = apply_A(basis[j]);
    alpha.push_back(gbasis[j].dot(w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < basis.size(); ++i) w -= gbasis[i].dot(w) * basis[i];
    const CVec gw = gram(w);
    const double b = std::sqrt(std::max(w.dot(gw).real(), 0.0));
    if (j + 1 == steps || b <= 1e-12 * std::abs(alpha.back())) break;
    beta.push_back(b);
    basis.push_back(w / b);
    gbasis.push_back(gw / b);
  }
  const int m = static_cast<int>(alpha.size());
  RMat tri = RMat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    tri(i, i) = alpha[i];
    if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(tri, Eigen::EigenvaluesOnly);
  return from_extremes(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), true);
}

}  // namespace

ConditionEstimate estimate_condition(const LinearOp& apply_op, int dim, const ConditionOptions& options) {
  if (dim < 1) throw InvalidInput("estimate_condition: empty operator");
  if (dim <= options.dense_threshold) return dense_hermitian(dense_matrix(apply_op, dim));
  return lanczos(apply_op, LinearOp{}, dim, options);
}

ConditionEstimate estimate_condition_preconditioned(const LinearOp& apply_M, const LinearOp& apply_P,
                                                    int dim, const ConditionOptions& options) {
  if (dim < 1) throw InvalidInput("estimate_condition: empty operator");
  if (dim <= options.dense_threshold) {
    const CMat m = dense_matrix(apply_M, dim);
    const CMat p = dense_matrix(apply_P, dim);
    Eigen::LLT<CMat> llt(0.5 * (p + p.adjoint()));
    if (llt.info() != Eigen::Success) throw NumericalError("estimate_condition: preconditioner is not HPD");
    const CMat l = llt.matrixL();
    return dense_hermitian(l.adjoint() * m * l);
  }
  return lanczos([&](const CVec& v) { return apply_P(apply_M(v)); }, apply_M, dim, options);
}

}  // namespace gosm

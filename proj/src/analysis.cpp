#include "gosm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace gosm {

namespace {

using FlatOp = std::function<CVec(const CVec&)>;

// Blockwise products with the Cholesky factors of T on the flat multi-trace layout.
enum class Factor { L, Linv, LT, LinvT };

// Triangular solve with a real factor, on real and imaginary parts separately.
template <int Mode, typename Tri, typename Rhs>
CMat real_triangular_solve(const Tri& l, const Rhs& rhs) {
  CMat out(rhs.rows(), rhs.cols());
  out.real() = l.template triangularView<Mode>().solve(RMat(rhs.real()));
  out.imag() = l.template triangularView<Mode>().solve(RMat(rhs.imag()));
  return out;
}

CVec apply_factor(const DdmSystem& s, const CVec& x, Factor f) {
  const Partition& p = s.partition();
  CVec out(x.size());
  for (int j = 0; j < p.n_subdomains; ++j) {
    const RMat& l = s.impedance().cholesky_factor(j);
    const auto xj = x.segment(p.offsets[j], p.gamma_size(j));
    auto oj = out.segment(p.offsets[j], p.gamma_size(j));
    switch (f) {
      case Factor::L: oj = l.cast<Complex>() * xj; break;
      case Factor::LT: oj = l.transpose().cast<Complex>() * xj; break;
      case Factor::Linv: oj = real_triangular_solve<Eigen::Lower>(l, xj); break;
      case Factor::LinvT: oj = real_triangular_solve<Eigen::Upper>(l.transpose(), xj); break;
    }
  }
  return out;
}

// Pi S on flat vectors and its Euclidean adjoint.
CVec pi_s(const DdmSystem& s, const CVec& x) {
  const Partition& p = s.partition();
  return s.apply_exchange_exact(s.apply_S(skeleton_from_flat(p, Role::Dual, x))).flat();
}

CVec pi_s_adjoint(const DdmSystem& s, const CVec& x) {
  const Partition& p = s.partition();
  return s.apply_S_adjoint(s.apply_exchange_adjoint(skeleton_from_flat(p, Role::Dual, x))).flat();
}

// Largest eigenvalue of a hermitian positive semi-definite operator.
double power_iteration(const FlatOp& op, int dim, const SpectralOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  CVec v(dim);
  for (auto& c : v) c = Complex(normal(rng), normal(rng));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < options.power_iterations; ++it) {
    const CVec w = op(v);
    const double next = v.dot(w).real();
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    const bool done = it > 0 && std::abs(next - lambda) <= options.power_tol * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return lambda;
}

// sigma_min(Id + W) and sigma_max((1 - alpha) Id - alpha W) for the whitened W = L^-1 Pi S L.
SpectralValue dense_gamma(const CMat& w) {
  const CMat x = CMat::Identity(w.rows(), w.cols()) + w;
  const RVec sv = Eigen::BDCSVD<CMat>(x).singularValues();
  return {sv.minCoeff(), false};
}

SpectralValue dense_rho(const CMat& w, double alpha) {
  const CMat x = (1.0 - alpha) * CMat::Identity(w.rows(), w.cols()) - alpha * w;
  const RVec sv = Eigen::BDCSVD<CMat>(x).singularValues();
  return {sv.maxCoeff(), false};
}

CMat whitened_pi_s(const DdmSystem& system) {
  const int n = system.partition().n_multi();
  return whiten(system, dense_skeleton_operator(system) - CMat::Identity(n, n));
}

SpectralValue power_gamma(const DdmSystem& s, const SpectralOptions& options) {
  const int n = s.partition().n_multi();
  auto x = [&](const CVec& v) { return CVec(v + apply_factor(s, pi_s(s, apply_factor(s, v, Factor::L)), Factor::Linv)); };
  auto xh = [&](const CVec& v) {
    return CVec(v + apply_factor(s, pi_s_adjoint(s, apply_factor(s, v, Factor::LinvT)), Factor::LT));
  };
  // ||Id + W|| <= 2, so 4 Id - X^H X is positive semi-definite with top eigenvalue 4 - gamma^2
  const double top = power_iteration([&](const CVec& v) { return CVec(4.0 * v - xh(x(v))); }, n, options);
  return {std::sqrt(std::max(4.0 - top, 0.0)), true};
}

SpectralValue power_rho(const DdmSystem& s, double alpha, const SpectralOptions& options) {
  const int n = s.partition().n_multi();
  auto w = [&](const CVec& v) { return apply_factor(s, pi_s(s, apply_factor(s, v, Factor::L)), Factor::Linv); };
  auto wh = [&](const CVec& v) {
    return apply_factor(s, pi_s_adjoint(s, apply_factor(s, v, Factor::LinvT)), Factor::LT);
  };
  auto y = [&](const CVec& v) { return CVec((1.0 - alpha) * v - alpha * w(v)); };
  auto yh = [&](const CVec& v) { return CVec((1.0 - alpha) * v - alpha * wh(v)); };
  return {std::sqrt(power_iteration([&](const CVec& v) { return yh(y(v)); }, n, options)), true};
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("relaxation parameter must lie in (0, 1)");
}

void check_gamma(const SpectralValue& g) {
  if (!(g.value > 0.0)) throw NumericalError("gamma_h vanishes: Id + Pi S is not injective");
}

}  // namespace

CMat whiten(const DdmSystem& system, const CMat& x) {
  const Partition& p = system.partition();
  CMat out = x;
  for (int j = 0; j < p.n_subdomains; ++j) {
    auto rows = out.middleRows(p.offsets[j], p.gamma_size(j));
    rows = real_triangular_solve<Eigen::Lower>(system.impedance().cholesky_factor(j), rows);
  }
  for (int j = 0; j < p.n_subdomains; ++j) {
    const RMat& l = system.impedance().cholesky_factor(j);
    auto cols = out.middleCols(p.offsets[j], p.gamma_size(j));
    const RMat re = cols.real() * l;
    const RMat im = cols.imag() * l;
    cols.real() = re;
    cols.imag() = im;
  }
  return out;
}

SpectralValue compute_gamma_h(const DdmSystem& system, const SpectralOptions& options) {
  const SpectralValue g = system.partition().n_multi() <= options.dense_threshold
                              ? dense_gamma(whitened_pi_s(system))
                              : power_gamma(system, options);
  check_gamma(g);
  return g;
}

SpectralValue compute_rho(const DdmSystem& system, double alpha, const SpectralOptions& options) {
  check_alpha(alpha);
  return system.partition().n_multi() <= options.dense_threshold ? dense_rho(whitened_pi_s(system), alpha)
                                                                 : power_rho(system, alpha, options);
}

SpectralConstants compute_spectral_constants(const DdmSystem& system, double alpha,
                                             const SpectralOptions& options) {
  check_alpha(alpha);
  SpectralConstants c;
  if (system.partition().n_multi() <= options.dense_threshold) {
    const CMat w = whitened_pi_s(system);
    c.gamma_h = dense_gamma(w);
    c.rho = dense_rho(w, alpha);
  } else {
    c.gamma_h = power_gamma(system, options);
    c.rho = power_rho(system, alpha, options);
  }
  check_gamma(c.gamma_h);
  return c;
}

ConditionEstimate skeleton_condition(const DdmSystem& system, const ConditionOptions& options) {
  const NNPreconditioner pre = system.preconditioner();
  const SpMatR& m = system.skeleton_impedance();
  return estimate_condition_preconditioned([&](const CVec& v) { return real_times(m, v); },
                                           [&](const CVec& v) { return pre.apply(v); },
                                           system.partition().n_sigma(), options);
}

double epsilon_of_k(double cond, int k) {
  if (!(cond >= 1.0)) throw InvalidInput("condition number must be >= 1");
  if (k < 0) throw InvalidInput("iteration count must be non-negative");
  const double s = std::sqrt(cond);
  return 2.0 * std::pow((s - 1.0) / (s + 1.0), k);
}

FrakR frakR_norm(double rho, double eps) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("rho must lie in (0, 1)");
  if (!(eps >= 0.0)) throw InvalidInput("epsilon must be non-negative");
  const double b = rho + 4.0 * eps;
  FrakR r;
  r.norm = 0.5 * b + 0.5 * std::sqrt(b * b + 8.0 * (2.0 - rho) * eps);
  r.coarse_bound = b + 2.0 * std::sqrt(eps);
  if (r.norm > r.coarse_bound * (1.0 + 1e-14)) throw NumericalError("frakR root exceeds its coarse bound");
  return r;
}

Eigen::Matrix2d frakR_matrix(double rho, double eps) {
  Eigen::Matrix2d m;
  const double off = 2.0 * std::sqrt(eps * (1.0 + eps));
  m << rho + 2.0 * eps, off, off, 2.0 * eps;
  return m;
}

int min_k_for_convergence(double cond, double alpha, double gamma_h) {
  check_alpha(alpha);
  if (!(gamma_h > 0.0)) throw InvalidInput("gamma_h must be positive");
  if (!(cond >= 1.0)) throw InvalidInput("condition number must be >= 1");
  if (cond == 1.0) return 0;
  const double a = alpha * (1.0 - alpha) * gamma_h * gamma_h / 4.0;
  const double threshold = a * a;
  const double s = std::sqrt(cond);
  const double base = (s - 1.0) / (s + 1.0);
  int k = std::max(0, static_cast<int>(std::floor(std::log(threshold / 2.0) / std::log(base))));
  while (epsilon_of_k(cond, k) >= threshold) ++k;
  while (k > 0 && epsilon_of_k(cond, k - 1) < threshold) --k;
  return k;
}

double RateEstimates::approx_rate() const { return rho + 4.0 * std::sqrt(epsilon); }

RateEstimates compute_rates(const DdmSystem& system, double alpha, int k, const SpectralOptions& spectral,
                            const ConditionOptions& condition) {
  const SpectralConstants sc = compute_spectral_constants(system, alpha, spectral);
  const ConditionEstimate ce = skeleton_condition(system, condition);
  RateEstimates r;
  r.alpha = alpha;
  r.gamma_h = sc.gamma_h.value;
  r.rho = sc.rho.value;
  r.rho_bound = 1.0 - alpha * (1.0 - alpha) * r.gamma_h * r.gamma_h;
  r.cond = std::max(ce.cond, 1.0);
  r.k_min = min_k_for_convergence(r.cond, alpha, r.gamma_h);
  r.k = k < 0 ? r.k_min : k;
  r.epsilon = epsilon_of_k(r.cond, r.k);
  const FrakR fr = frakR_norm(r.rho, r.epsilon);
  r.frakR = fr.norm;
  r.frakR_coarse = fr.coarse_bound;
  r.approximate = sc.gamma_h.approximate || sc.rho.approximate || ce.approximate;
  return r;
}

int EnvelopeReport::violations() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const EnvelopeCheck& c) { return !c.ok; }));
}

EnvelopeReport verify_envelope(const ConvergenceHistory& history, double rate, double seed,
                               double reference_norm) {
  EnvelopeReport report;
  report.rate = rate;
  report.seed = seed;
  if (!(rate < 1.0)) {
    report.applicable = false;
    return report;
  }
  const double scale = reference_norm > 0.0 ? reference_norm : 1.0;
  for (const auto& rec : history.records) {
    if (rec.n < 1) continue;
    if (std::isnan(rec.rel_error)) throw InvalidInput("envelope check needs errors against a reference");
    EnvelopeCheck c;
    c.n = rec.n;
    c.measured = rec.rel_error * scale;
    c.bound = seed * std::pow(rate, rec.n) / (1.0 - rate);
    c.ok = c.measured <= c.bound;
    report.checks.push_back(c);
  }
  return report;
}

void write_rates_csv(std::ostream& os, const RateEstimates& r) {
  os << "alpha,gamma_h,rho,rho_bound,cond,k_min,k,epsilon,frakR_norm,frakR_coarse,approximate\n";
  os << std::setprecision(17) << r.alpha << ',' << r.gamma_h << ',' << r.rho << ',' << r.rho_bound << ','
     << r.cond << ',' << r.k_min << ',' << r.k << ',' << r.epsilon << ',' << r.frakR << ',' << r.frakR_coarse
     << ',' << (r.approximate ? 1 : 0) << '\n';
}

SkeletonVector random_dual(const Partition& p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SkeletonVector q = zero_skeleton(p, Role::Dual);
  for (int j = 0; j < p.n_subdomains; ++j)
    for (auto& c : q.block(j)) c = Complex(normal(rng), normal(rng));
  return q;
}

std::vector<PropertyCheck> run_property_suite(const DdmSystem& system, double gamma_h,
                                              const PropertyOptions& options) {
  check_alpha(options.alpha);
  const Partition& p = system.partition();
  const ImpedanceT& t = system.impedance();
  std::mt19937_64 rng(options.seed);

  double unitarity = 0.0, involution = 0.0, s_ratio = 0.0, map_ratio = 0.0;
  double coercive = std::numeric_limits<double>::infinity();
  for (int i = 0; i < options.samples; ++i) {
    const SkeletonVector q = random_dual(p, rng);
    const double nq = t.norm_Tinv(q);
    const SkeletonVector pq = system.apply_exchange_exact(q);
    unitarity = std::max(unitarity, std::abs(t.norm_Tinv(pq) / nq - 1.0));
    involution = std::max(involution, t.norm_Tinv(system.apply_exchange_exact(pq) - q) / nq);
    const SkeletonVector sq = system.apply_S(q);
    s_ratio = std::max(s_ratio, t.norm_Tinv(sq) / nq);
    const SkeletonVector pisq = system.apply_exchange_exact(sq);
    const SkeletonVector step = Complex(1.0 - options.alpha) * q - Complex(options.alpha) * pisq;
    map_ratio = std::max(map_ratio, t.norm_Tinv(step) / nq);
    // Re <(Id + Pi S) q, T^-1 conj(q)> / ||q||^2
    const Complex form = pairing(q + pisq, t.apply_inverse(q).conjugate());
    coercive = std::min(coercive, form.real() / (nq * nq));
  }

  std::vector<PropertyCheck> checks;
  checks.push_back({"exchange_unitarity", unitarity <= 1e-10, unitarity, 1e-10});
  checks.push_back({"exchange_involution", involution <= 1e-10, involution, 1e-10});
  checks.push_back({"scattering_contraction", s_ratio <= 1.0 + 1e-10, s_ratio, 1.0 + 1e-10});
  checks.push_back({"richardson_map_contraction", map_ratio <= 1.0 + 1e-10, map_ratio, 1.0 + 1e-10});
  const double coercive_floor = 0.5 * gamma_h * gamma_h * (1.0 - 1e-8);
  checks.push_back({"coercivity", coercive >= coercive_floor, coercive, coercive_floor});

  if (p.n_multi() <= 1500) {
    const CMat dense = dense_skeleton_operator(system);
    double worst = 0.0;
    for (int i = 0; i < std::min(options.samples, 20); ++i) {
      const SkeletonVector q = random_dual(p, rng);
      const CVec mf = system.apply_skeleton_operator(q).flat();
      worst = std::max(worst, (dense * q.flat() - mf).norm() / mf.norm());
    }
    checks.push_back({"dense_matrix_free_consistency", worst <= 1e-11, worst, 1e-11});
  }
  return checks;
}

}  // namespace gosm

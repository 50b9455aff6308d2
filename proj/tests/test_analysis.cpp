#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gosm/analysis.hpp"
#include "support.hpp"

using namespace gosm;

namespace {

const testing::SmallSystem& small() {
  static const testing::SmallSystem s({-1, -1, 1, 1}, 0.125, 4, 6.0, 2, Rect{-0.25, -0.25, 0.25, 0.25});
  return s;
}

CMat block_tinv(const DdmSystem& sys) {
  const Partition& p = sys.partition();
  CMat t = CMat::Zero(p.n_multi(), p.n_multi());
  for (int j = 0; j < p.n_subdomains; ++j)
    t.block(p.offsets[j], p.offsets[j], p.gamma_size(j), p.gamma_size(j)) = sys.impedance().block(j).inverse().cast<Complex>();
  return t;
}

// Extreme values of ||X q||_{T^-1} / ||q||_{T^-1} from the generalized eigenproblem
// X^H T^-1 X v = mu T^-1 v.
std::pair<double, double> generalized_extremes(const CMat& x, const CMat& tinv) {
  const CMat a = x.adjoint() * tinv * x;
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> es(0.5 * (a + a.adjoint()), tinv);
  return {std::sqrt(std::max(0.0, es.eigenvalues().minCoeff())), std::sqrt(es.eigenvalues().maxCoeff())};
}

}  // namespace

TEST_CASE("epsilon of k") {
  CHECK(epsilon_of_k(4.0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(epsilon_of_k(4.0, 3) == doctest::Approx(2.0 / 27.0).epsilon(1e-15));
  CHECK(epsilon_of_k(9.0, 2) == doctest::Approx(0.5 * 0.5 * 2.0).epsilon(1e-15));
  CHECK(epsilon_of_k(7.3, 0) == 2.0);
  CHECK(epsilon_of_k(1.0, 5) == 0.0);
  CHECK_THROWS_AS(epsilon_of_k(0.5, 1), InvalidInput);
  CHECK_THROWS_AS(epsilon_of_k(2.0, -1), InvalidInput);
}

TEST_CASE("recursion matrix norm") {
  const FrakR f = frakR_norm(0.5, 0.01);
  CHECK(f.norm == doctest::Approx(0.590780).epsilon(1e-6));
  CHECK(f.coarse_bound == doctest::Approx(0.5 + 0.04 + 0.2).epsilon(1e-15));
  CHECK(frakR_norm(0.7, 0.0).norm == doctest::Approx(0.7).epsilon(1e-15));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99), e(0.0, 0.05);
  for (int t = 0; t < 100; ++t) {
    const double rho = u(rng), eps = e(rng);
    const Eigen::Matrix2d m = frakR_matrix(rho, eps);
    const double largest = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues().cwiseAbs().maxCoeff();
    const FrakR fr = frakR_norm(rho, eps);
    CHECK(fr.norm == doctest::Approx(largest).epsilon(1e-12));
    CHECK(fr.norm <= fr.coarse_bound * (1.0 + 1e-15));
  }
  CHECK_THROWS_AS(frakR_norm(1.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(frakR_norm(0.5, -0.1), InvalidInput);
}

TEST_CASE("minimal PCG cap") {
  CHECK(min_k_for_convergence(4.0, 0.5, 0.5) == 9);
  for (double cond : {1.5, 3.0, 10.0, 100.0})
    for (double gamma : {0.05, 0.3, 1.0, 2.0}) {
      const int k = min_k_for_convergence(cond, 0.5, gamma);
      const double threshold = std::pow(0.25 * 0.5 * 0.5 * gamma * gamma, 2);
      CHECK(epsilon_of_k(cond, k) < threshold);
      if (k > 0) CHECK(epsilon_of_k(cond, k - 1) >= threshold);
      CHECK(min_k_for_convergence(2.0 * cond, 0.5, gamma) >= k);
      CHECK(min_k_for_convergence(cond, 0.5, 0.5 * gamma) >= k);
      // at k_min the recursion matrix is a contraction for rho at its bound
      const double rho = 1.0 - 0.25 * gamma * gamma;
      if (rho > 0.0) CHECK(frakR_norm(rho, epsilon_of_k(cond, k)).norm < 1.0);
    }
}

TEST_CASE("gamma and rho against a generalized eigenproblem oracle") {
  const DdmSystem& sys = small().system;
  const CMat pis = dense_skeleton_operator(sys) - CMat::Identity(sys.partition().n_multi(), sys.partition().n_multi());
  const CMat tinv = block_tinv(sys);
  const int n = static_cast<int>(pis.rows());

  const SpectralConstants c = compute_spectral_constants(sys, 0.5);
  const auto [gmin, gmax] = generalized_extremes(CMat::Identity(n, n) + pis, tinv);
  CHECK(c.gamma_h.value == doctest::Approx(gmin).epsilon(1e-8));
  CHECK(gmax <= 2.0 + 1e-10);
  CHECK(c.gamma_h.value > 0.0);
  CHECK(c.gamma_h.value <= 2.0);
  CHECK_FALSE(c.gamma_h.approximate);
  CHECK(compute_gamma_h(sys).value == doctest::Approx(c.gamma_h.value).epsilon(1e-12));

  for (double alpha : {0.25, 0.5, 0.75}) {
    const double rho = compute_rho(sys, alpha).value;
    const double oracle = generalized_extremes(CMat((1.0 - alpha) * CMat::Identity(n, n) - alpha * pis), tinv).second;
    CHECK(rho == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(rho <= 1.0 - alpha * (1.0 - alpha) * gmin * gmin + 1e-9);
  }
  CHECK(compute_rho(sys, 1e-6).value >= 1.0 - 1e-4);
  CHECK_THROWS_AS(compute_rho(sys, 0.0), InvalidInput);
}

TEST_CASE("random sampling never beats the infimum") {
  const DdmSystem& sys = small().system;
  const double gamma = compute_gamma_h(sys).value;
  std::mt19937_64 rng(8);
  double best = 1e300;
  for (int s = 0; s < 10000; ++s) {
    const SkeletonVector q = random_dual(sys.partition(), rng);
    best = std::min(best, sys.impedance().norm_Tinv(sys.apply_skeleton_operator(q)) / sys.impedance().norm_Tinv(q));
  }
  CHECK(best >= gamma * (1.0 - 1e-10));
}

TEST_CASE("power iteration agrees with dense values") {
  const DdmSystem& sys = small().system;
  SpectralOptions power;
  power.dense_threshold = 0;
  power.power_iterations = 5000;
  const SpectralConstants dense = compute_spectral_constants(sys, 0.5);
  const SpectralConstants approx = compute_spectral_constants(sys, 0.5, power);
  CHECK(approx.gamma_h.approximate);
  CHECK(approx.rho.approximate);
  CHECK(approx.rho.value == doctest::Approx(dense.rho.value).epsilon(0.01));
  CHECK(approx.gamma_h.value == doctest::Approx(dense.gamma_h.value).epsilon(0.05));
}

TEST_CASE("rate estimates are consistent") {
  const DdmSystem& sys = small().system;
  const RateEstimates r = compute_rates(sys, 0.5);
  CHECK(r.rho <= r.rho_bound + 1e-9);
  CHECK(r.rho_bound == doctest::Approx(1.0 - 0.25 * r.gamma_h * r.gamma_h).epsilon(1e-15));
  CHECK(r.cond >= 1.0);
  CHECK(r.k == r.k_min);
  CHECK(r.epsilon == epsilon_of_k(r.cond, r.k));
  CHECK(r.frakR < 1.0);
  CHECK(r.approx_rate() == doctest::Approx(r.rho + 4.0 * std::sqrt(r.epsilon)).epsilon(1e-15));
  CHECK(skeleton_condition(sys).cond == doctest::Approx(r.cond).epsilon(1e-12));

  std::ostringstream os;
  write_rates_csv(os, r);
  CHECK(os.str().rfind("alpha,gamma_h,rho,rho_bound,cond,k_min,k,epsilon,frakR_norm,frakR_coarse,approximate\n", 0) == 0);
}

TEST_CASE("envelope check") {
  ConvergenceHistory h;
  h.records.push_back({0, 1.0});
  for (int n = 1; n <= 20; ++n) h.records.push_back({n, std::pow(0.5, n)});
  // bound s r^n / (1 - r) with s = 1, r = 0.5 is 2^(1-n)
  EnvelopeReport ok = verify_envelope(h, 0.5, 1.0, 1.0);
  CHECK(ok.applicable);
  CHECK(ok.checks.size() == 20);
  CHECK(ok.passed());
  EnvelopeReport tight = verify_envelope(h, 0.4, 1.0, 1.0);
  CHECK(tight.violations() > 0);
  CHECK_FALSE(verify_envelope(h, 1.0, 1.0, 1.0).applicable);

  ConvergenceHistory zero;
  for (int n = 0; n <= 5; ++n) zero.records.push_back({n, 0.0});
  CHECK(verify_envelope(zero, 0.9, 0.0, 0.0).passed());

  ConvergenceHistory missing;
  missing.records.push_back({1});
  CHECK_THROWS_AS(verify_envelope(missing, 0.5, 1.0, 1.0), InvalidInput);
}

TEST_CASE("property suite passes on a small system") {
  const DdmSystem& sys = small().system;
  const double gamma = compute_gamma_h(sys).value;
  PropertyOptions o;
  o.samples = 30;
  const std::vector<PropertyCheck> checks = run_property_suite(sys, gamma, o);
  CHECK(checks.size() == 6);
  for (const auto& c : checks) {
    INFO(c.name << " worst " << c.worst << " tol " << c.tolerance);
    CHECK(c.passed);
  }
  // an overstated gamma breaks coercivity
  bool coercivity_failed = false;
  for (const auto& c : run_property_suite(sys, 2.0, o))
    if (c.name == "coercivity") coercivity_failed = !c.passed;
  CHECK(coercivity_failed);
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "gosm/ddm.hpp"

namespace gosm {

struct SpectralOptions {
  int dense_threshold = 5000;  ///< dense SVD up to this many multi-trace dofs
  int power_iterations = 500;
  double power_tol = 1e-10;
  std::uint64_t seed = 2024;
};

struct SpectralValue {
  double value = 0.0;
  bool approximate = false;  ///< power-iteration estimate
};

/// L^{-1} X L with T = L L^T blockwise, so that T^{-1}-norms of X become Euclidean norms.
CMat whiten(const DdmSystem& system, const CMat& x);

/// inf ||(Id + Pi S) q||_{T^-1} / ||q||_{T^-1}. Throws NumericalError on a zero value.
SpectralValue compute_gamma_h(const DdmSystem& system, const SpectralOptions& options = {});
/// sup ||((1 - alpha) Id - alpha Pi S) q||_{T^-1} / ||q||_{T^-1}.
SpectralValue compute_rho(const DdmSystem& system, double alpha, const SpectralOptions& options = {});

struct SpectralConstants {
  SpectralValue gamma_h;
  SpectralValue rho;
};
/// Both constants from a single dense assembly.
SpectralConstants compute_spectral_constants(const DdmSystem& system, double alpha,
                                             const SpectralOptions& options = {});

/// Condition number of the NN-preconditioned skeleton impedance P R^T T R.
ConditionEstimate skeleton_condition(const DdmSystem& system, const ConditionOptions& options = {});

/// 2 ((sqrt(cond) - 1) / (sqrt(cond) + 1))^k. Throws InvalidInput for cond < 1 or k < 0.
double epsilon_of_k(double cond, int k);

struct FrakR {
  double norm = 0.0;          ///< positive root of l^2 - l (rho + 4 eps) - 2 (2 - rho) eps
  double coarse_bound = 0.0;  ///< rho + 4 eps + 2 sqrt(eps)
};
/// Throws InvalidInput unless 0 < rho < 1 and eps >= 0.
FrakR frakR_norm(double rho, double eps);
/// The symmetric 2x2 recursion matrix [[rho + 2 eps, 2 sqrt(eps (1 + eps))], [., 2 eps]].
Eigen::Matrix2d frakR_matrix(double rho, double eps);

/// Smallest k with epsilon_of_k(cond, k) < (alpha (1 - alpha) gamma_h^2 / 4)^2.
int min_k_for_convergence(double cond, double alpha, double gamma_h);

struct RateEstimates {
  double alpha = 0.5;
  double gamma_h = 0.0;
  double rho = 0.0;
  double rho_bound = 0.0;  ///< 1 - alpha (1 - alpha) gamma_h^2
  double cond = 1.0;
  int k_min = 0;
  int k = 0;               ///< PCG cap the epsilon below refers to
  double epsilon = 0.0;
  double frakR = 0.0;
  double frakR_coarse = 0.0;
  bool approximate = false;

  /// rho + 4 sqrt(epsilon): the rate of the approximate-iteration envelope.
  double approx_rate() const;
};

/// All constants for the given alpha; k defaults to k_min when negative.
RateEstimates compute_rates(const DdmSystem& system, double alpha, int k = -1,
                            const SpectralOptions& spectral = {}, const ConditionOptions& condition = {});

struct EnvelopeCheck {
  int n = 0;
  double measured = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct EnvelopeReport {
  bool applicable = true;  ///< false when rate >= 1 ("theory inapplicable")
  double rate = 0.0;
  double seed = 0.0;
  std::vector<EnvelopeCheck> checks;

  int violations() const;
  bool passed() const { return violations() == 0; }
};

/// Checks ||q_n - q_inf|| <= seed rate^n / (1 - rate) for n >= 1 with seed = ||q_1 - q_0||.
/// Errors in the history are relative and are scaled by reference_norm (taken as 1 when 0).
EnvelopeReport verify_envelope(const ConvergenceHistory& history, double rate, double seed,
                               double reference_norm);

void write_rates_csv(std::ostream& os, const RateEstimates& rates);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  double worst = 0.0;  ///< worst observed value of the checked quantity
  double tolerance = 0.0;
};

struct PropertyOptions {
  int samples = 100;
  std::uint64_t seed = 7;
  double alpha = 0.5;
};

/// Random-vector property suites: exchange unitarity and involution, contraction of S and of
/// the Richardson map, coercivity with the given gamma_h, dense vs matrix-free consistency.
std::vector<PropertyCheck> run_property_suite(const DdmSystem& system, double gamma_h,
                                              const PropertyOptions& options = {});

/// Complex vector with independent standard normal real and imaginary parts.
SkeletonVector random_dual(const Partition& p, std::mt19937_64& rng);

}  // namespace gosm

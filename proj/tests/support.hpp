#pragma once

#include <random>

#include "gosm/ddm.hpp"
#include "gosm/mesh.hpp"

namespace testing {

inline gosm::TriMesh unit_square(double h) { return gosm::build_mesh({{0.0, 0.0, 1.0, 1.0}, std::nullopt, h}); }

inline gosm::TriMesh holed_square(double h) {
  return gosm::build_mesh({{-1.0, -1.0, 1.0, 1.0}, gosm::Rect{-0.25, -0.25, 0.25, 0.25}, h});
}

inline gosm::CVec random_cvec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  gosm::CVec v(n);
  for (auto& c : v) c = {normal(rng), normal(rng)};
  return v;
}

inline gosm::RMat random_spd(int n, double shift, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  gosm::RMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  return a * a.transpose() + shift * gosm::RMat::Identity(n, n);
}

/// Q diag(lambda) Q^H with Q a random unitary and lambda uniform in [1, cond] (both ends attained).
inline gosm::CMat random_hpd_with_cond(int n, double cond, std::mt19937_64& rng) {
  gosm::CMat g(n, n);
  for (int j = 0; j < n; ++j) g.col(j) = random_cvec(n, rng);
  const gosm::CMat q = g.householderQr().householderQ();
  std::uniform_real_distribution<double> u(1.0, cond);
  gosm::RVec lambda(n);
  for (auto& l : lambda) l = u(rng);
  lambda[0] = 1.0;
  if (n > 1) lambda[1] = cond;
  return q * lambda.cast<gosm::Complex>().asDiagonal() * q.adjoint();
}

/// Small Helmholtz DDM system on a rectangle, cheap enough for dense oracles.
struct SmallSystem {
  gosm::TriMesh mesh;
  gosm::DdmSystem system;

  SmallSystem(gosm::Rect outer, double h, int J, double kappa, int layers = 2,
              std::optional<gosm::Rect> hole = std::nullopt)
      : mesh(gosm::build_mesh({outer, hole, h})),
        system(mesh, gosm::partition_mesh(mesh, J), problem(kappa), {layers, gosm::ImpedanceForm::Gradient}) {}

  static gosm::HelmholtzProblem problem(double kappa) {
    gosm::HelmholtzProblem p;
    p.kappa = kappa;
    return p;
  }
};

}  // namespace testing

#pragma once

#include <array>

#include "gosm/ddm.hpp"
#include "gosm/fem.hpp"

namespace testing {

using namespace gosm;

// Independent oracle: P1 basis coefficients from the 3x3 Vandermonde system, stiffness from
// constant gradients, mass by the edge-midpoint rule (exact for quadratics).
struct ElementOracle {
  Eigen::Matrix3d stiffness, mass;
};

inline ElementOracle quadrature_oracle(const std::array<Point, 3>& p) {
  Eigen::Matrix3d v;
  for (int i = 0; i < 3; ++i) v.row(i) << 1.0, p[i].x, p[i].y;
  const Eigen::Matrix3d coef = v.inverse();  // column a: coefficients of phi_a
  const double area = 0.5 * std::abs(v.determinant());
  ElementOracle o;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) o.stiffness(a, b) = area * (coef(1, a) * coef(1, b) + coef(2, a) * coef(2, b));
  o.mass.setZero();
  for (int e = 0; e < 3; ++e) {
    const Point m{0.5 * (p[e].x + p[(e + 1) % 3].x), 0.5 * (p[e].y + p[(e + 1) % 3].y)};
    Eigen::Vector3d phi;
    for (int a = 0; a < 3; ++a) phi[a] = coef(0, a) + coef(1, a) * m.x + coef(2, a) * m.y;
    o.mass += area / 3.0 * phi * phi.transpose();
  }
  return o;
}

// Dense operators assembled directly from their definitions.
struct DenseOracle {
  CMat S, Pi, g, tinv;
  int n = 0;

  explicit DenseOracle(const DdmSystem& sys) {
    const Partition& p = sys.partition();
    n = p.n_multi();
    S = CMat::Zero(n, n);
    RMat t = RMat::Zero(n, n), r = RMat::Zero(n, p.n_sigma());
    CVec scattered(n);
    for (int j = 0; j < p.n_subdomains; ++j) {
      const int o = p.offsets[j], m = p.gamma_size(j);
      const Subdomain& sd = p.subdomains[j];
      const RMat& tj = sys.impedance().block(j);
      t.block(o, o, m, m) = tj;
      for (int k = 0; k < m; ++k) r(o + k, sd.gamma_sigma[k]) = 1.0;
      CMat f = CMat(sys.local_matrix(j).matrix);
      RMat b = RMat::Zero(m, f.rows());
      for (int k = 0; k < m; ++k) b(k, sd.gamma_local[k]) = 1.0;
      f -= Complex(0, 1) * (b.transpose() * tj * b).cast<Complex>();
      const CMat finv = f.inverse();
      const CMat tb = (tj * b).cast<Complex>();
      S.block(o, o, m, m) = CMat::Identity(m, m) + Complex(0, 2) * tb * finv * b.transpose().cast<Complex>();
      scattered.segment(o, m) = Complex(0, 2) * tb * finv * sys.load().block(j);
    }
    Pi = (2.0 * t * r * (r.transpose() * t * r).inverse() * r.transpose() - RMat::Identity(n, n)).cast<Complex>();
    g = -Pi * scattered;
    tinv = t.inverse().cast<Complex>();
  }
};

}  // namespace testing

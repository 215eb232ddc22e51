#pragma once

// Reference implementations used only by the tests.

#include <Eigen/Dense>
#include <complex>
#include <cmath>
#include <random>

#include "qfrac/qalgebra.hpp"

namespace qfrac::oracle {

/// Left-multiplication matrix of a + b e1 + c e2 + d e3 on R^4.
inline Eigen::Matrix4d left_matrix(const Quaternion& q) {
  const double a = q.s0, b = q.s1, c = q.s2, d = q.s3;
  Eigen::Matrix4d m;
  m << a, -b, -c, -d,
       b,  a, -d,  c,
       c,  d,  a, -b,
       d, -c,  b,  a;
  return m;
}

inline Eigen::Vector4d as_vec(const Quaternion& q) { return {q.s0, q.s1, q.s2, q.s3}; }

using C = std::complex<double>;
using M2 = Eigen::Matrix<C, 2, 2>;

/// a + b e1 + c e2 + d e3 -> [[a + bI, c + dI], [-c + dI, a - bI]].
inline M2 su2(const Quaternion& q) {
  const C I(0.0, 1.0);
  M2 m;
  m << q.s0 + I * q.s1, q.s2 + I * q.s3,
       -q.s2 + I * q.s3, q.s0 - I * q.s1;
  return m;
}

/// q1 + i q2 -> su2(q1) + I su2(q2), with the central unit sent to the scalar I.
inline M2 biquaternion_matrix(const CQuaternion& u) { return su2(u.q1) + C(0.0, 1.0) * su2(u.q2); }

inline Quaternion random_quaternion(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng), n(rng), n(rng)};
}

inline Quaternion random_unit_imaginary(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Quaternion j{0.0, n(rng), n(rng), n(rng)};
  return (1.0 / abs(j)) * j;
}

inline CQuaternion random_cquaternion(std::mt19937_64& rng, double scale = 1.0) {
  return {random_quaternion(rng, scale), random_quaternion(rng, scale)};
}

/// lambda^alpha by direct quadrature of the scalar contour integral
/// (1/2pi) int_R -(s - lambda)^{-1} lambda s^{alpha-1} dt, s = -i t, on t = e^u with the trapezoid rule.
/// Beyond t = e^U the leading term -lambda s^{alpha-2} is integrated exactly.
inline double scalar_fractional_power(double lambda, double alpha) {
  const double h = 1.0 / 64.0, L = -160.0, U = 60.0;
  const int n = static_cast<int>((U - L) / h);
  double total = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = std::exp(L + k * h);
    const double w = (k == 0 || k == n) ? 0.5 * h : h;
    for (double sign : {1.0, -1.0}) {
      const C s(0.0, -sign * t);
      const double arg = sign > 0 ? -M_PI / 2 : M_PI / 2;
      const C pw = std::polar(std::pow(t, alpha - 1.0), (alpha - 1.0) * arg);
      const C f = -lambda / (s - lambda) * pw;
      total += f.real() * t * w;
    }
  }
  total += -2.0 * lambda * std::cos((alpha - 2.0) * M_PI / 2) * std::exp(U * (alpha - 1.0)) / (1.0 - alpha);
  return total / (2.0 * M_PI);
}

}  // namespace qfrac::oracle

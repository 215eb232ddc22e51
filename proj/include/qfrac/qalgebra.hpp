#pragma once

#include <array>
#include <cmath>

namespace qfrac {

/// Real quaternion s0 + s1 e1 + s2 e2 + s3 e3.
struct Quaternion {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;

  static constexpr Quaternion real(double r) { return {r, 0.0, 0.0, 0.0}; }
  static constexpr Quaternion unit(int l) {
    Quaternion q;
    if (l == 0) q.s1 = 1.0;
    if (l == 1) q.s2 = 1.0;
    if (l == 2) q.s3 = 1.0;
    return q;
  }

  constexpr double operator[](int k) const { return k == 0 ? s0 : k == 1 ? s1 : k == 2 ? s2 : s3; }
  constexpr double& operator[](int k) { return k == 0 ? s0 : k == 1 ? s1 : k == 2 ? s2 : s3; }

  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

constexpr Quaternion operator+(const Quaternion& a, const Quaternion& b) {
  return {a.s0 + b.s0, a.s1 + b.s1, a.s2 + b.s2, a.s3 + b.s3};
}
constexpr Quaternion operator-(const Quaternion& a, const Quaternion& b) {
  return {a.s0 - b.s0, a.s1 - b.s1, a.s2 - b.s2, a.s3 - b.s3};
}
constexpr Quaternion operator-(const Quaternion& a) { return {-a.s0, -a.s1, -a.s2, -a.s3}; }
constexpr Quaternion operator*(double r, const Quaternion& a) {
  return {r * a.s0, r * a.s1, r * a.s2, r * a.s3};
}
constexpr Quaternion operator*(const Quaternion& a, double r) { return r * a; }

/// Hamilton product with e1^2 = e2^2 = e3^2 = e1 e2 e3 = -1.
constexpr Quaternion qmul(const Quaternion& a, const Quaternion& b) {
  return {a.s0 * b.s0 - a.s1 * b.s1 - a.s2 * b.s2 - a.s3 * b.s3,
          a.s0 * b.s1 + a.s1 * b.s0 + a.s2 * b.s3 - a.s3 * b.s2,
          a.s0 * b.s2 - a.s1 * b.s3 + a.s2 * b.s0 + a.s3 * b.s1,
          a.s0 * b.s3 + a.s1 * b.s2 - a.s2 * b.s1 + a.s3 * b.s0};
}
constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) { return qmul(a, b); }

constexpr Quaternion conj(const Quaternion& a) { return {a.s0, -a.s1, -a.s2, -a.s3}; }
constexpr double norm2(const Quaternion& a) {
  return a.s0 * a.s0 + a.s1 * a.s1 + a.s2 * a.s2 + a.s3 * a.s3;
}
inline double abs(const Quaternion& a) { return std::sqrt(norm2(a)); }
constexpr double re(const Quaternion& a) { return a.s0; }
constexpr Quaternion vec(const Quaternion& a) { return {0.0, a.s1, a.s2, a.s3}; }
/// Throws on zero input.
Quaternion inverse(const Quaternion& a);

/// Complexified quaternion q1 + i q2, i central.
struct CQuaternion {
  Quaternion q1, q2;

  static constexpr CQuaternion from(const Quaternion& q) { return {q, {}}; }
  static constexpr CQuaternion i_times(const Quaternion& q) { return {{}, q}; }

  /// Flat view: components 0..3 from q1, 4..7 from q2.
  constexpr double operator[](int k) const { return k < 4 ? q1[k] : q2[k - 4]; }
  constexpr double& operator[](int k) { return k < 4 ? q1[k] : q2[k - 4]; }

  friend constexpr bool operator==(const CQuaternion&, const CQuaternion&) = default;
};

constexpr CQuaternion operator+(const CQuaternion& a, const CQuaternion& b) {
  return {a.q1 + b.q1, a.q2 + b.q2};
}
constexpr CQuaternion operator-(const CQuaternion& a, const CQuaternion& b) {
  return {a.q1 - b.q1, a.q2 - b.q2};
}
constexpr CQuaternion operator-(const CQuaternion& a) { return {-a.q1, -a.q2}; }
constexpr CQuaternion operator*(double r, const CQuaternion& a) { return {r * a.q1, r * a.q2}; }

/// (q1 + i q2)(w1 + i w2) = (q1 w1 - q2 w2) + i (q1 w2 + q2 w1).
constexpr CQuaternion cqmul(const CQuaternion& u, const CQuaternion& v) {
  return {qmul(u.q1, v.q1) - qmul(u.q2, v.q2), qmul(u.q1, v.q2) + qmul(u.q2, v.q1)};
}
constexpr CQuaternion operator*(const CQuaternion& u, const CQuaternion& v) { return cqmul(u, v); }

/// Right multiplication by a real quaternion.
constexpr CQuaternion operator*(const CQuaternion& u, const Quaternion& q) {
  return {qmul(u.q1, q), qmul(u.q2, q)};
}
/// Left multiplication by a real quaternion.
constexpr CQuaternion operator*(const Quaternion& q, const CQuaternion& u) {
  return {qmul(q, u.q1), qmul(q, u.q2)};
}

/// Multiplication by the central unit i.
constexpr CQuaternion times_i(const CQuaternion& u) { return {-u.q2, u.q1}; }

/// <u, v> = conj(q1) w1 + conj(q2) w2.
constexpr Quaternion inner(const CQuaternion& u, const CQuaternion& v) {
  return qmul(conj(u.q1), v.q1) + qmul(conj(u.q2), v.q2);
}
constexpr double norm2(const CQuaternion& u) { return norm2(u.q1) + norm2(u.q2); }
inline double abs(const CQuaternion& u) { return std::sqrt(norm2(u)); }

/// Point s = j t on the slice through the imaginary unit j.
struct SlicePoint {
  Quaternion j;
  double t = 0.0;

  /// Validates Re(j) = 0 and |j| = 1 (to 1e-12) and renormalises.
  static SlicePoint make(const Quaternion& j, double t);
  Quaternion value() const { return t * j; }
};

/// Principal-branch power s^beta on the slice plane; throws for t = 0.
Quaternion slice_power(const SlicePoint& s, double beta);

/// Unit quaternion q with q^{-1} e1 q = j, for transporting vectors between slices.
Quaternion slice_frame(const Quaternion& j);

/// Row-major 8x8 real block acting on the flat 8-vector of a CQuaternion.
using Block8 = std::array<double, 64>;

Block8 left_block(const CQuaternion& c);
Block8 right_block(const Quaternion& q);
Block8 block_identity(double scale = 1.0);
Block8 block_mul(const Block8& a, const Block8& b);
Block8 block_transpose(const Block8& a);
void block_axpy(double alpha, const Block8& x, Block8& y);
CQuaternion block_apply(const Block8& b, const CQuaternion& u);

}  // namespace qfrac

#include "qfrac/qalgebra.hpp"

#include <numbers>
#include <stdexcept>

namespace qfrac {

Quaternion inverse(const Quaternion& a) {
  const double n2 = norm2(a);
  if (n2 == 0.0) throw std::domain_error("inverse of zero quaternion");
  return (1.0 / n2) * conj(a);
}

SlicePoint SlicePoint::make(const Quaternion& j, double t) {
  if (std::abs(j.s0) > 1e-12) throw std::invalid_argument("slice unit must be purely imaginary");
  const double n = abs(j);
  if (std::abs(n - 1.0) > 1e-12) throw std::invalid_argument("slice unit must have modulus 1");
  return {(1.0 / n) * vec(j), t};
}

Quaternion slice_power(const SlicePoint& s, double beta) {
  if (s.t == 0.0) throw std::domain_error("slice_power: s = 0 is the branch point");
  // s = |t| e^{j theta} with theta = +pi/2 for t > 0 and -pi/2 for t < 0.
  const double r = std::abs(s.t);
  const double theta = s.t > 0.0 ? std::numbers::pi / 2 : -std::numbers::pi / 2;
  const double mag = std::pow(r, beta);
  return Quaternion::real(mag * std::cos(beta * theta)) + (mag * std::sin(beta * theta)) * s.j;
}

Quaternion slice_frame(const Quaternion& j) {
  const Quaternion e1 = Quaternion::unit(0);
  // q = normalise(1 - e1 j) rotates j onto e1 under x -> q x q^{-1}.
  Quaternion q = Quaternion::real(1.0) - qmul(e1, j);
  const double n = abs(q);
  if (n < 1e-8) return Quaternion::unit(1);  // j = -e1: a half turn about e2
  return (1.0 / n) * q;
}

namespace {

// Column k of the block is the image of basis vector k.
template <class F>
Block8 block_from(F&& map) {
  Block8 b{};
  for (int k = 0; k < 8; ++k) {
    CQuaternion e{};
    e[k] = 1.0;
    const CQuaternion img = map(e);
    for (int r = 0; r < 8; ++r) b[r * 8 + k] = img[r];
  }
  return b;
}

}  // namespace

Block8 left_block(const CQuaternion& c) {
  return block_from([&](const CQuaternion& e) { return cqmul(c, e); });
}

Block8 right_block(const Quaternion& q) {
  return block_from([&](const CQuaternion& e) { return e * q; });
}

Block8 block_identity(double scale) {
  Block8 b{};
  for (int k = 0; k < 8; ++k) b[k * 9] = scale;
  return b;
}

Block8 block_mul(const Block8& a, const Block8& b) {
  Block8 c{};
  for (int r = 0; r < 8; ++r)
    for (int k = 0; k < 8; ++k) {
      const double ark = a[r * 8 + k];
      if (ark == 0.0) continue;
      for (int col = 0; col < 8; ++col) c[r * 8 + col] += ark * b[k * 8 + col];
    }
  return c;
}

Block8 block_transpose(const Block8& a) {
  Block8 t{};
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) t[c * 8 + r] = a[r * 8 + c];
  return t;
}

void block_axpy(double alpha, const Block8& x, Block8& y) {
  for (int k = 0; k < 64; ++k) y[k] += alpha * x[k];
}

CQuaternion block_apply(const Block8& b, const CQuaternion& u) {
  CQuaternion out{};
  for (int r = 0; r < 8; ++r) {
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) acc += b[r * 8 + k] * u[k];
    out[r] = acc;
  }
  return out;
}

}  // namespace qfrac

#include <doctest.h>

#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "qfrac/qalgebra.hpp"

using namespace qfrac;

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

double max_diff(const Quaternion& a, const Quaternion& b) {
  double d = 0.0;
  for (int k = 0; k < 4; ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

double max_diff(const CQuaternion& a, const CQuaternion& b) {
  double d = 0.0;
  for (int k = 0; k < 8; ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("unit relations") {
  const Quaternion e1 = Quaternion::unit(0), e2 = Quaternion::unit(1), e3 = Quaternion::unit(2);
  CHECK(e1 * e1 == Quaternion::real(-1.0));
  CHECK(e2 * e2 == Quaternion::real(-1.0));
  CHECK(e3 * e3 == Quaternion::real(-1.0));
  CHECK(e1 * e2 * e3 == Quaternion::real(-1.0));
  CHECK(e1 * e2 == e3);
  CHECK(e2 * e1 == -e3);
  CHECK(e2 * e3 == e1);
  CHECK(e3 * e1 == e2);
}

TEST_CASE("quaternion product matches the 4x4 real representation") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Quaternion a = oracle::random_quaternion(rng), b = oracle::random_quaternion(rng);
    const Eigen::Vector4d ref = oracle::left_matrix(a) * oracle::as_vec(b);
    const Quaternion p = a * b;
    for (int k = 0; k < 4; ++k) REQUIRE(std::abs(p[k] - ref[k]) <= 8 * eps * abs(a) * abs(b));
  }
}

TEST_CASE("left representation is multiplicative") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Quaternion a = oracle::random_quaternion(rng), b = oracle::random_quaternion(rng);
    const Eigen::Matrix4d lhs = oracle::left_matrix(a * b);
    const Eigen::Matrix4d rhs = oracle::left_matrix(a) * oracle::left_matrix(b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 16 * eps * abs(a) * abs(b));
  }
}

TEST_CASE("complexified product matches the 2x2 complex representation") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 10000; ++i) {
    const CQuaternion u = oracle::random_cquaternion(rng), v = oracle::random_cquaternion(rng);
    const oracle::M2 ref = oracle::biquaternion_matrix(u) * oracle::biquaternion_matrix(v);
    const oracle::M2 got = oracle::biquaternion_matrix(u * v);
    REQUIRE((ref - got).cwiseAbs().maxCoeff() <= 16 * eps * abs(u) * abs(v));
  }
}

TEST_CASE("norm multiplicativity and conjugation") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 10000; ++i) {
    const Quaternion a = oracle::random_quaternion(rng), b = oracle::random_quaternion(rng);
    REQUIRE(std::abs(abs(a * b) - abs(a) * abs(b)) <= 8 * eps * abs(a) * abs(b));
    REQUIRE(max_diff(conj(a * b), conj(b) * conj(a)) <= 8 * eps * abs(a) * abs(b));
  }
}

TEST_CASE("central unit commutes and squares to -1") {
  std::mt19937_64 rng(15);
  const CQuaternion i = CQuaternion::i_times(Quaternion::real(1.0));
  CHECK(i * i == CQuaternion::from(Quaternion::real(-1.0)));
  for (int k = 0; k < 100; ++k) {
    const CQuaternion u = oracle::random_cquaternion(rng);
    CHECK(max_diff(i * u, u * i) == 0.0);
    CHECK(max_diff(times_i(u), i * u) == 0.0);
  }
}

TEST_CASE("complexified product is associative and distributes over right scalars") {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 1000; ++k) {
    const CQuaternion u = oracle::random_cquaternion(rng), v = oracle::random_cquaternion(rng),
                      w = oracle::random_cquaternion(rng);
    CHECK(max_diff((u * v) * w, u * (v * w)) <= 64 * eps * abs(u) * abs(v) * abs(w));
    const Quaternion q = oracle::random_quaternion(rng);
    CHECK(max_diff((u * v) * q, u * (v * q)) <= 64 * eps * abs(u) * abs(v) * abs(q));
  }
}

TEST_CASE("inner product") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    const CQuaternion u = oracle::random_cquaternion(rng), v = oracle::random_cquaternion(rng);
    CHECK(inner(u, u).s0 == doctest::Approx(norm2(u)).epsilon(1e-14));
    CHECK(abs(vec(inner(u, u))) <= 1e-14 * norm2(u));
    CHECK(max_diff(inner(u, v), conj(inner(v, u))) <= 1e-14 * abs(u) * abs(v));
  }
}

TEST_CASE("inverse") {
  std::mt19937_64 rng(18);
  for (int k = 0; k < 100; ++k) {
    const Quaternion a = oracle::random_quaternion(rng);
    CHECK(max_diff(a * inverse(a), Quaternion::real(1.0)) <= 1e-14);
    CHECK(max_diff(inverse(a) * a, Quaternion::real(1.0)) <= 1e-14);
  }
  CHECK_THROWS(inverse(Quaternion{}));
}

TEST_CASE("slice points and powers") {
  CHECK_THROWS(SlicePoint::make(Quaternion{0.5, 1.0, 0.0, 0.0}, 1.0));
  CHECK_THROWS(SlicePoint::make(Quaternion{0.0, 2.0, 0.0, 0.0}, 1.0));
  std::mt19937_64 rng(19);
  for (int k = 0; k < 50; ++k) {
    const Quaternion j = oracle::random_unit_imaginary(rng);
    for (double t : {-3.0, -0.2, 0.7, 5.0}) {
      const SlicePoint s = SlicePoint::make(j, t);
      CHECK(max_diff(slice_power(s, 1.0), s.value()) <= 1e-14 * std::abs(t));
      const Quaternion r = slice_power(s, 0.5);
      CHECK(max_diff(r * r, s.value()) <= 1e-14 * std::abs(t));
      // Principal branch: argument beta * (+-pi/2).
      const double arg = (t > 0 ? 1.0 : -1.0) * std::numbers::pi / 2 * 0.3;
      const Quaternion ref = Quaternion::real(std::pow(std::abs(t), 0.3) * std::cos(arg)) +
                             (std::pow(std::abs(t), 0.3) * std::sin(arg)) * j;
      CHECK(max_diff(slice_power(s, 0.3), ref) <= 1e-14 * (1.0 + std::abs(t)));
      // Powers in one slice commute with each other.
      CHECK(max_diff(slice_power(s, 0.3) * s.value(), s.value() * slice_power(s, 0.3)) <= 1e-13 * (1 + t * t));
    }
  }
  CHECK_THROWS(slice_power(SlicePoint::make(Quaternion::unit(0), 0.0), 0.5));
}

TEST_CASE("slice frame maps e1 onto j") {
  std::mt19937_64 rng(20);
  for (int k = 0; k < 100; ++k) {
    const Quaternion j = oracle::random_unit_imaginary(rng);
    const Quaternion q = slice_frame(j);
    CHECK(abs(q) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(max_diff(inverse(q) * Quaternion::unit(0) * q, j) <= 1e-14);
  }
  const Quaternion m = -Quaternion::unit(0);
  CHECK(max_diff(inverse(slice_frame(m)) * Quaternion::unit(0) * slice_frame(m), m) <= 1e-15);
  CHECK(max_diff(slice_frame(Quaternion::unit(0)), Quaternion::real(1.0)) <= 1e-15);
}

TEST_CASE("block representations") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 100; ++k) {
    const CQuaternion c = oracle::random_cquaternion(rng), u = oracle::random_cquaternion(rng);
    const Quaternion q = oracle::random_quaternion(rng);
    CHECK(max_diff(block_apply(left_block(c), u), c * u) <= 1e-14 * abs(c) * abs(u));
    CHECK(max_diff(block_apply(right_block(q), u), u * q) <= 1e-14 * abs(q) * abs(u));
    // Right blocks of conjugates are transposes.
    const Block8 rt = block_transpose(right_block(q));
    const Block8 rc = right_block(conj(q));
    for (int e = 0; e < 64; ++e) CHECK(rt[e] == rc[e]);
    // Left and right actions commute.
    const Block8 lr = block_mul(left_block(c), right_block(q));
    const Block8 rl = block_mul(right_block(q), left_block(c));
    for (int e = 0; e < 64; ++e) CHECK(lr[e] == doctest::Approx(rl[e]).epsilon(1e-13).scale(abs(c) * abs(q)));
  }
  const Block8 id = block_identity(2.0);
  Block8 acc = block_identity(1.0);
  block_axpy(1.0, id, acc);
  for (int e = 0; e < 64; ++e) CHECK(acc[e] == (e % 9 == 0 ? 3.0 : 0.0));
}

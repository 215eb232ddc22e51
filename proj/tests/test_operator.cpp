#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qfrac/krylov.hpp"
#include "qfrac/operator.hpp"
#include "qfrac/resolvent.hpp"

using namespace qfrac;

namespace {

std::array<Coefficient, 3> constant_coeffs(double c = 1.0) {
  return {Coefficient::constant(c), Coefficient::constant(c), Coefficient::constant(c)};
}

std::array<Coefficient, 3> variable_coeffs() {
  return {Coefficient::wave(2.0, 0.3, {2.0, 1.0, 0.0}, 0.2), Coefficient::constant(1.5),
          Coefficient::hill(1.0, 0.4, 1.0, {0.2, 0.3, 0.4}, {0.5, 0.5, 0.5}, 0.7)};
}

// Symbol of the centred difference of the given order and accuracy on cos/sin modes.
// First derivative: D cos(theta x) = -sigma sin(theta x); second: D^2 cos = sigma cos.
double symbol(int order, int acc, double theta, double h) {
  if (order == 1)
    return acc == 2 ? std::sin(theta * h) / h : (8 * std::sin(theta * h) - std::sin(2 * theta * h)) / (6 * h);
  return acc == 2 ? (2 * std::cos(theta * h) - 2) / (h * h)
                  : (-std::cos(2 * theta * h) / 6 + 8 * std::cos(theta * h) / 3 - 2.5) / (h * h);
}

}  // namespace

TEST_CASE("periodic Fourier symbol") {
  DomainSpec d;
  d.lengths = {1.0, 2.0, 1.5};
  const GridPtr g = build_periodic_grid(d, {10, 12, 9});
  std::mt19937_64 rng(4);
  const std::array<int, 3> modes{2, 1, 3};
  std::array<double, 3> k;
  for (int l = 0; l < 3; ++l) k[l] = 2 * std::numbers::pi * modes[l] / d.lengths[l];
  for (int m : {1, 2})
    for (int acc : {2, 4}) {
      const CoefficientField c = sample_coefficients(g, constant_coeffs(1.7), m);
      const QOperator T = assemble_T(g, c, m, acc);
      const CQuaternion q = oracle::random_cquaternion(rng);
      const GridFunction u = GridFunction::sample(g, [&](const Vec3& x) {
        return std::cos(k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) * q;
      });
      const GridFunction Tu = apply(T, u);
      double worst = 0.0, scale = 0.0;
      for (std::size_t node = 0; node < g->node_count(); ++node) {
        const Vec3 x = g->coords(node);
        const double ph = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
        CQuaternion ref{};
        for (int l = 0; l < 3; ++l) {
          const double sig = symbol(m, acc, k[l], g->h()[l]);
          const double f = m == 1 ? -sig * std::sin(ph) : sig * std::cos(ph);
          const CQuaternion unit = m == 1 ? CQuaternion::from(Quaternion::unit(l)) : CQuaternion::i_times(Quaternion::unit(l));
          ref = ref + (1.7 * f) * (unit * q);
        }
        worst = std::max(worst, abs(Tu.at(node) - ref));
        scale = std::max(scale, abs(ref));
      }
      CHECK(worst <= 1e-11 * scale);
    }
}

TEST_CASE("parity units") {
  CHECK(parity_unit(1, 0) == CQuaternion::from(Quaternion::unit(0)));
  CHECK(parity_unit(2, 1) == CQuaternion::i_times(Quaternion::unit(1)));
  CHECK(parity_unit(3, 2) == CQuaternion::from(-Quaternion::unit(2)));
  // (i^{m-1} e_l)^2 = (-1)^m, so T^2 is a positive operator for constant coefficients.
  for (int m = 1; m <= 4; ++m)
    for (int l = 0; l < 3; ++l) CHECK(parity_unit(m, l) * parity_unit(m, l) == CQuaternion::from(Quaternion::real(m % 2 ? -1.0 : 1.0)));
}

TEST_CASE("constant coefficient T is symmetric, variable coefficient T is not") {
  const GridPtr g = build_grid(DomainSpec{}, {6, 6, 6});
  for (int m : {1, 2}) {
    const QOperator T = assemble_T(g, sample_coefficients(g, constant_coeffs(), m), m);
    const Eigen::MatrixXd A = T.matrix().dense();
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * A.cwiseAbs().maxCoeff());
    CHECK(numerically_symmetric(T.matrix(), 10, 1));
  }
  const QOperator V = assemble_T(g, sample_coefficients(g, variable_coeffs(), 1), 1);
  CHECK_FALSE(numerically_symmetric(V.matrix(), 10, 1));
}

TEST_CASE("right linearity") {
  const GridPtr g = build_grid(DomainSpec{}, {7, 7, 7});
  std::mt19937_64 rng(5);
  for (int m : {1, 2, 3}) {
    const QOperator T = assemble_T(g, sample_coefficients(g, variable_coeffs(), m), m);
    for (int trial = 0; trial < 5; ++trial) {
      const auto u = random_vector(T.size(), rng());
      const Quaternion q = oracle::random_quaternion(rng);
      const auto lhs = T.apply(right_multiplied(u, q));
      const auto rhs = right_multiplied(T.apply(u), q);
      double diff = 0.0;
      for (std::size_t i = 0; i < lhs.size(); ++i) diff += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
      CHECK(std::sqrt(diff) <= 1e-13 * norm(T.apply(u)) * abs(q));
    }
  }
}

TEST_CASE("Q_s matches its definition") {
  const GridPtr g = build_grid(DomainSpec{}, {6, 7, 6});
  const QOperator T = assemble_T(g, sample_coefficients(g, variable_coeffs(), 1), 1);
  std::mt19937_64 rng(6);
  for (const Quaternion s : {Quaternion{0.0, 2.0, 0.0, 0.0}, Quaternion{0.7, -0.3, 0.2, 1.1}}) {
    const QOperator Q = assemble_Qs(T, s);
    CHECK(Q.label() == OperatorLabel::Qs);
    CHECK(Q.shift().has_value());
    const auto x = random_vector(T.size(), rng());
    const auto Tx = T.apply(x);
    const auto TTx = T.apply(Tx);
    const auto Qx = Q.apply(x);
    double diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double ref = TTx[i] - 2 * s.s0 * Tx[i] + norm2(s) * x[i];
      diff = std::max(diff, std::abs(Qx[i] - ref));
    }
    CHECK(diff <= 1e-10 * (1.0 + norm(TTx)));
  }
  CHECK_THROWS(assemble_Qs(assemble_Qs(T, Quaternion::unit(0)), Quaternion::unit(0)));
}

TEST_CASE("block CSR algebra against dense matrices") {
  const GridPtr g = build_grid(DomainSpec{}, {5, 5, 6});
  const QOperator T = assemble_T(g, sample_coefficients(g, variable_coeffs(), 2), 2, 4);
  const Eigen::MatrixXd A = T.matrix().dense();
  CHECK((T.matrix().transpose().dense() - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd AA = BlockCsr::product(T.matrix(), T.matrix()).dense();
  CHECK((AA - A * A).cwiseAbs().maxCoeff() <= 1e-12 * (A * A).cwiseAbs().maxCoeff());
  const Eigen::MatrixXd C = BlockCsr::combine(2.0, T.matrix(), -1.0, BlockCsr::identity(T.matrix().rows(), 3.0)).dense();
  const Eigen::MatrixXd Cref = 2.0 * A - 3.0 * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  CHECK((C - Cref).cwiseAbs().maxCoeff() <= 1e-12 * A.cwiseAbs().maxCoeff());
  const auto x = random_vector(T.size(), 8);
  const Eigen::VectorXd y = A * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  const auto y2 = T.apply(x);
  for (std::size_t i = 0; i < y2.size(); ++i) CHECK(y2[i] == doctest::Approx(y[i]).scale(A.cwiseAbs().maxCoeff()));
  const QOperator Tt = T.transpose();
  CHECK((Tt.matrix().dense() - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero extension keeps boundary rows short") {
  const GridPtr g = build_grid(DomainSpec{}, {6, 6, 6});
  const QOperator T = assemble_T(g, sample_coefficients(g, constant_coeffs(), 1), 1);
  const auto& rp = T.matrix().row_ptr();
  const std::size_t corner = g->interior_index(g->node(1, 1, 1));
  const std::size_t centre = g->interior_index(g->node(2, 2, 2));
  CHECK(rp[corner + 1] - rp[corner] == 3u);
  CHECK(rp[centre + 1] - rp[centre] == 6u);
}

TEST_CASE("assembly errors") {
  const GridPtr g = build_grid(DomainSpec{}, {4, 4, 4});
  CHECK_THROWS_WITH(assemble_T(g, sample_coefficients(g, constant_coeffs(), 3), 3),
                    doctest::Contains("grid too small for stencil"));
  const GridPtr other = build_grid(DomainSpec{}, {5, 5, 5});
  CHECK_THROWS(assemble_T(g, sample_coefficients(other, constant_coeffs(), 1), 1));
  CHECK_THROWS(assemble_T(g, sample_coefficients(g, constant_coeffs(), 1), 2));
}

TEST_CASE("scalar surrogate and coordinate export") {
  const GridPtr g = build_grid(DomainSpec{}, {4, 4, 4});
  const QOperator S = QOperator::scalar_surrogate(g, 2.5);
  CHECK(S.label() == OperatorLabel::T);
  const auto x = random_vector(S.size(), 2);
  const auto y = S.apply(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(2.5 * x[i]));
  std::ostringstream os;
  S.export_coo(os);
  std::size_t lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  CHECK(lines >= S.matrix().nnz_blocks());
}

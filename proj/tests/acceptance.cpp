// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <fmt/core.h>

#include "oracles.hpp"
#include "qfrac/forms.hpp"
#include "qfrac/fracpow.hpp"
#include "qfrac/krylov.hpp"
#include "qfrac/resolvent.hpp"

using namespace qfrac;

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::array<Coefficient, 3> constant_coeffs(double c = 1.0) {
  return {Coefficient::constant(c), Coefficient::constant(c), Coefficient::constant(c)};
}

std::array<Coefficient, 3> hill_coeffs() {
  return {Coefficient::hill(1.0, 0.05, 1.0, {-0.5, 0.5, 0.5}, {0.3, 0.6, 0.5}, 0.5),
          Coefficient::hill(1.1, 0.04, 1.0, {0.5, -0.3, 0.5}, {0.5, 0.5, 0.5}, 0.6), Coefficient::constant(1.0)};
}

std::array<Coefficient, 3> wave_coeffs() {
  return {Coefficient::wave(2.0, 0.2, {1.0, 2.0, 0.5}, 0.3), Coefficient::wave(1.8, 0.15, {0.0, 1.0, 2.0}, 1.0),
          Coefficient::wave(2.2, 0.1, {2.0, 0.0, 1.0}, -0.4)};
}

GridPtr unit_box(int n) { return build_grid(DomainSpec{}, {n, n, n}); }

double rel(const GridFunction& a, const GridFunction& b) { return (a - b).l2_norm() / b.l2_norm(); }

Outcome ac1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  double worst_q = 0.0, worst_c = 0.0, worst_norm = 0.0, worst_conj = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Quaternion a = oracle::random_quaternion(rng), b = oracle::random_quaternion(rng);
    const Quaternion ab = a * b;
    const Eigen::Vector4d ref = oracle::left_matrix(a) * oracle::as_vec(b);
    const double scale = abs(a) * abs(b);
    worst_q = std::max(worst_q, (oracle::as_vec(ab) - ref).cwiseAbs().maxCoeff() / (eps * scale));
    worst_norm = std::max(worst_norm, std::abs(abs(ab) - scale) / (eps * scale));
    worst_conj = std::max(worst_conj, abs(conj(ab) - conj(b) * conj(a)) / (eps * scale));

    const CQuaternion u = oracle::random_cquaternion(rng), v = oracle::random_cquaternion(rng);
    const oracle::M2 prod = oracle::biquaternion_matrix(u) * oracle::biquaternion_matrix(v);
    const double cscale = (abs(u.q1) + abs(u.q2)) * (abs(v.q1) + abs(v.q2));
    worst_c = std::max(worst_c, (oracle::biquaternion_matrix(u * v) - prod).cwiseAbs().maxCoeff() / (eps * cscale));
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_q <= 8 && worst_c <= 8 && worst_norm <= 8 && worst_conj <= 8 && secs < 5.0;
  return {pass, fmt::format("H {:.2f} ulp, CxH {:.2f} ulp, |ab| {:.2f} ulp, conj {:.2f} ulp, {:.2f} s", worst_q,
                            worst_c, worst_norm, worst_conj, secs)};
}

struct ScanFixture {
  GridPtr g;
  CoefficientField c;
  ConstantsReport r;
  std::unique_ptr<SResolvent> R;
  NormScan e1, e2;
  double secs = 0.0;
};

const std::vector<double> scan_t{0.1, 1.0, 10.0, 100.0};

ScanFixture& scan_fixture() {
  static ScanFixture f = [] {
    ScanFixture s;
    const auto t0 = Clock::now();
    s.g = unit_box(12);
    s.c = sample_coefficients(s.g, constant_coeffs(), 1);
    s.r = compute_constants(s.c, *s.g, 1);
    s.R = std::make_unique<SResolvent>(assemble_T(s.g, s.c, 1));
    s.e1 = norm_scan(*s.R, s.r, Quaternion::unit(0), scan_t);
    s.secs = seconds_since(t0);
    s.e2 = norm_scan(*s.R, s.r, Quaternion::unit(1), scan_t);
    return s;
  }();
  return f;
}

Outcome ac2() {
  const ScanFixture& f = scan_fixture();
  bool pass = !f.e1.any_error() && f.secs < 120.0;
  std::string d;
  for (const auto& row : f.e1.rows) {
    const double ratio = row.q_inv_norm * row.t * row.t;
    pass = pass && ratio <= 1.0 + 1e-3;
    d += fmt::format("t={} t^2|Q^-1|={:.6f}; ", row.t, ratio);
  }
  return {pass, d + fmt::format("{:.1f} s", f.secs)};
}

Outcome ac3() {
  const ScanFixture& f = scan_fixture();
  const double theta = 2.0 * std::numbers::sqrt2;
  bool pass = !f.e1.any_error();
  std::string d;
  for (const auto& row : f.e1.rows) {
    const double l = row.sl_norm * row.t / theta, r = row.sr_norm * row.t / theta;
    pass = pass && l <= 1.0 + 1e-3 && r <= 1.0 + 1e-3;
    d += fmt::format("t={} left {:.4f} right {:.4f} of bound; ", row.t, l, r);
  }
  return {pass, d};
}

Outcome ac4() {
  const GridPtr g = unit_box(12);
  const auto suite = random_bump_suite(g, 50, 404);
  bool pass = true;
  double worst_l2 = std::numeric_limits<double>::infinity(), worst_dm = worst_l2;
  int families = 0;
  for (const auto& coeffs : {constant_coeffs(), hill_coeffs()}) {
    const CoefficientField c = sample_coefficients(g, coeffs, 1);
    const ConstantsReport r = compute_constants(c, *g, 1);
    if (!hypothesis_check(r).pass) {
      pass = false;
      continue;
    }
    ++families;
    for (double t : {0.5, 2.0}) {
      const CoercivityResult res = coercivity_probe(c, r, t, Quaternion::unit(0), suite);
      worst_l2 = std::min(worst_l2, res.min_excess_l2);
      worst_dm = std::min(worst_dm, res.min_excess_dm);
    }
  }
  pass = pass && families == 2 && worst_l2 >= -1e-9 && worst_dm >= -1e-9;
  return {pass, fmt::format("min Re b - t^2|u|^2 = {:.3e}, min Re b - (C_T/2 - M)|u|_Dm^2 = {:.3e}", worst_l2, worst_dm)};
}

GridFunction smooth(const GridPtr& g, double shift) {
  return GridFunction::sample(g, [shift](const Vec3& x) {
    const double b = std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]) *
                     std::sin(std::numbers::pi * x[2]);
    const double b2 = b * b;
    return CQuaternion{{b2, b2 * x[0], b2 * std::cos(x[1] + shift), 0.5 * b2},
                       {b2 * x[2], -b2, b2 * x[0] * x[1], b2 * std::sin(3 * x[2] + shift)}};
  });
}

Outcome ac5() {
  const Quaternion s{0.3, 0.0, 1.5, 0.0};
  std::vector<double> err;
  for (int n : {8, 16, 32}) {
    const GridPtr g = unit_box(n);
    const CoefficientField c = sample_coefficients(g, wave_coeffs(), 1);
    const GridFunction u = smooth(g, 0.0), v = smooth(g, 0.7);
    const Quaternion ref = l2_inner(apply(assemble_Qs(assemble_T(g, c, 1), s), u), v);
    err.push_back(abs(bilinear_form(c, s, u, v, 1) - ref));
  }
  const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
  return {std::min(p1, p2) >= 1.8,
          fmt::format("errors {:.3e} {:.3e} {:.3e}, orders {:.3f} {:.3f}", err[0], err[1], err[2], p1, p2)};
}

Outcome ac6() {
  const auto t0 = Clock::now();
  const GridPtr g = unit_box(4);
  const GridFunction v = GridFunction::unpack(g, random_vector(8 * g->interior_count(), 6));
  double worst = 0.0, worst_oracle = 0.0;
  for (double lambda : {0.5, 1.0, 4.0}) {
    const SResolvent R(QOperator::scalar_surrogate(g, lambda));
    for (double alpha : {0.25, 0.5, 0.75})
      for (FracVariant var : {FracVariant::left, FracVariant::right}) {
        FracPowOptions opt;
        opt.quad.alpha = alpha;
        opt.variant = var;
        const GridFunction p = frac_power(R, v, opt).value;
        worst = std::max(worst, rel(p, v.scaled(std::pow(lambda, alpha))));
        worst_oracle = std::max(worst_oracle, rel(p, v.scaled(oracle::scalar_fractional_power(lambda, alpha))));
      }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && worst_oracle <= 1e-6 && secs < 60.0,
          fmt::format("max rel dev {:.3e} (closed form), {:.3e} (quadrature oracle), {:.1f} s", worst, worst_oracle,
                      secs)};
}

struct SmallFixture {
  GridPtr g = unit_box(8);
  CoefficientField c = sample_coefficients(g, constant_coeffs(), 1);
  ConstantsReport r = compute_constants(c, *g, 1);
  SResolvent R{assemble_T(g, c, 1)};
  GridFunction v = GridFunction::unpack(g, random_vector(8 * g->interior_count(), 8));
};

SmallFixture& small() {
  static SmallFixture f;
  return f;
}

Outcome ac7() {
  SmallFixture& f = small();
  double worst = 0.0;
  for (double c : {2.0, 4.0})
    for (double alpha : {0.25, 0.5}) {
      FracPowOptions opt;
      opt.quad.alpha = alpha;
      worst = std::max(worst, homogeneity_check(f.c, 1, 2, c, f.v, opt));
    }
  return {worst <= 1e-4, fmt::format("max homogeneity defect {:.3e}", worst)};
}

Outcome ac8() {
  SmallFixture& f = small();
  FracPowOptions opt;
  opt.quad.alpha = 0.5;
  const double d = left_right_agreement(f.R, f.v, opt);
  return {d <= 1e-5, fmt::format("|P_L - P_R| / |P_R| = {:.3e}", d)};
}

Outcome ac9() {
  const ScanFixture& s = scan_fixture();
  double norm_dev = 0.0;
  for (std::size_t i = 0; i < scan_t.size(); ++i) {
    const auto& a = s.e1.rows[i];
    const auto& b = s.e2.rows[i];
    norm_dev = std::max({norm_dev, std::abs(a.q_inv_norm - b.q_inv_norm) / a.q_inv_norm,
                         std::abs(a.sl_norm - b.sl_norm) / a.sl_norm, std::abs(a.sr_norm - b.sr_norm) / a.sr_norm});
  }
  SmallFixture& f = small();
  FracPowOptions opt;
  opt.quad.alpha = 0.5;
  const GridFunction p1 = frac_power(f.R, f.r, f.v, opt).value;
  opt.j = Quaternion::unit(1);
  const GridFunction p2 = frac_power(f.R, f.r, f.v, opt).value;
  const double pdev = rel(p2, p1);
  return {norm_dev <= 1e-6 && pdev <= 1e-6, fmt::format("norms {:.3e}, P_alpha {:.3e}", norm_dev, pdev)};
}

Outcome ac10() {
  DomainSpec ball;
  ball.kind = DomainKind::exterior_ball;
  ball.origin = {-2.0, -2.0, -2.0};
  ball.lengths = {4.0, 4.0, 4.0};
  ball.radius = 0.5;
  DomainSpec half;
  half.kind = DomainKind::half_space;
  half.origin = {0.0, -1.5, -1.5};
  half.lengths = {3.0, 3.0, 3.0};
  half.normal = {1.0, 0.0, 0.0};
  bool pass = true;
  int checks = 0, failures = 0;
  double min_margin = std::numeric_limits<double>::infinity(), worst_decay = -std::numeric_limits<double>::infinity();
  for (const DomainSpec& d : {ball, half}) {
    const GridPtr g = build_grid(d, {21, 21, 21});
    const auto suite = random_bump_suite(g, 50, 1010);
    WeightFunction phi;
    phi.family = d.kind == DomainKind::exterior_ball ? WeightFamily::hill : WeightFamily::ridge;
    phi.v = d.normal;
    for (double lambda : {0.5, 1.0, 2.0}) {
      phi.lambda = lambda;
      const RadialConditionResult rc = check_decay_condition(*g, phi);
      pass = pass && rc.pass;
      worst_decay = std::max(worst_decay, rc.worst_excess);
      for (double p : {1.0, 2.0})
        for (const auto& u : suite) {
          const PoincareResult pr = weighted_poincare_check(*g, phi, p, u);
          ++checks;
          failures += !pr.pass;
          min_margin = std::min(min_margin, pr.margin / pr.rhs);
        }
    }
  }
  pass = pass && failures == 0;
  return {pass, fmt::format("{} inequality checks, {} failures, min relative margin {:.3e}, worst decay excess {:.3e}",
                            checks, failures, min_margin, worst_decay)};
}

Outcome ac11() {
  const GridPtr g = unit_box(8);
  const QOperator T = assemble_T(g, sample_coefficients(g, hill_coeffs(), 1), 1);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logt(std::log(0.1), std::log(10.0));
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Quaternion s = std::exp(logt(rng)) * oracle::random_unit_imaginary(rng);
    const GridFunction F = GridFunction::unpack(g, random_vector(T.size(), rng()));
    const QOperator Q = assemble_Qs(T, s);
    SolverOptions it;
    it.tol = 1e-12;
    SolverOptions lu;
    lu.method = SolveMethod::dense_lu_oracle;
    const GridFunction ui = solve_Qs(Q, F, it).first;
    const GridFunction ul = solve_Qs(Q, F, lu).first;
    worst = std::max(worst, rel(ui, ul));
  }
  return {worst <= 1e-8, fmt::format("6^3 interior, max rel deviation {:.3e}", worst)};
}

Outcome ac12() {
  const GridPtr g = unit_box(12);
  std::mt19937_64 rng(12);
  std::vector<std::pair<std::string, QOperator>> ops;
  for (int m = 1; m <= 4; ++m)
    for (int acc : {2, 4}) {
      const QOperator T = assemble_T(g, sample_coefficients(g, wave_coeffs(), m), m, acc);
      ops.emplace_back(fmt::format("T m={} acc={}", m, acc), T);
      ops.emplace_back(fmt::format("T^t m={} acc={}", m, acc), T.transpose());
      ops.emplace_back(fmt::format("Q_s m={} acc={}", m, acc), assemble_Qs(T, Quaternion{0.2, 0.0, 0.0, 1.3}));
    }
  ops.emplace_back("surrogate", QOperator::scalar_surrogate(g, 2.0));
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, op] : ops)
    for (int k = 0; k < 20; ++k) {
      const auto u = random_vector(op.size(), rng());
      const Quaternion q = oracle::random_quaternion(rng);
      const auto lhs = op.apply(right_multiplied(u, q));
      const auto Tu = op.apply(u);
      const auto rhs = right_multiplied(Tu, q);
      double diff = 0.0;
      for (std::size_t i = 0; i < lhs.size(); ++i) diff += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
      const double ratio = std::sqrt(diff) / (norm(Tu) * abs(q));
      if (ratio > worst) {
        worst = ratio;
        worst_name = name;
      }
    }
  return {worst <= 1e-13, fmt::format("{} operators, max |T(uq) - (Tu)q| / (|Tu||q|) = {:.3e} ({})", ops.size(), worst,
                                      worst_name)};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5}, {6, ac6},
      {7, ac7}, {8, ac8}, {9, ac9}, {10, ac10}, {11, ac11}, {12, ac12}};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << fmt::format("AC{:<2} {} {}", id, o.pass ? "PASS" : "FAIL", o.detail) << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria pass", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}

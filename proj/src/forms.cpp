#include "qfrac/forms.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "qfrac/operator.hpp"

namespace qfrac {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double multinomial3(int n, int a, int b, int c) { return factorial(n) / (factorial(a) * factorial(b) * factorial(c)); }

// D^r_{x_l} w at interior nodes for r = 0..m, l = 0..2.
using DerivTable = std::array<std::vector<std::vector<CQuaternion>>, 3>;

DerivTable derivative_table(const GridFunction& w, int max_order, int accuracy) {
  DerivTable tab;
  for (int l = 0; l < 3; ++l) {
    tab[l].resize(max_order + 1);
    for (int r = 0; r <= max_order; ++r) tab[l][r] = interior_derivative(w, l, r, accuracy);
  }
  return tab;
}

// d^t_{x_l} (a_l^2) by the Leibniz rule.
double deriv_a2(const CoefficientField& c, int l, int t, std::size_t id) {
  double acc = 0.0;
  for (int q = 0; q <= t; ++q) acc += binom(t, q) * c.deriv(l, l, q, id) * c.deriv(l, l, t - q, id);
  return acc;
}

}  // namespace

double dm_seminorm2(const GridFunction& u, int m, int stencil_order) {
  const Grid& g = *u.grid();
  double acc = 0.0;
  for (int l = 0; l < 3; ++l)
    for (const auto& v : interior_derivative(u, l, m, stencil_order)) acc += norm2(v);
  return acc * g.cell_volume();
}

std::vector<CQuaternion> apply_T_direct(const CoefficientField& c, const GridFunction& u, int m, int stencil_order) {
  const Grid& g = *u.grid();
  std::vector<CQuaternion> out(g.interior_count());
  for (int l = 0; l < 3; ++l) {
    const CQuaternion unit = parity_unit(m, l);
    const auto d = interior_derivative(u, l, m, stencil_order);
    for (std::size_t id = 0; id < out.size(); ++id) out[id] = out[id] + c.value(l, id) * cqmul(unit, d[id]);
  }
  return out;
}

Quaternion bilinear_form(const CoefficientField& c, const Quaternion& s, const GridFunction& u, const GridFunction& v,
                         int m, const FormOptions& opt) {
  require_same_grid(u, v);
  const Grid& g = *u.grid();
  if (c.order() < m) throw std::invalid_argument("coefficient field lacks derivatives of the required order");
  if (c.grid()->interior_count() != g.interior_count()) throw std::invalid_argument("coefficient grid mismatch");
  const std::size_t n = g.interior_count();
  const int p = opt.stencil_order;
  const DerivTable du = derivative_table(u, m, p);
  const DerivTable dv = derivative_table(v, m, p);

  Quaternion total{};
  // Principal part and mass term.
  for (int l = 0; l < 3; ++l)
    for (std::size_t id = 0; id < n; ++id) {
      const double a = c.value(l, id);
      total = total + (a * a) * inner(du[l][m][id], dv[l][m][id]);
    }
  for (std::size_t id = 0; id < n; ++id) total = total + norm2(s) * inner(du[0][0][id], dv[0][0][id]);

  // Derivatives of a_l^2 against lower derivatives of v.
  for (int l = 0; l < 3; ++l)
    for (int t1 = 1; t1 <= m; ++t1) {
      const double w = binom(m, t1);
      for (std::size_t id = 0; id < n; ++id)
        total = total + (w * deriv_a2(c, l, t1, id)) * inner(du[l][m][id], dv[l][m - t1][id]);
    }

  // Same-direction products of coefficient derivatives.
  for (int l = 0; l < 3; ++l)
    for (int k = 1; k <= m; ++k) {
      const double sk = (k % 2 ? -1.0 : 1.0) * binom(m, k);
      for (int t1 = 0; t1 <= m - k; ++t1)
        for (int t2 = 0; t1 + t2 <= m - k; ++t2) {
          const int t3 = m - k - t1 - t2;
          const double w = sk * multinomial3(m - k, t1, t2, t3);
          for (std::size_t id = 0; id < n; ++id) {
            const double f = c.deriv(l, l, t1, id) * c.deriv(l, l, t2 + k, id);
            if (f == 0.0) continue;
            total = total + (w * f) * inner(du[l][m][id], dv[l][t3][id]);
          }
        }
    }

  // Mixed directions.
  const double sigma = opt.cross_sign == CrossSign::derived ? -1.0 : 1.0;
  for (int l = 0; l < 3; ++l)
    for (int j = l + 1; j < 3; ++j) {
      const Quaternion elej = qmul(Quaternion::unit(l), Quaternion::unit(j));
      for (int k = 1; k <= m; ++k) {
        const double sk = sigma * (k % 2 ? -1.0 : 1.0) * binom(m, k);
        for (int t1 = 0; t1 <= m - k; ++t1)
          for (int t2 = 0; t1 + t2 <= m - k; ++t2) {
            const int t3 = m - k - t1 - t2;
            const double w = sk * multinomial3(m - k, t1, t2, t3);
            for (std::size_t id = 0; id < n; ++id) {
              const double f1 = c.deriv(l, l, t1, id) * c.deriv(j, l, t2 + k, id);
              const double f2 = c.deriv(j, j, t1, id) * c.deriv(l, j, t2 + k, id);
              if (f1 != 0.0) total = total + (w * f1) * inner(elej * du[j][m][id], dv[l][t3][id]);
              if (f2 != 0.0) total = total - (w * f2) * inner(elej * du[l][m][id], dv[j][t3][id]);
            }
          }
      }
    }

  // -2 s0 <Tu, v>.
  if (s.s0 != 0.0) {
    const auto Tu = apply_T_direct(c, u, m, p);
    for (std::size_t id = 0; id < n; ++id) total = total - (2.0 * s.s0) * inner(Tu[id], dv[0][0][id]);
  }
  return g.cell_volume() * total;
}

// ---------------------------------------------------------------------------
// Constants

double max_multinomial_ratio(int m) {
  if (m < 1) throw std::invalid_argument("m must be positive");
  // With x_l = xi_l^2 on the simplex, the ratio is h_m(x) / sum x_l^m where h_m is the
  // complete homogeneous symmetric polynomial.
  auto ratio = [m](double x0, double x1) {
    const double x2 = 1.0 - x0 - x1;
    if (x0 < 0 || x1 < 0 || x2 < 0) return -1.0;
    double num = 0.0;
    for (int b0 = 0; b0 <= m; ++b0)
      for (int b1 = 0; b0 + b1 <= m; ++b1) num += std::pow(x0, b0) * std::pow(x1, b1) * std::pow(x2, m - b0 - b1);
    const double den = std::pow(x0, m) + std::pow(x1, m) + std::pow(x2, m);
    return num / den;
  };
  const int steps = 120;
  double best = -1.0, bx = 0.0, by = 0.0;
  for (int i = 0; i <= steps; ++i)
    for (int k = 0; i + k <= steps; ++k) {
      const double r = ratio(double(i) / steps, double(k) / steps);
      if (r > best) {
        best = r;
        bx = double(i) / steps;
        by = double(k) / steps;
      }
    }
  // Compass refinement on the simplex.
  for (double step = 1.0 / steps; step > 1e-14; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      const double dirs[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
      for (const auto& d : dirs) {
        const double r = ratio(bx + step * d[0], by + step * d[1]);
        if (r > best) {
          best = r;
          bx += step * d[0];
          by += step * d[1];
          moved = true;
        }
      }
    }
  }
  return best;
}

int poincare_repetition_count(int m) {
  if (m < 1) throw std::invalid_argument("m must be positive");
  // Every multi-index of order < m is raised, one Poincare step at a time, along its
  // largest entry (lowest axis on ties) until it reaches order m.
  std::map<std::array<int, 3>, int> hits;
  for (int b0 = 0; b0 <= m; ++b0)
    for (int b1 = 0; b0 + b1 <= m; ++b1)
      for (int b2 = 0; b0 + b1 + b2 <= m; ++b2) {
        std::array<int, 3> b{b0, b1, b2};
        while (b[0] + b[1] + b[2] < m) {
          int arg = 0;
          for (int a = 1; a < 3; ++a)
            if (b[a] > b[arg]) arg = a;
          ++b[arg];
        }
        ++hits[b];
      }
  int best = 0;
  for (const auto& [b, count] : hits) best = std::max(best, count);
  return best;
}

namespace {

double discrete_poincare_constant(const Grid& g) {
  // 1D Dirichlet -Delta_h along each axis; the weakest direction gives the constant.
  double best = 0.0;
  for (int a = 0; a < 3; ++a) {
    const int n = g.n()[a] - 2;
    if (n < 1) continue;
    const double h = g.h()[a];
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 2.0 / (h * h));
    Eigen::VectorXd off = Eigen::VectorXd::Constant(std::max(n - 1, 0), -1.0 / (h * h));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    best = std::max(best, 1.0 / std::sqrt(es.eigenvalues()(0)));
  }
  return best;
}

}  // namespace

ConstantsReport compute_constants(const CoefficientField& c, const Grid& g, int m,
                                  const std::optional<WeightFunction>& weight) {
  ConstantsReport r;
  r.m = m;
  const DomainSpec& d = g.domain();
  r.bounded_case = d.bounded();
  if (!r.bounded_case && !weight) throw std::invalid_argument("unbounded domains need a weight function");
  if (weight) weight->require_compatible(d);

  r.C_T = std::numeric_limits<double>::infinity();
  for (int l = 0; l < 3; ++l) {
    r.C_T = std::min(r.C_T, c.inf_a2(l));
    r.max_a2 = std::max(r.max_a2, c.sup_a2(l));
    r.max_a = std::max(r.max_a, c.sup_abs_a(l));
    r.sup_diag_deriv = std::max(r.sup_diag_deriv, c.sup_diag_deriv(l));
    r.sup_any_deriv = std::max(r.sup_any_deriv, c.sup_any_deriv(l));
  }

  // For truncated domains the box is the truncation box; grid functions vanish outside it.
  r.C_Omega = 0.0;
  for (int a = 0; a < 3; ++a) r.C_Omega = std::max(r.C_Omega, d.lengths[a] / std::numbers::pi);
  r.C_Omega_discrete = discrete_poincare_constant(g);
  if (std::abs(r.C_Omega_discrete - r.C_Omega) > 0.05 * r.C_Omega)
    r.warnings.push_back(fmt::format("discrete Poincare constant {:.17g} differs from L/pi = {:.17g} by more than 5%",
                                     r.C_Omega_discrete, r.C_Omega));
  r.C_Omega = std::min(r.C_Omega, r.C_Omega_discrete);
  r.K_Omega = std::max(r.C_Omega, std::pow(r.C_Omega, m));
  r.K_m = max_multinomial_ratio(m);
  r.K_rep = poincare_repetition_count(m);
  r.K_m_Omega = r.K_m * r.K_rep * r.K_Omega;

  if (r.bounded_case) {
    r.M = r.K_m_Omega * r.K_m_Omega * r.sup_diag_deriv * r.sup_diag_deriv;
  } else {
    if (!r.bounded_case) r.warnings.push_back("C_Omega and K(m,Omega) refer to the truncation box");
    const double lam = weight->lambda;
    r.C_phi = 0.0;
    for (std::size_t id = 0; id < g.interior_count(); ++id) {
      const double phi = (*weight)(g.coords(g.interior_node(id)));
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
          for (int t = 1; t <= m; ++t) {
            const double dv = c.deriv(j, l, t, id);
            r.C_phi = std::max(r.C_phi, dv * dv / phi);
          }
    }
    r.K_m_phi_lambda = r.C_phi * std::max(std::pow(2.0 / lam, 2 * m), std::pow(2.0 / lam, 2)) * r.K_rep;
    r.M = r.K_rep * r.sup_diag_deriv * r.sup_diag_deriv + r.K_m_phi_lambda;
    r.decay_condition = check_decay_condition(g, *weight).pass;
  }

  r.C_T_positive = r.C_T > 0.0;
  r.gap_positive = r.C_T_positive && (r.C_T / 2.0 - r.M) > 0.0;
  if (r.gap_positive) {
    r.C1 = (r.C_T - 2.0 * r.M) / (2.0 * r.C_T);
    r.Theta = 2.0 * std::max(1.0, 1.0 / std::sqrt(r.C1));
  } else {
    r.C1 = std::numeric_limits<double>::quiet_NaN();
    r.Theta = std::numeric_limits<double>::quiet_NaN();
  }

  // Continuity bounds: number of integrals in each group times the Holder/Poincare factors.
  double sup_da2 = 0.0, sup_dl = 0.0;
  for (std::size_t id = 0; id < g.interior_count(); ++id)
    for (int l = 0; l < 3; ++l)
      for (int t = 0; t <= m; ++t) {
        if (t >= 1) sup_da2 = std::max(sup_da2, std::abs(deriv_a2(c, l, t, id)));
        sup_dl = std::max(sup_dl, std::abs(c.deriv(l, l, t, id)));
      }
  double sup_all = 0.0;
  for (std::size_t id = 0; id < g.interior_count(); ++id)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l)
        for (int t = 0; t <= m; ++t) sup_all = std::max(sup_all, std::abs(c.deriv(j, l, t, id)));
  const double K = std::max(r.K_m_Omega, r.K_m * r.K_rep * std::max(r.C_Omega_discrete, std::pow(r.C_Omega_discrete, m)));
  const double n2 = std::pow(2.0, m) - 1.0;
  const double n3 = std::pow(4.0, m) - std::pow(3.0, m);
  r.cont_C1 = r.max_a2;
  r.cont_C2 = n2 * K * sup_da2;
  r.cont_C3 = n3 * K * sup_dl * sup_dl;
  r.cont_C4 = 6.0 * n3 * K * sup_all * sup_all;
  return r;
}

double continuity_constant(const ConstantsReport& r, const Quaternion& s) {
  const double K = r.K_m * r.K_rep * std::max(r.K_Omega, std::max(r.C_Omega_discrete, std::pow(r.C_Omega_discrete, r.m)));
  const double c4 = r.cont_C4 + 2.0 * std::sqrt(3.0) * std::abs(s.s0) * r.max_a * K;
  return r.cont_C1 + r.cont_C2 + r.cont_C3 + c4 + norm2(s) * K * K;
}

HypothesisResult hypothesis_check(const ConstantsReport& r) {
  HypothesisResult h;
  std::vector<std::string> fails;
  if (!(r.C_T > 0.0)) fails.push_back(fmt::format("C_T = {:.17g} is not positive", r.C_T));
  const double gap = r.C_T / 2.0 - r.M;
  if (!(gap > 0.0))
    fails.push_back(fmt::format("C_T/2 − M = {:.6g} is not positive (C_T/2 = {:.17g}, M = {:.17g})", gap,
                                r.C_T / 2.0, r.M));
  if (r.decay_condition && !*r.decay_condition) fails.push_back("weight decay condition fails at some node");
  h.pass = fails.empty();
  if (h.pass) {
    h.explanation = fmt::format("C_T = {:.17g} > 0 and C_T/2 − M = {:.17g} > 0", r.C_T, gap);
  } else {
    for (std::size_t i = 0; i < fails.size(); ++i) h.explanation += (i ? "; " : "") + fails[i];
  }
  return h;
}

CoercivityResult coercivity_probe(const CoefficientField& c, const ConstantsReport& r, double t, const Quaternion& j,
                                  const std::vector<GridFunction>& suite, const FormOptions& opt) {
  const SlicePoint sp = SlicePoint::make(j, t);
  const Quaternion s = sp.value();
  const int m = r.m;
  CoercivityResult out;
  out.min_ratio_l2 = out.min_ratio_dm = out.min_excess_l2 = out.min_excess_dm = std::numeric_limits<double>::infinity();
  out.pass_l2 = out.pass_dm = out.pass_t = out.pass_continuity = true;
  const double gap = r.C_T / 2.0 - r.M;
  const double cs = continuity_constant(r, s);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const GridFunction& u = suite[i];
    const double reb = re(bilinear_form(c, s, u, u, m, opt));
    const double u2 = u.l2_norm() * u.l2_norm();
    const double d2 = dm_seminorm2(u, m, opt.stencil_order);
    out.min_ratio_l2 = std::min(out.min_ratio_l2, reb / u2);
    out.min_ratio_dm = std::min(out.min_ratio_dm, reb / d2);
    out.min_excess_l2 = std::min(out.min_excess_l2, reb - t * t * u2);
    out.min_excess_dm = std::min(out.min_excess_dm, reb - gap * d2);
    if (reb < t * t * u2 * (1.0 - 1e-6) - 1e-9) out.pass_l2 = false;
    if (reb < gap * d2 * (1.0 - 1e-6) - 1e-9) out.pass_dm = false;

    double tu2 = 0.0;
    for (const auto& v : apply_T_direct(c, u, m, opt.stencil_order)) tu2 += norm2(v);
    tu2 *= u.grid()->cell_volume();
    const double ratio = tu2 / reb;
    out.max_t_ratio = std::max(out.max_t_ratio, ratio);
    if (r.gap_positive && tu2 > reb / r.C1 * (1.0 + 1e-6) + 1e-9) out.pass_t = false;

    const GridFunction& v = suite[(i + 1) % suite.size()];
    const double b = abs(bilinear_form(c, s, u, v, m, opt));
    const double bound = cs * std::sqrt(d2 * dm_seminorm2(v, m, opt.stencil_order));
    out.max_continuity_ratio = std::max(out.max_continuity_ratio, b / bound);
    if (b > bound * (1.0 + 1e-6) + 1e-9) out.pass_continuity = false;
  }
  return out;
}

}  // namespace qfrac

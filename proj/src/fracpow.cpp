#include "qfrac/fracpow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

#include "qfrac/krylov.hpp"
#include "qfrac/quadrature.hpp"

namespace qfrac {

void QuadratureSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (t_max != 0.0 && !(t_max > 1.0)) throw std::invalid_argument("t_max must exceed 1");
  if (panels_per_decade < 4) throw std::invalid_argument("panels_per_decade must be at least 4");
  if (nodes_per_panel < 1 || inner_panels < 1) throw std::invalid_argument("panel counts must be positive");
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be positive");
}

namespace {

struct Node {
  double t;       // signed contour parameter, s = -j t
  double weight;  // includes |t|^{alpha-1}
  bool inner;     // |t| <= 1: bounded form of the integrand
};

std::vector<Node> build_nodes(const QuadratureSpec& q, double t_max) {
  const double a = q.alpha;
  std::vector<Node> half;
  // (0, tau_1]: Gauss-Jacobi for t^{a-1}; further graded panels in u = t^a, where dt t^{a-1} = du / a.
  const double tau1 = std::pow(1.0 / q.inner_panels, 1.0 / a);
  const QuadRule gj = gauss_jacobi_left(q.nodes_per_panel, a, tau1);
  for (std::size_t i = 0; i < gj.nodes.size(); ++i) half.push_back({gj.nodes[i], gj.weights[i], true});
  for (int k = 1; k < q.inner_panels; ++k) {
    const QuadRule gl = gauss_legendre(q.nodes_per_panel, double(k) / q.inner_panels, double(k + 1) / q.inner_panels);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
      half.push_back({std::pow(gl.nodes[i], 1.0 / a), gl.weights[i] / a, true});
  }
  // [1, t_max]: log-spaced panels.
  const int panels = std::max(1, static_cast<int>(std::ceil(std::log10(t_max) * q.panels_per_decade)));
  const double ratio = std::pow(t_max, 1.0 / panels);
  double lo = 1.0;
  for (int k = 0; k < panels; ++k) {
    const double hi = (k + 1 == panels) ? t_max : lo * ratio;
    const QuadRule gl = gauss_legendre(q.nodes_per_panel, lo, hi);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
      half.push_back({gl.nodes[i], gl.weights[i] * std::pow(gl.nodes[i], a - 1.0), false});
    lo = hi;
  }
  std::vector<Node> nodes;
  nodes.reserve(2 * half.size());
  for (auto it = half.rbegin(); it != half.rend(); ++it) nodes.push_back({-it->t, it->weight, it->inner});
  nodes.insert(nodes.end(), half.begin(), half.end());
  return nodes;
}

// Pairwise summation of node vectors in fixed order.
std::vector<double> pairwise_sum(const std::vector<std::vector<double>>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  auto left = pairwise_sum(parts, lo, mid);
  const auto right = pairwise_sum(parts, mid, hi);
  for (std::size_t i = 0; i < left.size(); ++i) left[i] += right[i];
  return left;
}

}  // namespace

FracPowResult frac_power(const SResolvent& R, const GridFunction& v, const FracPowOptions& opt) {
  const QuadratureSpec& q = opt.quad;
  q.validate();
  const double a = q.alpha;
  const SlicePoint unit = SlicePoint::make(opt.j, 1.0);
  const Quaternion j = unit.j;
  const auto vp = v.pack();
  if (vp.size() != R.size()) throw std::invalid_argument("shape mismatch");

  FracPowDiagnostics diag;
  diag.norm_T_bound = R.norm_bound();
  const auto Tv = R.apply_T(vp);
  const double tv_norm = norm(Tv);
  if (tv_norm == 0.0) {
    diag.t_max = q.t_max;
    return {GridFunction(v.grid()), diag};
  }

  // Truncation: either a plain cut (tail bounded with Theta) or a Neumann expansion beyond t_max.
  const double normT = R.norm_bound();
  double t_max = q.t_max;
  int terms = q.tail_terms;
  if (terms == 0) {
    if (t_max == 0.0) {
      t_max = std::max(10.0, std::pow(opt.theta / (std::numbers::pi * (1.0 - a) * q.tail_tol), 1.0 / (1.0 - a)) * (1.0 + 1e-9));
      if (t_max > 1e12) throw std::invalid_argument("tail tolerance unmet without tail terms; enable tail terms or relax tail_tol");
    }
    diag.tail_bound = opt.theta * std::pow(t_max, a - 1.0) / (std::numbers::pi * (1.0 - a));
    if (diag.tail_bound > q.tail_tol)
      throw std::invalid_argument(fmt::format("tail bound {:.3e} exceeds tolerance {:.3e}; increase t_max", diag.tail_bound,
                                              q.tail_tol));
  } else {
    if (t_max == 0.0) t_max = std::max(10.0, 4.0 * normT);
    const double rho = normT / t_max;
    if (!(rho < 1.0)) throw std::invalid_argument("t_max must exceed the norm bound of T when tail terms are used");
    auto remainder = [&](int K) {
      return std::pow(rho, K) / (1.0 - rho) * std::pow(t_max, a - 1.0) / (std::numbers::pi * (1.0 - a));
    };
    if (terms < 0) {
      terms = 1;
      while (remainder(terms) > q.tail_tol && terms < 400) ++terms;
    }
    diag.tail_bound = remainder(terms);
    if (diag.tail_bound > q.tail_tol)
      throw std::invalid_argument(fmt::format("tail bound {:.3e} exceeds tolerance {:.3e}; increase t_max or tail terms",
                                              diag.tail_bound, q.tail_tol));
  }
  diag.t_max = t_max;
  diag.tail_terms = terms;

  const std::vector<Node> nodes = build_nodes(q, t_max);
  diag.nodes = nodes.size();
  std::vector<std::vector<double>> parts(nodes.size());
  std::vector<double> node_abs(nodes.size());
  std::vector<SolveReport> reports(nodes.size());

  parallel_for(nodes.size(), opt.threads, [&](std::size_t k) {
    const Node& nd = nodes[k];
    const SlicePoint sp{j, -nd.t};
    const Quaternion s = sp.value();
    // -s^{a-1} with the modulus moved into the weight; the minus sign is ds_j = -dt.
    const Quaternion c = (-1.0 / std::pow(std::abs(nd.t), a - 1.0)) * slice_power(sp, a - 1.0);
    // Near t = 0 the requested residual can sit below the rounding floor of Q_s.
    const double kappa = (normT * normT + nd.t * nd.t) / (nd.t * nd.t);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * kappa;
    std::vector<double> y;
    try {
      if (opt.variant == FracVariant::right) {
        if (nd.inner) {
          y = right_multiplied(R.SR_inv(s, vp, &reports[k], q.solver_tol, floor), s);
          for (std::size_t i = 0; i < y.size(); ++i) y[i] -= vp[i];
        } else {
          y = R.SR_inv(s, Tv, &reports[k], q.solver_tol, floor);
        }
        right_multiply(y, c);
      } else {
        if (nd.inner) {
          const auto x = right_multiplied(vp, c);
          y = R.SL_inv(s, right_multiplied(x, s), &reports[k], q.solver_tol, floor);
          for (std::size_t i = 0; i < y.size(); ++i) y[i] -= x[i];
        } else {
          y = R.SL_inv(s, right_multiplied(Tv, c), &reports[k], q.solver_tol, floor);
        }
      }
    } catch (const SolveError& e) {
      throw SolveError(fmt::format("node solve failed at t = {:.17g}: {}", nd.t, e.what()), e.best_residual());
    }
    node_abs[k] = nd.weight * norm(y);
    for (auto& val : y) val *= nd.weight;
    parts[k] = std::move(y);
  });

  for (std::size_t k = 0; k < nodes.size(); ++k) {
    (nodes[k].inner ? diag.abs_integral_inner : diag.abs_integral_outer) += node_abs[k];
    diag.max_solver_iterations = std::max<std::size_t>(diag.max_solver_iterations, reports[k].iterations);
    diag.max_solver_residual = std::max(diag.max_solver_residual, reports[k].residual);
  }
  diag.solves = nodes.size();
  diag.abs_integral_inner *= std::sqrt(v.grid()->cell_volume()) / (2.0 * std::numbers::pi);
  diag.abs_integral_outer *= std::sqrt(v.grid()->cell_volume()) / (2.0 * std::numbers::pi);

  std::vector<double> total = pairwise_sum(parts, 0, parts.size());
  for (auto& val : total) val /= 2.0 * std::numbers::pi;

  // Beyond t_max: sum_k T^{k+1} v * (-2 cos(pi (a-2-k)/2) t_max^{a-1-k} / (1+k-a)) / (2 pi).
  if (terms > 0) {
    std::vector<double> w = Tv;
    for (int k = 0; k < terms; ++k) {
      const double coef = -2.0 * std::cos(std::numbers::pi * (a - 2.0 - k) / 2.0) * std::pow(t_max, a - 1.0) /
                          ((1.0 + k - a) * 2.0 * std::numbers::pi);
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += coef * w[i];
      w = R.apply_T(w);
      for (auto& val : w) val /= t_max;
    }
  }
  return {GridFunction::unpack(v.grid(), total), diag};
}

FracPowResult frac_power(const SResolvent& R, const ConstantsReport& constants, const GridFunction& v,
                         FracPowOptions opt) {
  const HypothesisResult h = hypothesis_check(constants);
  if (!h.pass) throw std::invalid_argument("frac_power requires the coercivity hypotheses: " + h.explanation);
  opt.theta = constants.Theta;
  return frac_power(R, v, opt);
}

double homogeneity_check(const CoefficientField& coeffs, int m, int stencil_order, double c, const GridFunction& v,
                         const FracPowOptions& opt) {
  if (!(c > 0.0)) throw std::invalid_argument("homogeneity factor must be positive");
  const GridPtr& g = coeffs.grid();
  const CoefficientField scaled = coeffs.scaled(c);
  const ConstantsReport r1 = compute_constants(coeffs, *g, m);
  const ConstantsReport rc = compute_constants(scaled, *g, m);
  const SResolvent R1(assemble_T(g, coeffs, m, stencil_order));
  const SResolvent Rc(assemble_T(g, scaled, m, stencil_order));
  const auto p1 = frac_power(R1, r1, v, opt).value;
  const auto pc = frac_power(Rc, rc, v, opt).value;
  const GridFunction ref = p1.scaled(std::pow(c, opt.quad.alpha));
  const double den = ref.l2_norm();
  return den == 0.0 ? 0.0 : (pc - ref).l2_norm() / den;
}

double left_right_agreement(const SResolvent& R, const GridFunction& v, FracPowOptions opt) {
  opt.variant = FracVariant::left;
  const auto pl = frac_power(R, v, opt).value;
  opt.variant = FracVariant::right;
  const auto pr = frac_power(R, v, opt).value;
  const double den = pl.l2_norm();
  if (den == 0.0) return 0.0;
  return (pl - pr).l2_norm() / den;
}

std::string fracpow_csv(const GridFunction& u) {
  const Grid& g = *u.grid();
  std::string out = "node,x,y,z,c0,c1,c2,c3,c4,c5,c6,c7\n";
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const std::size_t node = g.interior_node(id);
    const Vec3 x = g.coords(node);
    out += fmt::format("{},{:.17g},{:.17g},{:.17g}", node, x[0], x[1], x[2]);
    const CQuaternion& val = u.at(node);
    for (int k = 0; k < 8; ++k) out += fmt::format(",{:.17g}", val[k]);
    out += '\n';
  }
  return out;
}

}  // namespace qfrac

#pragma once

#include <string>
#include <vector>

#include "qfrac/forms.hpp"
#include "qfrac/resolvent.hpp"

namespace qfrac {

enum class FracVariant { left, right };

struct QuadratureSpec {
  double alpha = 0.5;
  double t_max = 0.0;  // 0: automatic
  int panels_per_decade = 8;
  int nodes_per_panel = 8;
  int inner_panels = 8;  // graded panels on (0, 1]
  int tail_terms = -1;   // Neumann-series terms for |t| > t_max; -1 automatic, 0 plain truncation
  double tail_tol = 1e-8;
  double solver_tol = 1e-12;

  void validate() const;
};

struct FracPowOptions {
  QuadratureSpec quad;
  Quaternion j = Quaternion::unit(0);
  FracVariant variant = FracVariant::right;
  double theta = 2.0 * 1.4142135623730951;
  int threads = 1;
};

struct FracPowDiagnostics {
  double t_max = 0.0;
  double norm_T_bound = 0.0;
  double tail_bound = 0.0;  // relative to ||Tv||
  int tail_terms = 0;
  std::size_t nodes = 0;
  std::size_t solves = 0;
  std::size_t max_solver_iterations = 0;
  double max_solver_residual = 0.0;
  /// Quadrature-weighted sums of the integrand norm, per region: inner, outer.
  double abs_integral_inner = 0.0;
  double abs_integral_outer = 0.0;
};

struct FracPowResult {
  GridFunction value;
  FracPowDiagnostics diag;
};

/// P_alpha(T) v from the Balakrishnan integral along -j R. Theta comes from the options.
FracPowResult frac_power(const SResolvent& R, const GridFunction& v, const FracPowOptions& opt);

/// As above, enforcing the hypotheses and taking Theta from the report.
FracPowResult frac_power(const SResolvent& R, const ConstantsReport& constants, const GridFunction& v,
                         FracPowOptions opt);

/// ||P(cT)v - c^alpha P(T)v|| / ||c^alpha P(T)v|| with cT assembled from c a_l.
double homogeneity_check(const CoefficientField& coeffs, int m, int stencil_order, double c, const GridFunction& v,
                         const FracPowOptions& opt);

/// ||P_left v - P_right v|| / ||P_left v||; zero for v = 0.
double left_right_agreement(const SResolvent& R, const GridFunction& v, FracPowOptions opt);

/// Node table: index, coordinates, 8 components.
std::string fracpow_csv(const GridFunction& u);

}  // namespace qfrac

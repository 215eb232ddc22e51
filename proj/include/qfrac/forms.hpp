#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qfrac/domain.hpp"
#include "qfrac/qalgebra.hpp"

namespace qfrac {

/// Sign convention for the mixed-direction sums of the expanded form.
/// `derived` uses the sign obtained by expanding T^2 directly; `as_printed` flips it.
enum class CrossSign { derived, as_printed };

struct FormOptions {
  int stencil_order = 2;
  CrossSign cross_sign = CrossSign::derived;
};

/// Term-by-term discrete evaluation of b_s(u, v), quaternion valued.
Quaternion bilinear_form(const CoefficientField& c, const Quaternion& s, const GridFunction& u,
                         const GridFunction& v, int m, const FormOptions& opt = {});

/// Sum_l ||D^m_{x_l} u||^2 with the same discrete derivatives.
double dm_seminorm2(const GridFunction& u, int m, int stencil_order = 2);

/// Discrete T u computed from coefficient samples, without the operator module.
std::vector<CQuaternion> apply_T_direct(const CoefficientField& c, const GridFunction& u, int m,
                                        int stencil_order = 2);

struct ConstantsReport {
  int m = 1;
  bool bounded_case = true;
  double C_T = 0.0;
  double M = 0.0;
  double C1 = 0.0;
  double Theta = 0.0;
  double C_Omega = 0.0;
  double C_Omega_discrete = 0.0;
  double K_Omega = 0.0;
  double K_m = 0.0;
  double K_rep = 0.0;  // K(m), the repetition count
  double K_m_Omega = 0.0;
  double K_m_phi_lambda = 0.0;
  double C_phi = 0.0;
  double sup_diag_deriv = 0.0;
  double sup_any_deriv = 0.0;
  double max_a = 0.0;
  double max_a2 = 0.0;
  double cont_C1 = 0.0;
  double cont_C2 = 0.0;
  double cont_C3 = 0.0;
  double cont_C4 = 0.0;  // at Re(s) = 0
  bool C_T_positive = false;
  bool gap_positive = false;
  std::optional<bool> decay_condition;
  std::vector<std::string> warnings;
};

/// K_m: max over the unit sphere of sum_{|b|=m} xi^{2b} / sum_l xi_l^{2m}.
double max_multinomial_ratio(int m);
/// K(m): repetition count of order-m monomials in the iterated Poincare expansion.
int poincare_repetition_count(int m);

ConstantsReport compute_constants(const CoefficientField& c, const Grid& g, int m,
                                  const std::optional<WeightFunction>& weight = {});

/// C(s) with |b_s(u,v)| <= C(s) ||u||_{D^m} ||v||_{D^m}.
double continuity_constant(const ConstantsReport& r, const Quaternion& s);

struct HypothesisResult {
  bool pass = false;
  std::string explanation;
};

HypothesisResult hypothesis_check(const ConstantsReport& r);

struct CoercivityResult {
  double min_ratio_l2 = 0.0;  // min Re b / ||u||^2
  double min_ratio_dm = 0.0;  // min Re b / ||u||^2_{D^m}
  double min_excess_l2 = 0.0;  // min Re b - t^2 ||u||^2
  double min_excess_dm = 0.0;  // min Re b - (C_T/2 - M) ||u||^2_{D^m}
  double max_t_ratio = 0.0;  // max ||Tu||^2 / Re b
  double max_continuity_ratio = 0.0;  // max |b(u,v)| / (C(s) ||u|| ||v||)
  bool pass_l2 = false;
  bool pass_dm = false;
  bool pass_t = false;
  bool pass_continuity = false;
};

CoercivityResult coercivity_probe(const CoefficientField& c, const ConstantsReport& r, double t,
                                  const Quaternion& j, const std::vector<GridFunction>& suite,
                                  const FormOptions& opt = {});

}  // namespace qfrac

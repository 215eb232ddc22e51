#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfrac/forms.hpp"
#include "qfrac/operator.hpp"

namespace qfrac {

enum class SolveMethod { iterative_cg_on_normal_structure, dense_lu_oracle };

std::string to_string(SolveMethod m);

struct SolveReport {
  double residual = 0.0;  // ||Q u - F|| / ||F||
  int iterations = 0;
  SolveMethod method = SolveMethod::iterative_cg_on_normal_structure;
  std::string algorithm;  // cg, gmres or lu
  double tolerance = 0.0;
};

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 0;  // 0: 10 * (8N) capped at 20000
  SolveMethod method = SolveMethod::iterative_cg_on_normal_structure;
  std::size_t dense_cap = 4096;
  std::uint64_t seed = 0x5eed;
};

/// Solve Q_s u = F for an assembled Q_s with Re(s) = 0, s != 0.
std::pair<GridFunction, SolveReport> solve_Qs(const QOperator& Qs, const GridFunction& F, const SolverOptions& opt = {});

/// Numerical symmetry test x^T A y = y^T A x on random pairs.
bool numerically_symmetric(const BlockCsr& A, int pairs, std::uint64_t seed);

/// Resolvent machinery for one T, with T^2 formed once and reused for every s = j t.
class SResolvent {
 public:
  SResolvent(const QOperator& T, SolverOptions opt = {});

  const QOperator& T() const { return T_; }
  const SolverOptions& options() const { return opt_; }
  bool symmetric() const { return symmetric_; }
  std::size_t size() const { return T_.size(); }

  std::vector<double> apply_T(std::span<const double> x) const { return T_.apply(x); }
  std::vector<double> apply_Tt(std::span<const double> x) const { return Tt_.apply(x); }
  std::vector<double> apply_Q(const Quaternion& s, std::span<const double> x) const;
  std::vector<double> apply_Qt(const Quaternion& s, std::span<const double> x) const;

  /// Q_s^{-1} F; throws SolveError on failure. tol = 0 uses the configured tolerance.
  /// A residual that misses tol but stays within accept is not an error.
  std::vector<double> solve(const Quaternion& s, std::span<const double> F, SolveReport* rep = nullptr,
                            double tol = 0.0, double accept = 0.0) const;
  std::vector<double> solve_transpose(const Quaternion& s, std::span<const double> F) const;

  /// S_L^{-1}(s,T) w = (Q^{-1} w) s_bar - T Q^{-1} w.
  std::vector<double> SL_inv(const Quaternion& s, std::span<const double> w, SolveReport* rep = nullptr,
                             double tol = 0.0, double accept = 0.0) const;
  /// S_R^{-1}(s,T) w = -(T Q^{-1} w - (Q^{-1} w) s_bar).
  std::vector<double> SR_inv(const Quaternion& s, std::span<const double> w, SolveReport* rep = nullptr,
                             double tol = 0.0, double accept = 0.0) const;

  /// Rigorous upper bound sqrt(||T||_1 ||T||_inf) on the spectral norm of T.
  double norm_bound() const { return norm_bound_; }

 private:
  void check_shift(const Quaternion& s) const;
  std::vector<double> krylov(const Quaternion& s, std::span<const double> F, bool transpose, SolveReport* rep,
                             double tol, double accept) const;

  QOperator T_;
  QOperator Tt_;
  BlockCsr T2_;
  BlockCsr T2t_;
  bool symmetric_;
  double norm_bound_;
  SolverOptions opt_;
};

GridFunction apply_SL_inv(const SResolvent& R, const Quaternion& s, const GridFunction& w);
GridFunction apply_SR_inv(const SResolvent& R, const Quaternion& s, const GridFunction& w);

struct PowerIterationResult {
  double estimate = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// ||A|| via power iteration on A^T A from the start vector x0.
PowerIterationResult power_iteration_norm(const std::function<std::vector<double>(std::span<const double>)>& A,
                                          const std::function<std::vector<double>(std::span<const double>)>& At,
                                          std::vector<double> x0, double tol = 1e-3, int max_iter = 500);

struct NormScanRow {
  double t = 0.0;
  double q_inv_norm = 0.0;
  double sl_norm = 0.0;
  double sr_norm = 0.0;
  double tq_norm = 0.0;
  double bound_q = 0.0;
  double bound_s = 0.0;
  double bound_tq = 0.0;
  bool pass_q = false;
  bool pass_s = false;
  bool pass_tq = false;
  int power_iterations = 0;
  std::string error;  // nonempty when a solve failed
};

struct NormScan {
  Quaternion j;
  std::vector<NormScanRow> rows;
  bool all_pass() const;
  bool any_error() const;
  /// Columns t, q_inv_norm, sl_norm, sr_norm, bound_q, bound_s, pass_q, pass_s.
  std::string to_csv() const;
};

struct NormScanOptions {
  double tol = 1e-3;
  int max_iter = 500;
  int threads = 1;
  std::uint64_t seed = 0x5eed;
};

/// Requires hypothesis_check(constants) to pass.
NormScan norm_scan(const SResolvent& R, const ConstantsReport& constants, const Quaternion& j,
                   const std::vector<double>& t_values, const NormScanOptions& opt = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers; results must be written by index.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Deterministic random packed vector.
std::vector<double> random_vector(std::size_t n, std::uint64_t seed);

}  // namespace qfrac

#include "qfrac/resolvent.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <fmt/format.h>
#include <mutex>
#include <random>
#include <thread>

#include "qfrac/krylov.hpp"

namespace qfrac {

std::string to_string(SolveMethod m) {
  return m == SolveMethod::dense_lu_oracle ? "dense_lu_oracle" : "iterative_cg_on_normal_structure";
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = nd(rng);
  return x;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

bool numerically_symmetric(const BlockCsr& A, int pairs, std::uint64_t seed) {
  const std::size_t n = 8 * A.rows();
  std::vector<double> Ax(n), Ay(n);
  for (int p = 0; p < pairs; ++p) {
    const auto x = random_vector(n, seed + 2 * p);
    const auto y = random_vector(n, seed + 2 * p + 1);
    A.multiply(x, Ax);
    A.multiply(y, Ay);
    const double lhs = dot(y, Ax), rhs = dot(x, Ay);
    const double scale = std::max(norm(Ax) * norm(y), norm(Ay) * norm(x));
    if (std::abs(lhs - rhs) > 1e-12 * scale) return false;
  }
  return true;
}

namespace {

int iteration_cap(const SolverOptions& opt, std::size_t n) {
  if (opt.max_iter > 0) return opt.max_iter;
  return static_cast<int>(std::min<std::size_t>(20000, 10 * n));
}

void require_imaginary_shift(const Quaternion& s) {
  if (s.s0 != 0.0) throw std::invalid_argument("resolvent requires Re(s) = 0");
  if (norm2(s) == 0.0) throw std::invalid_argument("resolvent requires s != 0 (t = 0 is excluded)");
}

std::vector<double> dense_solve(const BlockCsr& Q, std::span<const double> F, const SolverOptions& opt,
                                SolveReport* rep) {
  const std::size_t n = 8 * Q.rows();
  if (n > opt.dense_cap) throw std::invalid_argument(fmt::format("dense oracle refuses 8N = {} > cap {}", n, opt.dense_cap));
  const Eigen::MatrixXd A = Q.dense();
  const Eigen::Map<const Eigen::VectorXd> b(F.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd x = A.partialPivLu().solve(b);
  std::vector<double> out(x.data(), x.data() + n);
  if (rep) {
    const double bn = b.norm();
    rep->residual = bn > 0 ? (A * x - b).norm() / bn : 0.0;
    rep->iterations = 1;
    rep->method = SolveMethod::dense_lu_oracle;
    rep->algorithm = "lu";
    rep->tolerance = opt.tol;
  }
  return out;
}

}  // namespace

std::pair<GridFunction, SolveReport> solve_Qs(const QOperator& Qs, const GridFunction& F, const SolverOptions& opt) {
  if (Qs.label() != OperatorLabel::Qs || !Qs.shift()) throw std::invalid_argument("solve_Qs needs an operator labelled Qs");
  require_imaginary_shift(*Qs.shift());
  const auto b = F.pack();
  if (b.size() != Qs.size()) throw std::invalid_argument("shape mismatch");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("right-hand side is not finite");
  SolveReport rep;
  rep.tolerance = opt.tol;
  std::vector<double> x;
  if (opt.method == SolveMethod::dense_lu_oracle) {
    x = dense_solve(Qs.matrix(), b, opt, &rep);
  } else {
    x.assign(b.size(), 0.0);
    const BlockCsr& A = Qs.matrix();
    LinearMap op = [&A](std::span<const double> in, std::span<double> out) { A.multiply(in, out); };
    const bool sym = numerically_symmetric(A, 10, opt.seed);
    const KrylovResult kr = sym ? conjugate_gradient(op, b, x, opt.tol, iteration_cap(opt, b.size()))
                                : gmres(op, b, x, opt.tol, iteration_cap(opt, b.size()));
    rep.algorithm = sym ? "cg" : "gmres";
    rep.iterations = kr.iterations;
    rep.residual = kr.relative_residual;
    rep.method = SolveMethod::iterative_cg_on_normal_structure;
    if (!kr.converged)
      throw SolveError(fmt::format("{} did not converge: residual {:.3e} after {} iterations", rep.algorithm,
                                   kr.relative_residual, kr.iterations),
                       kr.relative_residual);
  }
  return {GridFunction::unpack(Qs.grid(), x), rep};
}

// ---------------------------------------------------------------------------

namespace {

double norm_one_inf_bound(const BlockCsr& A) {
  std::vector<double> col(8 * A.rows(), 0.0);
  double row_max = 0.0;
  const auto& rp = A.row_ptr();
  for (std::size_t r = 0; r < A.rows(); ++r) {
    double rows[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          const double v = std::abs(A.blocks()[k][8 * i + j]);
          rows[i] += v;
          col[8 * A.cols()[k] + j] += v;
        }
    for (double v : rows) row_max = std::max(row_max, v);
  }
  const double col_max = col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
  return std::sqrt(row_max * col_max);
}

}  // namespace

SResolvent::SResolvent(const QOperator& T, SolverOptions opt)
    : T_(T), Tt_(T.transpose()), T2_(BlockCsr::product(T.matrix(), T.matrix())), opt_(opt) {
  if (T.label() != OperatorLabel::T) throw std::invalid_argument("SResolvent needs an operator labelled T");
  T2t_ = T2_.transpose();
  symmetric_ = numerically_symmetric(T2_, 10, opt.seed);
  norm_bound_ = norm_one_inf_bound(T.matrix());
}

void SResolvent::check_shift(const Quaternion& s) const { require_imaginary_shift(s); }

std::vector<double> SResolvent::apply_Q(const Quaternion& s, std::span<const double> x) const {
  std::vector<double> y(x.size());
  T2_.multiply(x, y);
  const double s2 = norm2(s);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s2 * x[i];
  if (s.s0 != 0.0) {
    const auto tx = T_.apply(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= 2.0 * s.s0 * tx[i];
  }
  return y;
}

std::vector<double> SResolvent::apply_Qt(const Quaternion& s, std::span<const double> x) const {
  std::vector<double> y(x.size());
  T2t_.multiply(x, y);
  const double s2 = norm2(s);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s2 * x[i];
  if (s.s0 != 0.0) {
    const auto tx = Tt_.apply(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= 2.0 * s.s0 * tx[i];
  }
  return y;
}

std::vector<double> SResolvent::krylov(const Quaternion& s, std::span<const double> F, bool transpose,
                                       SolveReport* rep, double tol, double accept) const {
  check_shift(s);
  if (tol <= 0.0) tol = opt_.tol;
  if (F.size() != size()) throw std::invalid_argument("shape mismatch");
  if (opt_.method == SolveMethod::dense_lu_oracle) {
    BlockCsr Q = BlockCsr::combine(1.0, transpose ? T2t_ : T2_, 1.0, BlockCsr::identity(T2_.rows(), norm2(s)));
    return dense_solve(Q, F, opt_, rep);
  }
  std::vector<double> x(F.size(), 0.0);
  LinearMap op = [&](std::span<const double> in, std::span<double> out) {
    const auto y = transpose ? apply_Qt(s, in) : apply_Q(s, in);
    std::copy(y.begin(), y.end(), out.begin());
  };
  const int cap = iteration_cap(opt_, F.size());
  const KrylovResult kr = symmetric_ ? conjugate_gradient(op, F, x, tol, cap) : gmres(op, F, x, tol, cap);
  if (rep) {
    rep->residual = kr.relative_residual;
    rep->iterations = kr.iterations;
    rep->method = SolveMethod::iterative_cg_on_normal_structure;
    rep->algorithm = symmetric_ ? "cg" : "gmres";
    rep->tolerance = tol;
  }
  if (!kr.converged && !(kr.relative_residual <= accept))
    throw SolveError(fmt::format("{} did not converge at |s| = {:.17g}: residual {:.3e} after {} iterations",
                                 symmetric_ ? "cg" : "gmres", abs(s), kr.relative_residual, kr.iterations),
                     kr.relative_residual);
  return x;
}

std::vector<double> SResolvent::solve(const Quaternion& s, std::span<const double> F, SolveReport* rep,
                                      double tol, double accept) const {
  return krylov(s, F, false, rep, tol, accept);
}

std::vector<double> SResolvent::solve_transpose(const Quaternion& s, std::span<const double> F) const {
  return krylov(s, F, !symmetric_, nullptr, 0.0, 0.0);
}

std::vector<double> SResolvent::SL_inv(const Quaternion& s, std::span<const double> w, SolveReport* rep,
                                       double tol, double accept) const {
  const auto v = solve(s, w, rep, tol, accept);
  auto out = right_multiplied(v, conj(s));
  const auto tv = T_.apply(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tv[i];
  return out;
}

std::vector<double> SResolvent::SR_inv(const Quaternion& s, std::span<const double> w, SolveReport* rep,
                                       double tol, double accept) const {
  const auto v = solve(s, w, rep, tol, accept);
  auto out = T_.apply(v);
  const auto vs = right_multiplied(v, conj(s));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -(out[i] - vs[i]);
  return out;
}

GridFunction apply_SL_inv(const SResolvent& R, const Quaternion& s, const GridFunction& w) {
  return GridFunction::unpack(R.T().grid(), R.SL_inv(s, w.pack()));
}

GridFunction apply_SR_inv(const SResolvent& R, const Quaternion& s, const GridFunction& w) {
  return GridFunction::unpack(R.T().grid(), R.SR_inv(s, w.pack()));
}

// ---------------------------------------------------------------------------

PowerIterationResult power_iteration_norm(const std::function<std::vector<double>(std::span<const double>)>& A,
                                          const std::function<std::vector<double>(std::span<const double>)>& At,
                                          std::vector<double> x, double tol, int max_iter) {
  PowerIterationResult res;
  double xn = norm(x);
  if (xn == 0.0) throw std::invalid_argument("power iteration needs a nonzero start vector");
  for (auto& v : x) v /= xn;
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const auto y = A(x);
    const double sigma = norm(y);
    res.estimate = sigma;
    res.iterations = it;
    if (sigma == 0.0) {
      res.converged = true;
      break;
    }
    if (prev >= 0.0 && std::abs(sigma - prev) <= tol * sigma) {
      res.converged = true;
      break;
    }
    prev = sigma;
    x = At(y);
    xn = norm(x);
    if (xn == 0.0) {
      res.converged = true;
      break;
    }
    for (auto& v : x) v /= xn;
  }
  return res;
}

bool NormScan::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const NormScanRow& r) { return r.error.empty() && r.pass_q && r.pass_s; });
}

bool NormScan::any_error() const {
  return std::any_of(rows.begin(), rows.end(), [](const NormScanRow& r) { return !r.error.empty(); });
}

std::string NormScan::to_csv() const {
  std::string out = "t,q_inv_norm,sl_norm,sr_norm,bound_q,bound_s,pass_q,pass_s\n";
  for (const auto& r : rows) {
    auto num = [&](double v) { return r.error.empty() ? fmt::format("{:.17g}", v) : std::string("nan"); };
    out += fmt::format("{:.17g},{},{},{},{:.17g},{:.17g},{},{}\n", r.t, num(r.q_inv_norm), num(r.sl_norm),
                       num(r.sr_norm), r.bound_q, r.bound_s, r.pass_q ? "true" : "false", r.pass_s ? "true" : "false");
  }
  return out;
}

NormScan norm_scan(const SResolvent& R, const ConstantsReport& constants, const Quaternion& j,
                   const std::vector<double>& t_values, const NormScanOptions& opt) {
  const HypothesisResult h = hypothesis_check(constants);
  if (!h.pass) throw std::invalid_argument("norm_scan requires the coercivity hypotheses: " + h.explanation);
  const SlicePoint unit = SlicePoint::make(j, 1.0);
  NormScan scan;
  scan.j = unit.j;
  scan.rows.resize(t_values.size());
  // Start vectors are transported into the slice so that results do not depend on j.
  const Quaternion frame = slice_frame(unit.j);
  const auto base = random_vector(R.size(), opt.seed);
  const auto x0 = right_multiplied(base, frame);

  parallel_for(t_values.size(), opt.threads, [&](std::size_t idx) {
    NormScanRow& row = scan.rows[idx];
    const double t = t_values[idx];
    row.t = t;
    row.bound_q = 1.0 / (t * t);
    row.bound_s = constants.Theta / std::abs(t);
    row.bound_tq = 1.0 / (std::sqrt(constants.C1) * std::abs(t));
    try {
      if (t == 0.0) throw std::invalid_argument("t = 0 is excluded");
      const Quaternion s = t * unit.j;
      auto Qinv = [&](std::span<const double> x) { return R.solve(s, x); };
      auto QinvT = [&](std::span<const double> x) { return R.solve_transpose(s, x); };
      const auto pq = power_iteration_norm(Qinv, QinvT, x0, opt.tol, opt.max_iter);

      auto SL = [&](std::span<const double> x) { return R.SL_inv(s, x); };
      auto SR = [&](std::span<const double> x) { return R.SR_inv(s, x); };
      // Transpose of (R_{s_bar} - T) Q^{-1} is Q^{-T} (R_s - T^T).
      auto St = [&](std::span<const double> x) {
        auto y = right_multiplied(x, s);
        const auto tx = R.apply_Tt(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= tx[i];
        return R.solve_transpose(s, y);
      };
      const auto pl = power_iteration_norm(SL, St, x0, opt.tol, opt.max_iter);
      const auto pr = power_iteration_norm(SR, St, x0, opt.tol, opt.max_iter);
      auto TQ = [&](std::span<const double> x) { return R.apply_T(R.solve(s, x)); };
      auto TQt = [&](std::span<const double> x) { return R.solve_transpose(s, R.apply_Tt(x)); };
      const auto pt = power_iteration_norm(TQ, TQt, x0, opt.tol, opt.max_iter);

      row.q_inv_norm = pq.estimate;
      row.sl_norm = pl.estimate;
      row.sr_norm = pr.estimate;
      row.tq_norm = pt.estimate;
      row.power_iterations = pq.iterations + pl.iterations + pr.iterations + pt.iterations;
      const double slack = 1.0 + opt.tol;
      row.pass_q = row.q_inv_norm <= row.bound_q * slack;
      row.pass_s = row.sl_norm <= row.bound_s * slack && row.sr_norm <= row.bound_s * slack;
      row.pass_tq = row.tq_norm <= row.bound_tq * slack;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.pass_q = row.pass_s = row.pass_tq = false;
    }
  });
  return scan;
}

}  // namespace qfrac

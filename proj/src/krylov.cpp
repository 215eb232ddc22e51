#include "qfrac/krylov.hpp"

#include <cmath>
#include <stdexcept>

namespace qfrac {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

double true_residual(const LinearMap& A, std::span<const double> b, std::span<const double> x, std::vector<double>& r) {
  A(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm(r);
}

}  // namespace

KrylovResult conjugate_gradient(const LinearMap& A, std::span<const double> b, std::span<double> x, double tol,
                                int max_iter) {
  const std::size_t n = b.size();
  KrylovResult res;
  const double bn = norm(b);
  if (bn == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  std::vector<double> r(n), p(n), Ap(n);
  double rn = true_residual(A, b, x, r);
  // The recursive residual drifts from the true one on ill-conditioned systems: restart from the
  // true residual while that keeps helping.
  for (int cycle = 0; cycle < 8 && rn > tol * bn && res.iterations < max_iter; ++cycle) {
    p = r;
    double rr = rn * rn;
    while (res.iterations < max_iter && std::sqrt(rr) > tol * bn) {
      A(p, Ap);
      const double pAp = dot(p, Ap);
      if (!(pAp > 0.0)) break;  // not positive definite along p
      const double alpha = rr / pAp;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      const double rr_new = dot(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      ++res.iterations;
    }
    const double rn_new = true_residual(A, b, x, r);
    const bool stalled = rn_new > 0.5 * rn;
    rn = rn_new;
    if (stalled) break;
  }
  res.relative_residual = rn / bn;
  res.converged = res.relative_residual <= tol;
  return res;
}

KrylovResult gmres(const LinearMap& A, std::span<const double> b, std::span<double> x, double tol, int max_iter,
                   int restart) {
  const std::size_t n = b.size();
  KrylovResult res;
  const double bn = norm(b);
  if (bn == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  std::vector<double> r(n), w(n);
  std::vector<std::vector<double>> V;
  std::vector<std::vector<double>> H(restart + 1, std::vector<double>(restart, 0.0));
  std::vector<double> cs(restart), sn(restart), g(restart + 1);
  int total = 0;
  while (total < max_iter) {
    const double beta = true_residual(A, b, x, r);
    if (beta <= tol * bn) break;
    V.assign(1, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < restart && total < max_iter; ++k, ++total) {
      A(V[k], w);
      for (int j = 0; j <= k; ++j) {
        H[j][k] = dot(w, V[j]);
        for (std::size_t i = 0; i < n; ++i) w[i] -= H[j][k] * V[j][i];
      }
      H[k + 1][k] = norm(w);
      V.emplace_back(n);
      if (H[k + 1][k] > 0.0)
        for (std::size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / H[k + 1][k];
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H[j][k] + sn[j] * H[j + 1][k];
        H[j + 1][k] = -sn[j] * H[j][k] + cs[j] * H[j + 1][k];
        H[j][k] = t;
      }
      const double d = std::hypot(H[k][k], H[k + 1][k]);
      cs[k] = H[k][k] / d;
      sn[k] = H[k + 1][k] / d;
      H[k][k] = d;
      H[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= tol * bn * 0.5) {
        ++k;
        ++total;
        break;
      }
    }
    // Back substitution for the least-squares coefficients.
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
      y[i] = s / H[i][i];
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += y[j] * V[j][i];
  }
  res.iterations = total;
  res.relative_residual = true_residual(A, b, x, r) / bn;
  res.converged = res.relative_residual <= tol;
  return res;
}

}  // namespace qfrac

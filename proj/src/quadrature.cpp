#include "qfrac/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace qfrac {

namespace {

// Golub-Welsch on the Jacobi matrix of the recurrence.
QuadRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigensolve failed");
  QuadRule r;
  const int n = static_cast<int>(diag.size());
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v0 = es.eigenvectors()(0, i);
    r.weights.push_back(mu0 * v0 * v0);
  }
  return r;
}

}  // namespace

QuadRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  QuadRule r = golub_welsch(diag, off, 2.0);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

QuadRule gauss_jacobi_left(int n, double alpha, double tau) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  if (!(alpha > 0.0)) throw std::invalid_argument("Gauss-Jacobi needs alpha > 0");
  // Weight (1-x)^a (1+x)^b on [-1, 1] with a = 0, b = alpha - 1.
  const double a = 0.0, b = alpha - 1.0, ab = a + b;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  diag(0) = (b - a) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    diag(k) = (b * b - a * a) / (s * (s + 2.0));
    const double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    off(k - 1) = std::sqrt(num / den);
  }
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(ab + 2.0);
  QuadRule r = golub_welsch(diag, off, mu0);
  // t = tau (1 + x) / 2 turns (1+x)^{alpha-1} dx into (2/tau)^alpha t^{alpha-1} dt.
  const double scale = std::pow(tau / 2.0, alpha);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = 0.5 * tau * (1.0 + r.nodes[i]);
    r.weights[i] *= scale;
  }
  return r;
}

}  // namespace qfrac

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qfrac {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct KrylovResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;  // true residual ||b - A x|| / ||b||
};

/// Conjugate gradients for symmetric positive definite A; x holds the initial guess.
KrylovResult conjugate_gradient(const LinearMap& A, std::span<const double> b, std::span<double> x, double tol,
                                int max_iter);

/// Restarted GMRES(restart) with modified Gram-Schmidt and Givens rotations.
KrylovResult gmres(const LinearMap& A, std::span<const double> b, std::span<double> x, double tol, int max_iter,
                   int restart = 50);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace qfrac

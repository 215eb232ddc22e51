#pragma once

#include <vector>

namespace qfrac {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point rule for the weight t^{alpha-1} on [0, tau] (Gauss-Jacobi); alpha > 0.
QuadRule gauss_jacobi_left(int n, double alpha, double tau = 1.0);

}  // namespace qfrac

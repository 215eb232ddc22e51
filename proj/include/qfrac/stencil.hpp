#pragma once

#include <vector>

namespace qfrac {

/// Centred finite-difference stencil on unit spacing: taps at offsets -radius..radius.
struct Stencil {
  int order = 0;
  int accuracy = 2;
  int radius = 0;
  std::vector<double> weights;  // size 2*radius+1

  double at(int offset) const { return weights[offset + radius]; }
};

/// Fornberg weights for derivative `order` at x0 over the given nodes.
std::vector<double> fornberg_weights(int order, double x0, const std::vector<double>& nodes);

/// Centred stencil for the order-th derivative with the given even accuracy (2 or 4).
Stencil centred_stencil(int order, int accuracy);

/// Forward-difference weights over offsets 0..order (first-order accurate).
Stencil forward_stencil(int order);

}  // namespace qfrac

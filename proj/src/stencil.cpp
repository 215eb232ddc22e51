#include "qfrac/stencil.hpp"

#include <stdexcept>

namespace qfrac {

std::vector<double> fornberg_weights(int order, double x0, const std::vector<double>& nodes) {
  const int n = static_cast<int>(nodes.size());
  if (order < 0 || n <= order) throw std::invalid_argument("fornberg: not enough nodes");
  // c[j][k]: weight of node j for derivative k.
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = c[j][order];
  return w;
}

Stencil centred_stencil(int order, int accuracy) {
  if (order < 0) throw std::invalid_argument("stencil order must be nonnegative");
  if (accuracy != 2 && accuracy != 4) throw std::invalid_argument("stencil accuracy must be 2 or 4");
  Stencil s;
  s.order = order;
  s.accuracy = accuracy;
  s.radius = order == 0 ? 0 : (order + 1) / 2 - 1 + accuracy / 2;
  std::vector<double> nodes;
  for (int k = -s.radius; k <= s.radius; ++k) nodes.push_back(k);
  s.weights = fornberg_weights(order, 0.0, nodes);
  return s;
}

Stencil forward_stencil(int order) {
  Stencil s;
  s.order = order;
  s.accuracy = 1;
  s.radius = order;
  std::vector<double> nodes;
  for (int k = 0; k <= order; ++k) nodes.push_back(k);
  const auto w = fornberg_weights(order, 0.0, nodes);
  s.weights.assign(order, 0.0);
  s.weights.insert(s.weights.end(), w.begin(), w.end());
  return s;
}

}  // namespace qfrac

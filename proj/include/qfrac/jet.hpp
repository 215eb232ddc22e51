#pragma once

#include <array>

namespace qfrac {

/// Truncated univariate Taylor series c[0] + c[1] e + ... + c[N] e^N.
/// Used to evaluate exact directional derivatives of coefficient closures.
struct Jet {
  static constexpr int N = 8;
  std::array<double, N + 1> c{};

  Jet() = default;
  Jet(double v) { c[0] = v; }  // NOLINT: implicit constant lift is intended
  static Jet variable(double x0) {
    Jet j(x0);
    j.c[1] = 1.0;
    return j;
  }
  double value() const { return c[0]; }
  /// t-th derivative at the expansion point.
  double derivative(int t) const;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);

}  // namespace qfrac

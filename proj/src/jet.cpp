#include "qfrac/jet.hpp"

#include <cmath>
#include <stdexcept>

namespace qfrac {

namespace {
constexpr int N = Jet::N;
}

double Jet::derivative(int t) const {
  if (t < 0 || t > N) throw std::out_of_range("jet order");
  double f = 1.0;
  for (int k = 2; k <= t; ++k) f *= k;
  return c[t] * f;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

Jet operator-(const Jet& a) {
  Jet r;
  for (int k = 0; k <= N; ++k) r.c[k] = -a.c[k];
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= N; ++k) {
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) acc += a.c[i] * b.c[k - i];
    r.c[k] = acc;
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.c[0] == 0.0) throw std::domain_error("jet division by zero");
  Jet r;
  for (int k = 0; k <= N; ++k) {
    double acc = a.c[k];
    for (int i = 1; i <= k; ++i) acc -= b.c[i] * r.c[k - i];
    r.c[k] = acc / b.c[0];
  }
  return r;
}

// Series recurrences from f' = g' f style identities.
Jet exp(const Jet& a) {
  Jet r;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += i * a.c[i] * r.c[k - i];
    r.c[k] = acc / k;
  }
  return r;
}

Jet log(const Jet& a) {
  if (a.c[0] <= 0.0) throw std::domain_error("jet log of nonpositive value");
  Jet r;
  r.c[0] = std::log(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double acc = k * a.c[k];
    for (int i = 1; i < k; ++i) acc -= i * r.c[i] * a.c[k - i];
    r.c[k] = acc / (k * a.c[0]);
  }
  return r;
}

Jet sqrt(const Jet& a) {
  if (a.c[0] <= 0.0) throw std::domain_error("jet sqrt of nonpositive value");
  Jet r;
  r.c[0] = std::sqrt(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double acc = a.c[k];
    for (int i = 1; i < k; ++i) acc -= r.c[i] * r.c[k - i];
    r.c[k] = acc / (2.0 * r.c[0]);
  }
  return r;
}

namespace {
void sincos(const Jet& a, Jet& s, Jet& c) {
  s = Jet();
  c = Jet();
  s.c[0] = std::sin(a.c[0]);
  c.c[0] = std::cos(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double as = 0.0, ac = 0.0;
    for (int i = 1; i <= k; ++i) {
      as += i * a.c[i] * c.c[k - i];
      ac -= i * a.c[i] * s.c[k - i];
    }
    s.c[k] = as / k;
    c.c[k] = ac / k;
  }
}
}  // namespace

Jet sin(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return s;
}

Jet cos(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return c;
}

}  // namespace qfrac

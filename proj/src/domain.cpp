#include "qfrac/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <random>
#include <stdexcept>

#include "qfrac/stencil.hpp"

namespace qfrac {

std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::box: return "box";
    case DomainKind::exterior_ball: return "exterior_ball";
    case DomainKind::half_space: return "half_space";
  }
  return "?";
}

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 unit_vec(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw std::invalid_argument("direction vector must be nonzero");
  return {v[0] / n, v[1] / n, v[2] / n};
}

bool strictly_in_box(const DomainSpec& d, const Vec3& x) {
  for (int a = 0; a < 3; ++a)
    if (!(x[a] > d.origin[a] && x[a] < d.origin[a] + d.lengths[a])) return false;
  return true;
}

}  // namespace

bool DomainSpec::contains(const Vec3& x) const {
  switch (kind) {
    case DomainKind::box: return true;
    case DomainKind::exterior_ball: return norm(sub(x, center)) > radius;
    case DomainKind::half_space: return dot(sub(x, center), normal) > 0.0;
  }
  return false;
}

void DomainSpec::validate() const {
  for (double L : lengths)
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("box lengths must be positive");
  if (kind == DomainKind::exterior_ball && !(radius > 0.0))
    throw std::invalid_argument("exterior_ball radius must be positive");
  if (kind == DomainKind::half_space) unit_vec(normal);
}

Grid::Grid(const DomainSpec& d, std::array<int, 3> n, bool periodic)
    : domain_(d), n_(n), periodic_(periodic) {
  d.validate();
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
    // Periodic grids identify the end points, so n nodes cover the period.
    h_[a] = periodic ? d.lengths[a] / n[a] : d.lengths[a] / (n[a] - 1);
  }
  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  mask_.assign(total, 0);
  interior_index_.assign(total, -1);
  for (std::size_t node = 0; node < total; ++node) {
    bool inside;
    if (periodic) {
      inside = true;
    } else {
      const Vec3 x = coords(node);
      inside = strictly_in_box(d, x) && d.contains(x);
    }
    if (inside) {
      mask_[node] = 1;
      interior_index_[node] = static_cast<std::int64_t>(interior_nodes_.size());
      interior_nodes_.push_back(node);
    }
  }
}

std::array<int, 3> Grid::ijk(std::size_t node) const {
  const int i = static_cast<int>(node % n_[0]);
  const std::size_t rest = node / n_[0];
  return {i, static_cast<int>(rest % n_[1]), static_cast<int>(rest / n_[1])};
}

Vec3 Grid::coords(std::size_t node) const {
  const auto id = ijk(node);
  Vec3 x;
  for (int a = 0; a < 3; ++a) x[a] = domain_.origin[a] + id[a] * h_[a];
  return x;
}

std::optional<std::size_t> Grid::neighbour(std::size_t node, int axis, int offset) const {
  auto id = ijk(node);
  int c = id[axis] + offset;
  if (periodic_) {
    c %= n_[axis];
    if (c < 0) c += n_[axis];
  } else if (c < 0 || c >= n_[axis]) {
    return std::nullopt;
  }
  id[axis] = c;
  return this->node(id[0], id[1], id[2]);
}

GridPtr build_grid(const DomainSpec& d, std::array<int, 3> n) {
  auto g = std::make_shared<const Grid>(d, n, false);
  if (g->interior_count() == 0) throw std::invalid_argument("degenerate grid: empty interior");
  return g;
}

GridPtr build_periodic_grid(const DomainSpec& d, std::array<int, 3> n) {
  if (d.kind != DomainKind::box) throw std::invalid_argument("periodic grids need a box domain");
  return std::make_shared<const Grid>(d, n, true);
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(GridPtr g) : grid_(std::move(g)) {
  if (!grid_) throw std::invalid_argument("null grid");
  values_.assign(grid_->node_count(), CQuaternion{});
}

GridFunction GridFunction::sample(GridPtr g, const std::function<CQuaternion(const Vec3&)>& f) {
  GridFunction u(std::move(g));
  const Grid& grid = *u.grid_;
  for (std::size_t id = 0; id < grid.interior_count(); ++id) {
    const std::size_t node = grid.interior_node(id);
    u.values_[node] = f(grid.coords(node));
  }
  return u;
}

GridFunction GridFunction::unpack(GridPtr g, std::span<const double> packed) {
  GridFunction u(std::move(g));
  const Grid& grid = *u.grid_;
  if (packed.size() != 8 * grid.interior_count()) throw std::invalid_argument("packed size mismatch");
  for (std::size_t id = 0; id < grid.interior_count(); ++id) {
    CQuaternion& v = u.values_[grid.interior_node(id)];
    for (int k = 0; k < 8; ++k) v[k] = packed[8 * id + k];
  }
  return u;
}

void GridFunction::set(std::size_t node, const CQuaternion& v) {
  if (node >= values_.size()) throw std::out_of_range("node index");
  if (!grid_->interior(node)) throw std::invalid_argument("cannot set an exterior node");
  values_[node] = v;
}

std::vector<double> GridFunction::pack() const {
  const Grid& grid = *grid_;
  std::vector<double> out(8 * grid.interior_count());
  for (std::size_t id = 0; id < grid.interior_count(); ++id) {
    const CQuaternion& v = values_[grid.interior_node(id)];
    for (int k = 0; k < 8; ++k) out[8 * id + k] = v[k];
  }
  return out;
}

GridFunction GridFunction::operator*(const Quaternion& q) const {
  GridFunction r(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = values_[i] * q;
  return r;
}

GridFunction GridFunction::left_mul(const Quaternion& q) const {
  GridFunction r(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = q * values_[i];
  return r;
}

void require_same_grid(const GridFunction& u, const GridFunction& v) {
  if (u.grid() != v.grid() && u.grid()->node_count() != v.grid()->node_count())
    throw std::invalid_argument("grid functions live on different grids");
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
  require_same_grid(*this, o);
  GridFunction r(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = values_[i] + o.values_[i];
  return r;
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
  require_same_grid(*this, o);
  GridFunction r(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = values_[i] - o.values_[i];
  return r;
}

GridFunction GridFunction::scaled(double s) const {
  GridFunction r(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = s * values_[i];
  return r;
}

double GridFunction::l2_norm() const {
  double acc = 0.0;
  for (const auto& v : values_) acc += norm2(v);
  return std::sqrt(acc * grid_->cell_volume());
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, abs(v));
  return m;
}

Quaternion l2_inner(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u, v);
  Quaternion acc{};
  const Grid& g = *u.grid();
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const std::size_t node = g.interior_node(id);
    acc = acc + inner(u.at(node), v.at(node));
  }
  return g.cell_volume() * acc;
}

std::vector<CQuaternion> interior_derivative(const GridFunction& u, int axis, int order, int accuracy) {
  const Grid& g = *u.grid();
  const Stencil st = centred_stencil(order, accuracy);
  const double scale = 1.0 / std::pow(g.h()[axis], order);
  std::vector<CQuaternion> out(g.interior_count());
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const std::size_t node = g.interior_node(id);
    CQuaternion acc{};
    for (int k = -st.radius; k <= st.radius; ++k) {
      const double w = st.at(k);
      if (w == 0.0) continue;
      const auto nb = g.neighbour(node, axis, k);
      if (!nb) continue;
      acc = acc + w * u.at(*nb);
    }
    out[id] = scale * acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coefficients

namespace {

std::array<Jet, 3> seed_axis(const Vec3& x, int d) {
  std::array<Jet, 3> xs{Jet(x[0]), Jet(x[1]), Jet(x[2])};
  xs[d] = Jet::variable(x[d]);
  return xs;
}

Jet jnorm(const std::array<Jet, 3>& y) { return sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]); }

}  // namespace

double Coefficient::value(const Vec3& x) const {
  return fn({Jet(x[0]), Jet(x[1]), Jet(x[2])}).value();
}

double Coefficient::derivative(const Vec3& x, int d, int t) const {
  return fn(seed_axis(x, d)).derivative(t);
}

Coefficient Coefficient::constant(double c) {
  return {fmt::format("constant({:.17g})", c), [c](const std::array<Jet, 3>&) { return Jet(c); }};
}

Coefficient Coefficient::hill(double K, double A, double lambda, Vec3 P, Vec3 Q, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("hill width must be positive");
  return {fmt::format("hill(K={:.17g}, A={:.17g}, lambda={:.17g})", K, A, lambda),
          [=](const std::array<Jet, 3>& x) {
            const std::array<Jet, 3> y{x[0] - P[0], x[1] - P[1], x[2] - P[2]};
            const std::array<Jet, 3> z{x[0] - Q[0], x[1] - Q[1], x[2] - Q[2]};
            const Jet r = jnorm(y);
            const Jet g = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) * Jet(-1.0 / (width * width));
            return Jet(K) + Jet(A) * exp(Jet(-lambda) * r + g);
          }};
}

Coefficient Coefficient::ridge(double K, double A, double lambda, Vec3 P, Vec3 v) {
  const Vec3 u = unit_vec(v);
  return {fmt::format("ridge(K={:.17g}, A={:.17g}, lambda={:.17g})", K, A, lambda),
          [=](const std::array<Jet, 3>& x) {
            const Jet d = (x[0] - P[0]) * u[0] + (x[1] - P[1]) * u[1] + (x[2] - P[2]) * u[2];
            return Jet(K) + Jet(A) * exp(Jet(-lambda) * d);
          }};
}

Coefficient Coefficient::wave(double K, double A, Vec3 k, double phase) {
  return {fmt::format("wave(K={:.17g}, A={:.17g})", K, A), [=](const std::array<Jet, 3>& x) {
            return Jet(K) + Jet(A) * sin(x[0] * k[0] + x[1] * k[1] + x[2] * k[2] + phase);
          }};
}

Coefficient Coefficient::square(int axis) {
  return {fmt::format("x{}^2", axis + 1), [axis](const std::array<Jet, 3>& x) { return x[axis] * x[axis]; }};
}

CoefficientField::CoefficientField(GridPtr g, int m, Provenance prov, std::array<Coefficient, 3> coeffs)
    : grid_(std::move(g)), m_(m), provenance_(prov), closures_(std::move(coeffs)) {
  if (m < 1 || m > Jet::N) throw std::invalid_argument("operator order out of range");
  const Grid& grid = *grid_;
  n_ = grid.interior_count();
  data_.assign(9 * static_cast<std::size_t>(m_ + 1) * n_, 0.0);
  // Finite differences: centred order-2 stencils on closure samples at the grid spacing.
  std::vector<Stencil> fd;
  if (prov == Provenance::finite_difference)
    for (int t = 0; t <= m_; ++t) fd.push_back(centred_stencil(t, 2));

  auto slot = [&](int l, int d, int t, std::size_t id) -> double& {
    return data_[((static_cast<std::size_t>(l) * 3 + d) * (m_ + 1) + t) * n_ + id];
  };
  for (std::size_t id = 0; id < n_; ++id) {
    const Vec3 x = grid.coords(grid.interior_node(id));
    for (int l = 0; l < 3; ++l) {
      for (int d = 0; d < 3; ++d) {
        if (prov == Provenance::analytic) {
          Jet j;
          try {
            j = closures_[l].fn(seed_axis(x, d));
          } catch (const std::domain_error& e) {
            throw std::invalid_argument(fmt::format("coefficient a{} is not differentiable at ({}, {}, {}): {}", l + 1,
                                                    x[0], x[1], x[2], e.what()));
          }
          for (int t = 0; t <= m_; ++t) slot(l, d, t, id) = j.derivative(t);
        } else {
          const double h = grid.h()[d];
          for (int t = 0; t <= m_; ++t) {
            const Stencil& st = fd[t];
            double acc = 0.0;
            for (int k = -st.radius; k <= st.radius; ++k) {
              Vec3 y = x;
              y[d] += k * h;
              acc += st.at(k) * closures_[l].value(y);
            }
            slot(l, d, t, id) = acc / std::pow(h, t);
          }
        }
        for (int t = 0; t <= m_; ++t)
          if (!std::isfinite(slot(l, d, t, id)))
            throw std::invalid_argument(fmt::format("non-finite coefficient sample a{} (d{} order {}) at ({}, {}, {})",
                                                 l + 1, d + 1, t, x[0], x[1], x[2]));
      }
    }
  }
  for (int l = 0; l < 3; ++l) {
    double inf2 = std::numeric_limits<double>::infinity(), sup2 = 0.0, supa = 0.0, sdiag = 0.0, sany = 0.0;
    for (std::size_t id = 0; id < n_; ++id) {
      const double a = slot(l, 0, 0, id);
      inf2 = std::min(inf2, a * a);
      sup2 = std::max(sup2, a * a);
      supa = std::max(supa, std::abs(a));
      for (int t = 1; t <= m_; ++t) {
        sdiag = std::max(sdiag, std::abs(slot(l, l, t, id)));
        for (int d = 0; d < 3; ++d) sany = std::max(sany, std::abs(slot(l, d, t, id)));
      }
    }
    inf_a2_[l] = inf2;
    sup_a2_[l] = sup2;
    sup_abs_a_[l] = supa;
    sup_diag_[l] = sdiag;
    sup_any_[l] = sany;
  }
}

CoefficientField CoefficientField::scaled(double c) const {
  std::array<Coefficient, 3> sc;
  for (int l = 0; l < 3; ++l) {
    auto f = closures_[l].fn;
    sc[l] = {fmt::format("{:.17g}*{}", c, closures_[l].description),
             [f, c](const std::array<Jet, 3>& x) { return Jet(c) * f(x); }};
  }
  return CoefficientField(grid_, m_, provenance_, sc);
}

CoefficientField sample_coefficients(const GridPtr& g, const std::array<Coefficient, 3>& a, int m,
                                     Provenance prov) {
  return CoefficientField(g, m, prov, a);
}

// ---------------------------------------------------------------------------
// Weights

Jet WeightFunction::eval(const std::array<Jet, 3>& x) const {
  if (family == WeightFamily::hill) {
    const std::array<Jet, 3> y{x[0] - P[0], x[1] - P[1], x[2] - P[2]};
    const Jet r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    return exp(Jet(-lambda) * sqrt(r2)) / r2;
  }
  const Vec3 u = unit_vec(v);
  const Jet d = (x[0] - P[0]) * u[0] + (x[1] - P[1]) * u[1] + (x[2] - P[2]) * u[2];
  return exp(Jet(-lambda) * d);
}

double WeightFunction::operator()(const Vec3& x) const {
  if (family == WeightFamily::hill) {
    const double r = norm(sub(x, P));
    return std::exp(-lambda * r) / (r * r);
  }
  return std::exp(-lambda * dot(sub(x, P), unit_vec(v)));
}

void WeightFunction::require_compatible(const DomainSpec& d) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("weight lambda must be positive");
  if (family == WeightFamily::hill && d.kind != DomainKind::exterior_ball)
    throw std::invalid_argument("hill weight requires an exterior_ball domain");
  if (family == WeightFamily::ridge && d.kind != DomainKind::half_space)
    throw std::invalid_argument("ridge weight requires a half_space domain");
}

PoincareResult weighted_poincare_check(const Grid& g, const WeightFunction& phi, double p,
                                       const GridFunction& u) {
  phi.require_compatible(g.domain());
  if (p != 1.0 && p != 2.0) throw std::invalid_argument("p must be 1 or 2");
  double lhs = 0.0, grad = 0.0;
  double hmax = 0.0;
  for (int a = 0; a < 3; ++a) hmax = std::max(hmax, g.h()[a]);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const CQuaternion& v = u.at(node);
    double g2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const auto nb = g.neighbour(node, a, 1);
      const CQuaternion next = nb ? u.at(*nb) : CQuaternion{};
      g2 += norm2(next - v) / (g.h()[a] * g.h()[a]);
    }
    const double uv = abs(v);
    if (uv == 0.0 && g2 == 0.0) continue;
    const double w = phi(g.coords(node));
    if (!std::isfinite(w)) throw std::runtime_error("weight is singular at a node where u is active");
    lhs += std::pow(uv, p) * w;
    grad += std::pow(std::sqrt(g2), p) * w;
  }
  PoincareResult r;
  r.lhs = lhs * g.cell_volume();
  r.rhs = std::pow(p / phi.lambda, p) * grad * g.cell_volume();
  r.margin = r.rhs - r.lhs;
  // 1e-9 relative slack plus an O(h) allowance for the one-sided difference.
  const double allowance = 1e-9 + phi.lambda * hmax;
  r.pass = r.lhs <= r.rhs * (1.0 + allowance);
  return r;
}

RadialConditionResult check_decay_condition(const Grid& g, const WeightFunction& phi) {
  phi.require_compatible(g.domain());
  RadialConditionResult res;
  res.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Vec3 x = g.coords(g.interior_node(id));
    double gval, gder;
    if (phi.family == WeightFamily::hill) {
      const Vec3 y = sub(x, phi.P);
      const double r = norm(y);
      const Vec3 w{y[0] / r, y[1] / r, y[2] / r};
      const Jet rr = Jet::variable(r);
      const std::array<Jet, 3> pt{Jet(phi.P[0]) + rr * w[0], Jet(phi.P[1]) + rr * w[1], Jet(phi.P[2]) + rr * w[2]};
      const Jet f = rr * rr * phi.eval(pt);
      gval = f.value();
      gder = f.derivative(1);
    } else {
      const Vec3 u = unit_vec(g.domain().normal);
      const Jet s = Jet::variable(0.0);
      const std::array<Jet, 3> pt{Jet(x[0]) + s * u[0], Jet(x[1]) + s * u[1], Jet(x[2]) + s * u[2]};
      const Jet f = phi.eval(pt);
      gval = f.value();
      gder = f.derivative(1);
    }
    const double excess = (gder + phi.lambda * gval) / (phi.lambda * gval);
    res.worst_excess = std::max(res.worst_excess, excess);
    ++res.samples;
  }
  res.pass = res.worst_excess <= 1e-12;
  return res;
}

// ---------------------------------------------------------------------------
// Test-function suite

namespace {

double bump_profile(double r) {
  if (r >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

// Distance from c to the complement of the open domain intersected with the box.
double clearance(const DomainSpec& d, const Vec3& c) {
  double dist = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    dist = std::min(dist, c[a] - d.origin[a]);
    dist = std::min(dist, d.origin[a] + d.lengths[a] - c[a]);
  }
  if (d.kind == DomainKind::exterior_ball) dist = std::min(dist, norm(sub(c, d.center)) - d.radius);
  if (d.kind == DomainKind::half_space) dist = std::min(dist, dot(sub(c, d.center), unit_vec(d.normal)));
  return dist;
}

}  // namespace

std::vector<GridFunction> random_bump_suite(const GridPtr& g, std::size_t count, std::uint64_t seed) {
  const DomainSpec& d = g->domain();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double hmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    hmax = std::max(hmax, g->h()[a]);
    lmin = std::min(lmin, d.lengths[a]);
  }
  const double rho_lo = std::min(3.0 * hmax, 0.2 * lmin);
  const double rho_hi = 0.45 * lmin;
  std::vector<GridFunction> suite;
  suite.reserve(count);
  while (suite.size() < count) {
    Vec3 c;
    double room = -1.0;
    for (int attempt = 0; attempt < 10000 && room <= rho_lo + hmax; ++attempt) {
      for (int a = 0; a < 3; ++a) c[a] = d.origin[a] + d.lengths[a] * unif(rng);
      room = clearance(d, c);
    }
    if (room <= rho_lo + hmax) throw std::invalid_argument("domain too thin for the bump suite at this resolution; refine the grid");
    const double rho = rho_lo + (std::min(rho_hi, room - hmax) - rho_lo) * unif(rng);
    std::array<double, 8> amp, phase;
    Vec3 k;
    for (int i = 0; i < 8; ++i) {
      amp[i] = 2.0 * unif(rng) - 1.0;
      phase[i] = 6.283185307179586 * unif(rng);
    }
    for (int a = 0; a < 3; ++a) k[a] = (2.0 * unif(rng) - 1.0) * 3.0 / rho;
    suite.push_back(GridFunction::sample(g, [&](const Vec3& x) {
      const Vec3 y = sub(x, c);
      const double b = bump_profile(norm(y) / rho);
      CQuaternion v{};
      if (b == 0.0) return v;
      const double kx = dot(k, y);
      for (int i = 0; i < 8; ++i) v[i] = b * amp[i] * (1.0 + 0.5 * std::sin(kx + phase[i]));
      return v;
    }));
  }
  return suite;
}

}  // namespace qfrac

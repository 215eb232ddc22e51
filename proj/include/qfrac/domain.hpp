#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfrac/jet.hpp"
#include "qfrac/qalgebra.hpp"

namespace qfrac {

using Vec3 = std::array<double, 3>;

enum class DomainKind { box, exterior_ball, half_space };

std::string to_string(DomainKind k);

/// Box [origin, origin + lengths]; for the unbounded kinds this box is the truncation.
struct DomainSpec {
  DomainKind kind = DomainKind::box;
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 lengths{1.0, 1.0, 1.0};
  Vec3 center{0.0, 0.0, 0.0};  // P
  double radius = 0.0;          // exterior_ball
  Vec3 normal{1.0, 0.0, 0.0};   // half_space

  bool bounded() const { return kind == DomainKind::box; }
  /// Membership of x in the untruncated domain (open set).
  bool contains(const Vec3& x) const;
  void validate() const;
};

class Grid {
 public:
  Grid(const DomainSpec& d, std::array<int, 3> n, bool periodic = false);

  const DomainSpec& domain() const { return domain_; }
  const std::array<int, 3>& n() const { return n_; }
  const Vec3& h() const { return h_; }
  double cell_volume() const { return h_[0] * h_[1] * h_[2]; }
  bool periodic() const { return periodic_; }

  std::size_t node_count() const { return mask_.size(); }
  std::size_t interior_count() const { return interior_nodes_.size(); }
  std::size_t node(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * n_[1] + j) * n_[0] + i;
  }
  std::array<int, 3> ijk(std::size_t node) const;
  Vec3 coords(std::size_t node) const;
  bool interior(std::size_t node) const { return mask_[node] != 0; }
  /// Interior index of a node, or -1.
  std::int64_t interior_index(std::size_t node) const { return interior_index_[node]; }
  std::size_t interior_node(std::size_t id) const { return interior_nodes_[id]; }
  /// Node reached from `node` by `offset` steps along `axis`; nullopt if outside the grid.
  std::optional<std::size_t> neighbour(std::size_t node, int axis, int offset) const;

 private:
  DomainSpec domain_;
  std::array<int, 3> n_;
  Vec3 h_;
  bool periodic_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::int64_t> interior_index_;
  std::vector<std::size_t> interior_nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Throws "degenerate grid" on empty interior.
GridPtr build_grid(const DomainSpec& d, std::array<int, 3> n);
/// Fully periodic grid on the box: every node interior, stencils wrap around.
GridPtr build_periodic_grid(const DomainSpec& d, std::array<int, 3> n);

/// One CQuaternion per node; exterior nodes are zero at all times.
class GridFunction {
 public:
  explicit GridFunction(GridPtr g);
  static GridFunction sample(GridPtr g, const std::function<CQuaternion(const Vec3&)>& f);
  static GridFunction unpack(GridPtr g, std::span<const double> packed);

  const GridPtr& grid() const { return grid_; }
  const CQuaternion& at(std::size_t node) const { return values_[node]; }
  /// Throws when the node is exterior.
  void set(std::size_t node, const CQuaternion& v);
  const std::vector<CQuaternion>& values() const { return values_; }

  /// Interior values as 8 reals per interior node, in interior-index order.
  std::vector<double> pack() const;

  GridFunction operator*(const Quaternion& q) const;
  GridFunction left_mul(const Quaternion& q) const;
  GridFunction operator+(const GridFunction& o) const;
  GridFunction operator-(const GridFunction& o) const;
  GridFunction scaled(double r) const;

  /// Discrete L2 norm with node weight h1 h2 h3.
  double l2_norm() const;
  double max_abs() const;

 private:
  GridPtr grid_;
  std::vector<CQuaternion> values_;
};

/// Discrete L2 inner product <u, v> = sum <u(x), v(x)> h1 h2 h3.
Quaternion l2_inner(const GridFunction& u, const GridFunction& v);
void require_same_grid(const GridFunction& u, const GridFunction& v);

/// Centred discrete derivative of `order` along `axis` at interior nodes, zero extension.
std::vector<CQuaternion> interior_derivative(const GridFunction& u, int axis, int order, int accuracy);

/// Real coefficient closure, evaluated on Taylor jets so derivatives are exact.
struct Coefficient {
  std::string description;
  std::function<Jet(const std::array<Jet, 3>&)> fn;

  double value(const Vec3& x) const;
  /// t-th derivative along axis d at x.
  double derivative(const Vec3& x, int d, int t) const;

  static Coefficient constant(double c);
  /// K + A e^{-lambda |x-P|} e^{-|x-Q|^2/width^2}.
  static Coefficient hill(double K, double A, double lambda, Vec3 P, Vec3 Q, double width);
  /// K + A e^{-lambda <x-P, v/|v|>}.
  static Coefficient ridge(double K, double A, double lambda, Vec3 P, Vec3 v);
  /// K + A sin(k . x + phase).
  static Coefficient wave(double K, double A, Vec3 k, double phase);
  /// x_axis^2, used as a test target.
  static Coefficient square(int axis);
};

enum class Provenance { analytic, finite_difference };

/// Nodal a_l and one-directional derivatives d_{x_d}^t a_l, t = 0..m, at interior nodes.
class CoefficientField {
 public:
  CoefficientField() = default;
  CoefficientField(GridPtr g, int m, Provenance prov, std::array<Coefficient, 3> coeffs);

  const GridPtr& grid() const { return grid_; }
  int order() const { return m_; }
  Provenance provenance() const { return provenance_; }
  const std::array<Coefficient, 3>& closures() const { return closures_; }

  /// d_{x_d}^t a_l at interior index id (t = 0 gives the value).
  double deriv(int l, int d, int t, std::size_t id) const {
    return data_[((static_cast<std::size_t>(l) * 3 + d) * (m_ + 1) + t) * n_ + id];
  }
  double value(int l, std::size_t id) const { return deriv(l, 0, 0, id); }

  double inf_a2(int l) const { return inf_a2_[l]; }
  double sup_a2(int l) const { return sup_a2_[l]; }
  double sup_abs_a(int l) const { return sup_abs_a_[l]; }
  /// sup_x |d_{x_l}^t a_l|, t = 1..m, maximised over t.
  double sup_diag_deriv(int l) const { return sup_diag_[l]; }
  /// sup_x |d_{x_d}^t a_l| over t = 1..m and d.
  double sup_any_deriv(int l) const { return sup_any_[l]; }

  /// Scaled copy c * a_l (closures scaled too).
  CoefficientField scaled(double c) const;

 private:
  GridPtr grid_;
  int m_ = 0;
  std::size_t n_ = 0;
  Provenance provenance_ = Provenance::analytic;
  std::array<Coefficient, 3> closures_;
  std::vector<double> data_;
  std::array<double, 3> inf_a2_{}, sup_a2_{}, sup_abs_a_{}, sup_diag_{}, sup_any_{};
};

CoefficientField sample_coefficients(const GridPtr& g, const std::array<Coefficient, 3>& a, int m,
                                     Provenance prov = Provenance::analytic);

enum class WeightFamily { hill, ridge };

struct WeightFunction {
  WeightFamily family = WeightFamily::hill;
  double lambda = 1.0;
  Vec3 P{0.0, 0.0, 0.0};
  Vec3 v{1.0, 0.0, 0.0};

  double operator()(const Vec3& x) const;
  Jet eval(const std::array<Jet, 3>& x) const;
  /// Throws when the family does not match the domain kind.
  void require_compatible(const DomainSpec& d) const;
};

struct PoincareResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  double margin = 0.0;  // rhs - lhs
};

/// Forward-difference weighted Poincare inequality, p in {1, 2}.
PoincareResult weighted_poincare_check(const Grid& g, const WeightFunction& phi, double p,
                                       const GridFunction& u);

struct RadialConditionResult {
  std::size_t samples = 0;
  double worst_excess = 0.0;  // max of (g' + lambda g) / (lambda g), should be <= 0
  bool pass = true;
};

/// Hill: d/dr[r^2 phi] <= -lambda r^2 phi along rays from P through interior nodes.
/// Ridge: derivative of phi along the inward half-space normal <= -lambda phi.
RadialConditionResult check_decay_condition(const Grid& g, const WeightFunction& phi);

/// Random smooth compactly supported bumps inside the interior, reproducible from seed.
std::vector<GridFunction> random_bump_suite(const GridPtr& g, std::size_t count, std::uint64_t seed);

}  // namespace qfrac

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qfrac/domain.hpp"
#include "qfrac/qalgebra.hpp"

namespace qfrac {

/// Square block-CSR matrix with 8x8 real blocks.
class BlockCsr {
 public:
  BlockCsr() = default;
  explicit BlockCsr(std::size_t rows) : rows_(rows), row_ptr_(rows + 1, 0) {}

  static BlockCsr identity(std::size_t rows, double scale = 1.0);
  /// Builds from per-row (column, block) lists; duplicate columns are summed.
  static BlockCsr from_rows(std::vector<std::vector<std::pair<std::uint32_t, Block8>>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t nnz_blocks() const { return cols_.size(); }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& cols() const { return cols_; }
  const std::vector<Block8>& blocks() const { return blocks_; }

  /// y = A x on packed 8-vectors.
  void multiply(std::span<const double> x, std::span<double> y) const;
  BlockCsr transpose() const;
  /// alpha A + beta B.
  static BlockCsr combine(double alpha, const BlockCsr& a, double beta, const BlockCsr& b);
  static BlockCsr product(const BlockCsr& a, const BlockCsr& b);
  Eigen::MatrixXd dense() const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<Block8> blocks_;
};

enum class OperatorLabel { T, Qs, other };

class QOperator {
 public:
  QOperator(GridPtr g, int order, OperatorLabel label, BlockCsr mat, std::optional<Quaternion> shift = {})
      : grid_(std::move(g)), order_(order), label_(label), shift_(shift), mat_(std::move(mat)) {}

  static QOperator identity(GridPtr g, double scale = 1.0);
  /// lambda * Identity labelled as T (scalar surrogate).
  static QOperator scalar_surrogate(GridPtr g, double lambda);

  const GridPtr& grid() const { return grid_; }
  int order() const { return order_; }
  OperatorLabel label() const { return label_; }
  const std::optional<Quaternion>& shift() const { return shift_; }
  const BlockCsr& matrix() const { return mat_; }
  std::size_t size() const { return 8 * mat_.rows(); }

  void apply(std::span<const double> x, std::span<double> y) const { mat_.multiply(x, y); }
  std::vector<double> apply(std::span<const double> x) const;
  QOperator transpose() const;

  /// Coordinate text export: one line per block, "row col v00 ... v77".
  void export_coo(std::ostream& os) const;

 private:
  GridPtr grid_;
  int order_;
  OperatorLabel label_;
  std::optional<Quaternion> shift_;
  BlockCsr mat_;
};

/// T = i^{m-1} sum_l a_l e_l D^m_{x_l} with centred differences and zero extension.
QOperator assemble_T(const GridPtr& g, const CoefficientField& c, int m, int stencil_order = 2);

/// Q_s = T^2 - 2 Re(s) T + |s|^2 I by sparse product.
QOperator assemble_Qs(const QOperator& T, const Quaternion& s);

/// Block-sparse product applied to a grid function.
GridFunction apply(const QOperator& op, const GridFunction& u);

/// Pointwise right multiplication on a packed vector.
void right_multiply(std::span<double> x, const Quaternion& q);
std::vector<double> right_multiplied(std::span<const double> x, const Quaternion& q);

/// The constant i^{m-1} e_l as an element of C (x) H.
CQuaternion parity_unit(int m, int l);

}  // namespace qfrac

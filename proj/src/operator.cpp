#include "qfrac/operator.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>
#include <stdexcept>

#include "qfrac/stencil.hpp"

namespace qfrac {

BlockCsr BlockCsr::identity(std::size_t rows, double scale) {
  BlockCsr a(rows);
  a.cols_.resize(rows);
  a.blocks_.assign(rows, block_identity(scale));
  for (std::size_t r = 0; r < rows; ++r) {
    a.row_ptr_[r + 1] = r + 1;
    a.cols_[r] = static_cast<std::uint32_t>(r);
  }
  return a;
}

BlockCsr BlockCsr::from_rows(std::vector<std::vector<std::pair<std::uint32_t, Block8>>> rows) {
  BlockCsr a(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& row = rows[r];
    std::stable_sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!a.cols_.empty() && a.row_ptr_[r] < a.cols_.size() && a.cols_.back() == row[k].first) {
        block_axpy(1.0, row[k].second, a.blocks_.back());
      } else {
        a.cols_.push_back(row[k].first);
        a.blocks_.push_back(row[k].second);
      }
    }
    a.row_ptr_[r + 1] = a.cols_.size();
  }
  return a;
}

void BlockCsr::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != 8 * rows_ || y.size() != 8 * rows_) throw std::invalid_argument("operator shape mismatch");
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double* b = blocks_[k].data();
      const double* xv = x.data() + 8 * static_cast<std::size_t>(cols_[k]);
      for (int i = 0; i < 8; ++i) {
        double s = 0.0;
        for (int j = 0; j < 8; ++j) s += b[8 * i + j] * xv[j];
        acc[i] += s;
      }
    }
    std::copy(acc, acc + 8, y.data() + 8 * r);
  }
}

BlockCsr BlockCsr::transpose() const {
  std::vector<std::vector<std::pair<std::uint32_t, Block8>>> rows(rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      rows[cols_[k]].emplace_back(static_cast<std::uint32_t>(r), block_transpose(blocks_[k]));
  return from_rows(std::move(rows));
}

BlockCsr BlockCsr::combine(double alpha, const BlockCsr& a, double beta, const BlockCsr& b) {
  if (a.rows_ != b.rows_) throw std::invalid_argument("operator shape mismatch");
  std::vector<std::vector<std::pair<std::uint32_t, Block8>>> rows(a.rows_);
  for (std::size_t r = 0; r < a.rows_; ++r) {
    for (std::size_t k = a.row_ptr_[r]; k < a.row_ptr_[r + 1]; ++k) {
      Block8 blk{};
      block_axpy(alpha, a.blocks_[k], blk);
      rows[r].emplace_back(a.cols_[k], blk);
    }
    for (std::size_t k = b.row_ptr_[r]; k < b.row_ptr_[r + 1]; ++k) {
      Block8 blk{};
      block_axpy(beta, b.blocks_[k], blk);
      rows[r].emplace_back(b.cols_[k], blk);
    }
  }
  return from_rows(std::move(rows));
}

BlockCsr BlockCsr::product(const BlockCsr& a, const BlockCsr& b) {
  if (a.rows_ != b.rows_) throw std::invalid_argument("operator shape mismatch");
  BlockCsr c(a.rows_);
  std::vector<std::int64_t> where(a.rows_, -1);
  std::vector<std::uint32_t> touched;
  for (std::size_t r = 0; r < a.rows_; ++r) {
    touched.clear();
    const std::size_t start = c.cols_.size();
    for (std::size_t ka = a.row_ptr_[r]; ka < a.row_ptr_[r + 1]; ++ka) {
      const std::uint32_t mid = a.cols_[ka];
      for (std::size_t kb = b.row_ptr_[mid]; kb < b.row_ptr_[mid + 1]; ++kb) {
        const std::uint32_t col = b.cols_[kb];
        if (where[col] < 0) {
          where[col] = static_cast<std::int64_t>(c.cols_.size());
          c.cols_.push_back(col);
          c.blocks_.push_back(Block8{});
          touched.push_back(col);
        }
        const Block8 p = block_mul(a.blocks_[ka], b.blocks_[kb]);
        block_axpy(1.0, p, c.blocks_[static_cast<std::size_t>(where[col])]);
      }
    }
    // Keep columns sorted within the row.
    std::vector<std::size_t> order(c.cols_.size() - start);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = start + i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return c.cols_[x] < c.cols_[y]; });
    std::vector<std::uint32_t> cs;
    std::vector<Block8> bs;
    for (std::size_t i : order) {
      cs.push_back(c.cols_[i]);
      bs.push_back(c.blocks_[i]);
    }
    std::copy(cs.begin(), cs.end(), c.cols_.begin() + static_cast<std::ptrdiff_t>(start));
    std::copy(bs.begin(), bs.end(), c.blocks_.begin() + static_cast<std::ptrdiff_t>(start));
    for (std::uint32_t col : touched) where[col] = -1;
    c.row_ptr_[r + 1] = c.cols_.size();
  }
  return c;
}

Eigen::MatrixXd BlockCsr::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(8 * rows_, 8 * rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          m(static_cast<Eigen::Index>(8 * r + i), static_cast<Eigen::Index>(8 * cols_[k] + j)) += blocks_[k][8 * i + j];
  return m;
}

// ---------------------------------------------------------------------------

QOperator QOperator::identity(GridPtr g, double scale) {
  const std::size_t n = g->interior_count();
  return QOperator(std::move(g), 0, OperatorLabel::other, BlockCsr::identity(n, scale));
}

QOperator QOperator::scalar_surrogate(GridPtr g, double lambda) {
  const std::size_t n = g->interior_count();
  return QOperator(std::move(g), 1, OperatorLabel::T, BlockCsr::identity(n, lambda));
}

std::vector<double> QOperator::apply(std::span<const double> x) const {
  std::vector<double> y(x.size());
  mat_.multiply(x, y);
  return y;
}

QOperator QOperator::transpose() const {
  return QOperator(grid_, order_, OperatorLabel::other, mat_.transpose());
}

void QOperator::export_coo(std::ostream& os) const {
  const auto& rp = mat_.row_ptr();
  for (std::size_t r = 0; r < mat_.rows(); ++r)
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
      os << r << ' ' << mat_.cols()[k];
      for (double v : mat_.blocks()[k]) os << ' ' << fmt::format("{:.17g}", v);
      os << '\n';
    }
}

CQuaternion parity_unit(int m, int l) {
  const Quaternion e = Quaternion::unit(l);
  switch (((m - 1) % 4 + 4) % 4) {
    case 0: return CQuaternion::from(e);
    case 1: return CQuaternion::i_times(e);
    case 2: return CQuaternion::from(-e);
    default: return CQuaternion::i_times(-e);
  }
}

QOperator assemble_T(const GridPtr& g, const CoefficientField& c, int m, int stencil_order) {
  if (c.grid() != g) throw std::invalid_argument("coefficient field sampled on a different grid");
  if (c.order() < m) throw std::invalid_argument("coefficient field lacks derivatives of the operator order");
  const Grid& grid = *g;
  const Stencil st = centred_stencil(m, stencil_order);
  for (int a = 0; a < 3; ++a)
    if (grid.n()[a] < 2 * st.radius + 1)
      throw std::invalid_argument(fmt::format("grid too small for stencil: axis {} has {} nodes, need {}", a + 1,
                                              grid.n()[a], 2 * st.radius + 1));
  std::array<Block8, 3> unit_blocks;
  for (int l = 0; l < 3; ++l) unit_blocks[l] = left_block(parity_unit(m, l));

  std::vector<std::vector<std::pair<std::uint32_t, Block8>>> rows(grid.interior_count());
  for (std::size_t id = 0; id < grid.interior_count(); ++id) {
    const std::size_t node = grid.interior_node(id);
    for (int l = 0; l < 3; ++l) {
      const double coef = c.value(l, id) / std::pow(grid.h()[l], m);
      for (int k = -st.radius; k <= st.radius; ++k) {
        const double w = st.at(k);
        if (w == 0.0) continue;
        const auto nb = grid.neighbour(node, l, k);
        if (!nb || !grid.interior(*nb)) continue;  // zero extension
        Block8 b{};
        block_axpy(coef * w, unit_blocks[l], b);
        rows[id].emplace_back(static_cast<std::uint32_t>(grid.interior_index(*nb)), b);
      }
    }
  }
  return QOperator(g, m, OperatorLabel::T, BlockCsr::from_rows(std::move(rows)));
}

QOperator assemble_Qs(const QOperator& T, const Quaternion& s) {
  if (T.label() != OperatorLabel::T) throw std::invalid_argument("assemble_Qs needs an operator labelled T");
  const BlockCsr& t = T.matrix();
  BlockCsr q = BlockCsr::product(t, t);
  if (s.s0 != 0.0) q = BlockCsr::combine(1.0, q, -2.0 * s.s0, t);
  q = BlockCsr::combine(1.0, q, 1.0, BlockCsr::identity(t.rows(), norm2(s)));
  return QOperator(T.grid(), 2 * T.order(), OperatorLabel::Qs, std::move(q), s);
}

GridFunction apply(const QOperator& op, const GridFunction& u) {
  if (u.grid()->interior_count() != op.matrix().rows()) throw std::invalid_argument("shape mismatch");
  const auto x = u.pack();
  const auto y = op.apply(x);
  return GridFunction::unpack(op.grid(), y);
}

void right_multiply(std::span<double> x, const Quaternion& q) {
  for (std::size_t i = 0; i + 8 <= x.size(); i += 8) {
    CQuaternion v;
    for (int k = 0; k < 8; ++k) v[k] = x[i + k];
    v = v * q;
    for (int k = 0; k < 8; ++k) x[i + k] = v[k];
  }
}

std::vector<double> right_multiplied(std::span<const double> x, const Quaternion& q) {
  std::vector<double> y(x.begin(), x.end());
  right_multiply(y, q);
  return y;
}

}  // namespace qfrac

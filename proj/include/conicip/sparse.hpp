#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace conicip {

using Vector = Eigen::VectorXd;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix with strictly increasing column indices in
/// every row and no duplicate entries.
struct CsrMatrix {
  int nrows = 0;
  int ncols = 0;
  std::vector<int> rowptr{0};
  std::vector<int> colidx;
  std::vector<double> values;

  CsrMatrix() = default;
  CsrMatrix(int rows, int cols);

  /// Duplicates are summed. Explicit zeros are kept (they are structural).
  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);
  static CsrMatrix from_dense(const Eigen::MatrixXd& dense, double drop_tol = 0.0);
  static CsrMatrix identity(int n, double scale = 1.0);
  static CsrMatrix zeros(int rows, int cols) { return CsrMatrix(rows, cols); }

  [[nodiscard]] std::int64_t nnz() const { return static_cast<std::int64_t>(colidx.size()); }

  /// y = alpha * A x + beta * y
  void gemv(double alpha, const Vector& x, double beta, Vector& y) const;
  /// y = alpha * A^T x + beta * y
  void gemv_transpose(double alpha, const Vector& x, double beta, Vector& y) const;

  [[nodiscard]] Vector operator*(const Vector& x) const;
  [[nodiscard]] Vector transpose_times(const Vector& x) const;

  [[nodiscard]] CsrMatrix transpose() const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  [[nodiscard]] bool same_pattern(const CsrMatrix& other) const;
  /// Value lookup; returns 0 for structurally absent entries.
  [[nodiscard]] double coeff(int row, int col) const;
  /// Throws std::invalid_argument naming the first broken structural invariant.
  void check_structure() const;
  /// Structurally and numerically symmetric (exact comparison).
  [[nodiscard]] bool is_symmetric() const;
  [[nodiscard]] double quad_form(const Vector& x) const { return x.dot(*this * x); }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

/// Max-abs of each row / column (0 for empty).
Vector row_inf_norms(const CsrMatrix& m);
Vector col_inf_norms(const CsrMatrix& m);

}  // namespace conicip

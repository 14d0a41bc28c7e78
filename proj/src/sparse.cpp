#include "conicip/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace conicip {

CsrMatrix::CsrMatrix(int rows, int cols) : nrows(rows), ncols(cols), rowptr(rows + 1, 0) {}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::invalid_argument("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m(rows, cols);
  m.colidx.reserve(entries.size());
  m.values.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& t = entries[k];
    if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
      m.values.back() += t.value;
      continue;
    }
    m.colidx.push_back(t.col);
    m.values.push_back(t.value);
    m.rowptr[t.row + 1]++;
  }
  for (int i = 0; i < rows; ++i) m.rowptr[i + 1] += m.rowptr[i];
  return m;
}

CsrMatrix CsrMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_tol) {
  std::vector<Triplet> t;
  for (int i = 0; i < dense.rows(); ++i)
    for (int j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_tol) t.push_back({i, j, dense(i, j)});
  return from_triplets(static_cast<int>(dense.rows()), static_cast<int>(dense.cols()), std::move(t));
}

CsrMatrix CsrMatrix::identity(int n, double scale) {
  CsrMatrix m(n, n);
  m.colidx.resize(n);
  m.values.assign(n, scale);
  for (int i = 0; i < n; ++i) {
    m.colidx[i] = i;
    m.rowptr[i + 1] = i + 1;
  }
  return m;
}

void CsrMatrix::gemv(double alpha, const Vector& x, double beta, Vector& y) const {
  for (int i = 0; i < nrows; ++i) {
    double acc = 0.0;
    for (int p = rowptr[i]; p < rowptr[i + 1]; ++p) acc += values[p] * x[colidx[p]];
    y[i] = (beta == 0.0 ? 0.0 : beta * y[i]) + alpha * acc;
  }
}

void CsrMatrix::gemv_transpose(double alpha, const Vector& x, double beta, Vector& y) const {
  if (beta == 0.0)
    y.setZero();
  else if (beta != 1.0)
    y *= beta;
  for (int i = 0; i < nrows; ++i) {
    const double xi = alpha * x[i];
    for (int p = rowptr[i]; p < rowptr[i + 1]; ++p) y[colidx[p]] += values[p] * xi;
  }
}

Vector CsrMatrix::operator*(const Vector& x) const {
  Vector y(nrows);
  gemv(1.0, x, 0.0, y);
  return y;
}

Vector CsrMatrix::transpose_times(const Vector& x) const {
  Vector y = Vector::Zero(ncols);
  gemv_transpose(1.0, x, 0.0, y);
  return y;
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t(ncols, nrows);
  t.colidx.resize(colidx.size());
  t.values.resize(values.size());
  for (int c : colidx) t.rowptr[c + 1]++;
  for (int i = 0; i < ncols; ++i) t.rowptr[i + 1] += t.rowptr[i];
  std::vector<int> next(t.rowptr.begin(), t.rowptr.end() - 1);
  for (int i = 0; i < nrows; ++i) {
    for (int p = rowptr[i]; p < rowptr[i + 1]; ++p) {
      const int dst = next[colidx[p]]++;
      t.colidx[dst] = i;
      t.values[dst] = values[p];
    }
  }
  return t;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nrows, ncols);
  for (int i = 0; i < nrows; ++i)
    for (int p = rowptr[i]; p < rowptr[i + 1]; ++p) d(i, colidx[p]) += values[p];
  return d;
}

bool CsrMatrix::same_pattern(const CsrMatrix& other) const {
  return nrows == other.nrows && ncols == other.ncols && rowptr == other.rowptr && colidx == other.colidx;
}

double CsrMatrix::coeff(int row, int col) const {
  const auto first = colidx.begin() + rowptr[row];
  const auto last = colidx.begin() + rowptr[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values[static_cast<std::size_t>(it - colidx.begin())];
}

void CsrMatrix::check_structure() const {
  if (nrows < 0 || ncols < 0) throw std::invalid_argument("negative matrix dimension");
  if (static_cast<int>(rowptr.size()) != nrows + 1) throw std::invalid_argument("rowptr length is not nrows+1");
  if (rowptr.front() != 0) throw std::invalid_argument("rowptr[0] must be 0");
  if (rowptr.back() != static_cast<int>(colidx.size())) throw std::invalid_argument("rowptr[nrows] must equal nnz");
  if (colidx.size() != values.size()) throw std::invalid_argument("colidx and values differ in length");
  for (int i = 0; i < nrows; ++i) {
    if (rowptr[i + 1] < rowptr[i]) throw std::invalid_argument("rowptr decreases at row " + std::to_string(i));
    for (int p = rowptr[i]; p < rowptr[i + 1]; ++p) {
      if (colidx[p] < 0 || colidx[p] >= ncols)
        throw std::invalid_argument("column index out of range in row " + std::to_string(i));
      if (p > rowptr[i] && colidx[p] <= colidx[p - 1])
        throw std::invalid_argument("column indices not strictly increasing in row " + std::to_string(i));
    }
  }
}

bool CsrMatrix::is_symmetric() const {
  if (nrows != ncols) return false;
  const CsrMatrix t = transpose();
  return t.rowptr == rowptr && t.colidx == colidx && t.values == values;
}

Vector row_inf_norms(const CsrMatrix& m) {
  Vector r = Vector::Zero(m.nrows);
  for (int i = 0; i < m.nrows; ++i)
    for (int p = m.rowptr[i]; p < m.rowptr[i + 1]; ++p) r[i] = std::max(r[i], std::abs(m.values[p]));
  return r;
}

Vector col_inf_norms(const CsrMatrix& m) {
  Vector c = Vector::Zero(m.ncols);
  for (int i = 0; i < m.nrows; ++i)
    for (int p = m.rowptr[i]; p < m.rowptr[i + 1]; ++p)
      c[m.colidx[p]] = std::max(c[m.colidx[p]], std::abs(m.values[p]));
  return c;
}

}  // namespace conicip

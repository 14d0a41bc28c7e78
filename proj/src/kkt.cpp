#include "conicip/kkt.hpp"

#include "conicip/errors.hpp"

namespace conicip {

KktSystem::KktSystem(const CsrMatrix& P, const CsrMatrix& A, const ConeSet& cones, const KktSettings& settings)
    : n_(A.ncols), m_(A.nrows), p_pattern_(P), a_pattern_(A), settings_(settings) {
  if (P.nrows != n_ || P.ncols != n_) throw std::invalid_argument("P and A disagree on the number of variables");
  if (cones.dim() != m_) throw std::invalid_argument("cone dimension differs from the rows of A");
  if (settings_.static_reg < 0.0) settings_.static_reg = default_static_reg(settings_.precision);
  if (settings_.dynamic_reg < 0.0) settings_.dynamic_reg = default_dynamic_reg(settings_.precision);

  const int dim = n_ + m_;
  k_ = CsrMatrix(dim, dim);
  p_map_.assign(P.values.size(), -1);
  a_map_.assign(A.values.size(), -1);

  // Aᵀ by rows, remembering the source index of each entry.
  std::vector<int> at_ptr(n_ + 1, 0);
  for (int c : A.colidx) ++at_ptr[c + 1];
  for (int j = 0; j < n_; ++j) at_ptr[j + 1] += at_ptr[j];
  std::vector<int> at_src(A.colidx.size());
  std::vector<int> at_row(A.colidx.size());
  {
    std::vector<int> next(at_ptr.begin(), at_ptr.end() - 1);
    for (int i = 0; i < m_; ++i)
      for (int p = A.rowptr[i]; p < A.rowptr[i + 1]; ++p) {
        const int q = next[A.colidx[p]]++;
        at_src[q] = p;
        at_row[q] = i;
      }
  }

  auto push = [&](int col, double value) {
    k_.colidx.push_back(col);
    k_.values.push_back(value);
    return static_cast<int>(k_.colidx.size()) - 1;
  };

  for (int j = 0; j < n_; ++j) {
    bool has_diag = false;
    for (int p = P.rowptr[j]; p < P.rowptr[j + 1]; ++p) has_diag |= P.colidx[p] == j;
    if (!has_diag) push(j, 0.0);
    for (int p = P.rowptr[j]; p < P.rowptr[j + 1]; ++p)
      if (P.colidx[p] >= j) p_map_[p] = push(P.colidx[p], P.values[p]);
    for (int q = at_ptr[j]; q < at_ptr[j + 1]; ++q) a_map_[at_src[q]] = push(n_ + at_row[q], A.values[at_src[q]]);
    k_.rowptr[j + 1] = static_cast<int>(k_.colidx.size());
  }

  // H rows: diagonal for Zero and Nonneg, dense upper triangles for the rest.
  // Rows are visited in order, so slots appear in the fill_H_values layout.
  std::vector<int> block_end(m_, -1);
  for (int r = 0; r < cones.zero.dim + cones.nonneg.dim; ++r) block_end[r] = r + 1;
  for (const auto& b : cones.dense_blocks())
    for (int r = b.offset; r < b.offset + b.dim; ++r) block_end[r] = b.offset + b.dim;
  for (int r = 0; r < m_; ++r) {
    if (block_end[r] < 0) throw std::logic_error("cone layout leaves a row uncovered");
    for (int c = r; c < block_end[r]; ++c) {
      const bool diag = c == r;
      const bool zero_row = r < cones.zero.dim;
      h_map_.push_back(push(n_ + c, diag && !zero_row ? -1.0 : 0.0));
    }
    k_.rowptr[n_ + r + 1] = static_cast<int>(k_.colidx.size());
  }

  std::vector<int> signs(dim, 1);
  for (int r = 0; r < m_; ++r) signs[n_ + r] = -1;
  ldl_ = QuasiDefiniteLdl(k_, std::move(signs), settings_.precision, settings_.static_reg, settings_.dynamic_reg);
}

void KktSystem::symbolic_factor() { ldl_.analyze(); }

void KktSystem::update_values(const CsrMatrix* P, const CsrMatrix* A, std::span<const double> h_values) {
  if (P) {
    if (!P->same_pattern(p_pattern_)) throw PatternMismatch("P sparsity pattern differs from the factorized one");
    for (std::size_t p = 0; p < p_map_.size(); ++p)
      if (p_map_[p] >= 0) k_.values[p_map_[p]] = P->values[p];
  }
  if (A) {
    if (!A->same_pattern(a_pattern_)) throw PatternMismatch("A sparsity pattern differs from the factorized one");
    for (std::size_t p = 0; p < a_map_.size(); ++p) k_.values[a_map_[p]] = A->values[p];
  }
  if (!h_values.empty()) {
    if (h_values.size() != h_map_.size()) throw PatternMismatch("H value count differs from the cone layout");
    for (std::size_t t = 0; t < h_map_.size(); ++t) k_.values[h_map_[t]] = -h_values[t];
  }
  stale_ = true;
}

void KktSystem::numeric_factor() {
  ldl_.factor(k_.values);
  stale_ = false;
}

RefineResult KktSystem::solve(const Vector& rhs, Vector& x) const {
  if (stale_) throw FactorizationFailure("KKT factors are stale; call numeric_factor first");
  return ldl_.solve_refined(k_.values, rhs, x, settings_.refinement);
}

}  // namespace conicip

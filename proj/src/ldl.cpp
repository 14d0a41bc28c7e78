#include "conicip/ldl.hpp"

#include "conicip/errors.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace conicip {

const char* to_string(Precision p) { return p == Precision::Full ? "full" : "mixed"; }

double default_static_reg(Precision p) {
  return p == Precision::Full ? 1e-8 : std::sqrt(double(std::numeric_limits<float>::epsilon()));
}

double default_dynamic_reg(Precision p) {
  const double eps = p == Precision::Full ? std::numeric_limits<double>::epsilon()
                                          : double(std::numeric_limits<float>::epsilon());
  return eps * eps;
}

QuasiDefiniteLdl::QuasiDefiniteLdl(CsrMatrix upper_pattern, std::vector<int> signs, Precision precision,
                                   double static_reg, double dynamic_reg)
    : n_(upper_pattern.nrows),
      pattern_(std::move(upper_pattern)),
      signs_(std::move(signs)),
      precision_(precision),
      static_reg_(static_reg),
      dynamic_reg_(dynamic_reg) {
  if (pattern_.nrows != pattern_.ncols) throw std::invalid_argument("KKT matrix must be square");
  if (static_cast<int>(signs_.size()) != n_) throw std::invalid_argument("sign vector length differs from matrix size");
  for (int i = 0; i < n_; ++i)
    for (int p = pattern_.rowptr[i]; p < pattern_.rowptr[i + 1]; ++p)
      if (pattern_.colidx[p] < i) throw std::invalid_argument("KKT pattern must be upper triangular");
}

void QuasiDefiniteLdl::analyze() {
  if (analyzed_) return;
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> s(n_, n_);
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(pattern_.colidx.size());
  for (int i = 0; i < n_; ++i)
    for (int p = pattern_.rowptr[i]; p < pattern_.rowptr[i + 1]; ++p) trip.emplace_back(i, pattern_.colidx[p], 1.0);
  s.setFromTriplets(trip.begin(), trip.end());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> amd;
  Eigen::AMDOrdering<int> ordering;
  ordering(s, amd);
  std::vector<int> perm(n_);
  for (int i = 0; i < n_; ++i) perm[i] = amd.indices()[i];
  analyze_with(std::move(perm));
}

void QuasiDefiniteLdl::analyze_with(std::vector<int> perm) {
  if (analyzed_) return;
  if (static_cast<int>(perm.size()) != n_) throw std::invalid_argument("permutation length differs from matrix size");
  perm_ = std::move(perm);
  pinv_.assign(n_, -1);
  for (int k = 0; k < n_; ++k) {
    if (perm_[k] < 0 || perm_[k] >= n_ || pinv_[perm_[k]] != -1) throw std::invalid_argument("invalid permutation");
    pinv_[perm_[k]] = k;
  }

  // Permuted upper triangle, column-wise.
  cp_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i)
    for (int p = pattern_.rowptr[i]; p < pattern_.rowptr[i + 1]; ++p)
      ++cp_[std::max(pinv_[i], pinv_[pattern_.colidx[p]]) + 1];
  std::partial_sum(cp_.begin(), cp_.end(), cp_.begin());
  ci_.assign(cp_.back(), 0);
  slot_.assign(cp_.back(), 0);
  std::vector<int> next(cp_.begin(), cp_.end() - 1);
  for (int i = 0; i < n_; ++i) {
    for (int p = pattern_.rowptr[i]; p < pattern_.rowptr[i + 1]; ++p) {
      const int a = pinv_[i];
      const int b = pinv_[pattern_.colidx[p]];
      const int q = next[std::max(a, b)]++;
      ci_[q] = std::min(a, b);
      slot_[q] = p;
    }
  }

  // Elimination tree and column counts of L.
  parent_.assign(n_, -1);
  std::vector<int> flag(n_, -1);
  std::vector<int> lnz(n_, 0);
  for (int k = 0; k < n_; ++k) {
    flag[k] = k;
    for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
      for (int i = ci_[p]; i < k && flag[i] != k; i = parent_[i]) {
        if (parent_[i] == -1) parent_[i] = k;
        ++lnz[i];
        flag[i] = k;
      }
    }
  }
  lp_.assign(n_ + 1, 0);
  for (int k = 0; k < n_; ++k) lp_[k + 1] = lp_[k] + lnz[k];
  li_.assign(lp_.back(), 0);

  analyzed_ = true;
  factored_ = false;
  ++analyze_count_;
}

template <class T>
void QuasiDefiniteLdl::factor_impl(Factors<T>& f, std::span<const double> values) {
  f.lx.assign(lp_.back(), T(0));
  f.d.assign(n_, T(0));
  f.work_values.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) f.work_values[i] = static_cast<T>(values[i]);

  std::vector<T> y(n_, T(0));
  std::vector<int> pattern(n_);
  std::vector<int> flag(n_, -1);
  std::vector<int> lnz(n_, 0);
  double max_d = 0.0;
  regularized_pivots_ = 0;
  std::int64_t work = 0;

  for (int k = 0; k < n_; ++k) {
    int top = n_;
    flag[k] = k;
    y[k] = T(0);
    for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
      int i = ci_[p];
      y[i] += f.work_values[slot_[p]];
      int len = 0;
      for (; flag[i] != k; i = parent_[i]) {
        pattern[len++] = i;
        flag[i] = k;
      }
      while (len > 0) pattern[--top] = pattern[--len];
    }
    const int sign = signs_[perm_[k]];
    T dk = y[k] + static_cast<T>(sign * static_reg_);
    y[k] = T(0);
    for (; top < n_; ++top) {
      const int i = pattern[top];
      const T yi = y[i];
      y[i] = T(0);
      const int end = lp_[i] + lnz[i];
      for (int p = lp_[i]; p < end; ++p) y[li_[p]] -= f.lx[p] * yi;
      work += end - lp_[i] + 1;
      const T lki = yi / f.d[i];
      dk -= lki * yi;
      li_[end] = k;
      f.lx[end] = lki;
      ++lnz[i];
    }
    const double delta = static_reg_ + dynamic_reg_ * max_d;
    if (static_cast<double>(sign) * static_cast<double>(dk) < delta) {
      dk = static_cast<T>(sign * delta);
      ++regularized_pivots_;
    }
    if (dk == T(0) || !std::isfinite(static_cast<double>(dk)))
      throw FactorizationFailure("zero or non-finite pivot at position " + std::to_string(k));
    f.d[k] = dk;
    max_d = std::max(max_d, std::abs(static_cast<double>(dk)));
  }
  flops_ += work;
}

void QuasiDefiniteLdl::factor(std::span<const double> values) {
  if (!analyzed_) analyze();
  if (values.size() != pattern_.values.size()) throw std::invalid_argument("value array length differs from pattern");
  factored_ = false;
  if (precision_ == Precision::Full)
    factor_impl(full_, values);
  else
    factor_impl(reduced_, values);
  factored_ = true;
}

template <class T>
void QuasiDefiniteLdl::solve_impl(const Factors<T>& f, Vector& x) const {
  std::vector<T> w(n_);
  for (int k = 0; k < n_; ++k) w[k] = static_cast<T>(x[perm_[k]]);
  for (int j = 0; j < n_; ++j)
    for (int p = lp_[j]; p < lp_[j + 1]; ++p) w[li_[p]] -= f.lx[p] * w[j];
  for (int j = 0; j < n_; ++j) w[j] /= f.d[j];
  for (int j = n_ - 1; j >= 0; --j)
    for (int p = lp_[j]; p < lp_[j + 1]; ++p) w[j] -= f.lx[p] * w[li_[p]];
  for (int k = 0; k < n_; ++k) x[perm_[k]] = static_cast<double>(w[k]);
  flops_ += 2 * static_cast<std::int64_t>(lp_.back()) + n_;
}

void QuasiDefiniteLdl::solve_in_place(Vector& x) const {
  if (!factored_) throw FactorizationFailure("solve requested before numeric factorization");
  if (precision_ == Precision::Full)
    solve_impl(full_, x);
  else
    solve_impl(reduced_, x);
}

Vector QuasiDefiniteLdl::symmetric_multiply(const CsrMatrix& upper, std::span<const double> values, const Vector& x) {
  Vector y = Vector::Zero(upper.nrows);
  for (int i = 0; i < upper.nrows; ++i) {
    for (int p = upper.rowptr[i]; p < upper.rowptr[i + 1]; ++p) {
      const int j = upper.colidx[p];
      y[i] += values[p] * x[j];
      if (j != i) y[j] += values[p] * x[i];
    }
  }
  return y;
}

RefineResult QuasiDefiniteLdl::solve_refined(std::span<const double> values, const Vector& b, Vector& x,
                                             const RefinementSettings& settings) const {
  RefineResult out;
  const double tol = settings.t_abs + settings.t_rel * (b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0);
  x = b;
  solve_in_place(x);
  out.steps = 1;
  Vector r = b - symmetric_multiply(pattern_, values, x);
  flops_ += static_cast<std::int64_t>(2 * values.size());
  double norm = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
  Vector best = x;
  double best_norm = norm;
  int rises = 0;
  while (norm > tol && out.steps < settings.max_steps) {
    Vector dx = r;
    solve_in_place(dx);
    ++out.steps;
    x += dx;
    r = b - symmetric_multiply(pattern_, values, x);
    flops_ += static_cast<std::int64_t>(2 * values.size());
    const double next = r.lpNorm<Eigen::Infinity>();
    rises = next > norm ? rises + 1 : 0;
    norm = next;
    if (norm < best_norm || !std::isfinite(best_norm)) {
      best = x;
      best_norm = norm;
    }
    if (rises >= 2) {
      out.stalled = true;
      break;
    }
  }
  x = std::move(best);
  out.residual = best_norm;
  out.converged = best_norm <= tol;
  return out;
}

Vector QuasiDefiniteLdl::diagonal() const {
  Vector d(n_);
  for (int k = 0; k < n_; ++k)
    d[k] = precision_ == Precision::Full ? full_.d.at(k) : static_cast<double>(reduced_.d.at(k));
  return d;
}

CsrMatrix QuasiDefiniteLdl::lower() const {
  std::vector<Triplet> t;
  t.reserve(li_.size());
  for (int j = 0; j < n_; ++j)
    for (int p = lp_[j]; p < lp_[j + 1]; ++p)
      t.push_back({li_[p], j, precision_ == Precision::Full ? full_.lx[p] : static_cast<double>(reduced_.lx[p])});
  return CsrMatrix::from_triplets(n_, n_, std::move(t));
}

}  // namespace conicip

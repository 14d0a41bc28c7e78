#pragma once

// Up-looking sparse LDLᵀ for symmetric quasi-definite matrices with a
// fill-reducing permutation, sign-aware static and dynamic regularization
// and iterative refinement against the unregularized matrix.

#include "conicip/sparse.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace conicip {

enum class Precision { Full, Mixed };

const char* to_string(Precision p);

struct RefinementSettings {
  double t_abs = 1e-12;
  double t_rel = 1e-12;
  int max_steps = 10;
};

struct RefineResult {
  int steps = 0;              // solves through the factors, including the first
  double residual = 0.0;      // ‖b − Kx‖∞ of the returned iterate
  bool converged = false;
  bool stalled = false;       // residual rose on two consecutive steps
};

/// Default regularization for a precision mode.
double default_static_reg(Precision p);
double default_dynamic_reg(Precision p);

class QuasiDefiniteLdl {
 public:
  QuasiDefiniteLdl() = default;
  /// `upper` holds the upper triangle of K in CSR; `signs[i]` is +1 for rows
  /// whose pivot must be positive and -1 for rows whose pivot must be negative.
  QuasiDefiniteLdl(CsrMatrix upper_pattern, std::vector<int> signs, Precision precision, double static_reg,
                   double dynamic_reg);

  /// AMD ordering, elimination tree and column counts. Runs once; later calls are no-ops.
  void analyze();
  /// Same as analyze() but with a caller-supplied permutation (perm[new] = old).
  void analyze_with(std::vector<int> perm);
  /// Numeric factorization of K + regularization, values aligned with the pattern's value array.
  void factor(std::span<const double> values);
  /// x ← (LDLᵀ)⁻¹ x through the stored (possibly reduced precision) factors.
  void solve_in_place(Vector& x) const;
  /// Iterative refinement; residuals use `values` (the unregularized K) in double.
  RefineResult solve_refined(std::span<const double> values, const Vector& b, Vector& x,
                             const RefinementSettings& settings) const;

  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] bool analyzed() const { return analyzed_; }
  [[nodiscard]] bool factored() const { return factored_; }
  [[nodiscard]] int analyze_count() const { return analyze_count_; }
  [[nodiscard]] Precision precision() const { return precision_; }
  [[nodiscard]] double static_reg() const { return static_reg_; }
  [[nodiscard]] double dynamic_reg() const { return dynamic_reg_; }
  /// perm[new] = old.
  [[nodiscard]] const std::vector<int>& permutation() const { return perm_; }
  [[nodiscard]] std::int64_t nnz_L() const { return lp_.empty() ? 0 : lp_.back(); }
  /// Pivots in permuted order, widened to double.
  [[nodiscard]] Vector diagonal() const;
  /// Strictly lower part of L in permuted order, widened to double.
  [[nodiscard]] CsrMatrix lower() const;
  /// Number of pivots replaced by the dynamic rule in the last factorization.
  [[nodiscard]] int regularized_pivots() const { return regularized_pivots_; }
  /// Multiply-add count of all factorizations and solves so far.
  [[nodiscard]] std::int64_t flops() const { return flops_; }

  /// y = K x for the symmetric matrix whose upper triangle is (pattern, values).
  static Vector symmetric_multiply(const CsrMatrix& upper_pattern, std::span<const double> values, const Vector& x);

 private:
  template <class T>
  struct Factors {
    std::vector<T> lx;
    std::vector<T> d;
    std::vector<T> work_values;
  };

  template <class T>
  void factor_impl(Factors<T>& f, std::span<const double> values);
  template <class T>
  void solve_impl(const Factors<T>& f, Vector& x) const;

  int n_ = 0;
  CsrMatrix pattern_;
  std::vector<int> signs_;
  Precision precision_ = Precision::Full;
  double static_reg_ = 0.0;
  double dynamic_reg_ = 0.0;

  std::vector<int> perm_;
  std::vector<int> pinv_;
  // Permuted upper triangle by column: entries (i, k) with i ≤ k.
  std::vector<int> cp_;
  std::vector<int> ci_;
  std::vector<int> slot_;  // value index in the original pattern for every permuted entry
  std::vector<int> parent_;
  std::vector<int> lp_;
  std::vector<int> li_;

  Factors<double> full_;
  Factors<float> reduced_;

  bool analyzed_ = false;
  bool factored_ = false;
  int analyze_count_ = 0;
  int regularized_pivots_ = 0;
  mutable std::int64_t flops_ = 0;
};

}  // namespace conicip

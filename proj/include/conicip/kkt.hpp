#pragma once

// Quasi-definite KKT matrix
//
//   K = [ P   Aᵀ ]
//       [ A  -H  ]
//
// stored as its upper triangle with fixed slots for every entry of P, A and
// every possible entry of H, so value updates never change the pattern.

#include "conicip/cones.hpp"
#include "conicip/ldl.hpp"
#include "conicip/sparse.hpp"

#include <span>
#include <vector>

namespace conicip {

struct KktSettings {
  Precision precision = Precision::Full;
  /// Negative values select the precision-dependent defaults.
  double static_reg = -1.0;
  double dynamic_reg = -1.0;
  RefinementSettings refinement;
};

class KktSystem {
 public:
  KktSystem() = default;
  KktSystem(const CsrMatrix& P, const CsrMatrix& A, const ConeSet& cones, const KktSettings& settings = {});

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int m() const { return m_; }
  /// Upper triangle of K (values current as of the last update).
  [[nodiscard]] const CsrMatrix& matrix() const { return k_; }
  /// Slot in matrix().values of every P entry with col ≥ row (in P's CSR order, -1 below the diagonal).
  [[nodiscard]] const std::vector<int>& p_map() const { return p_map_; }
  [[nodiscard]] const std::vector<int>& a_map() const { return a_map_; }
  /// Slot of every H value in the fill_H_values layout.
  [[nodiscard]] const std::vector<int>& h_map() const { return h_map_; }

  void symbolic_factor();
  /// Scatter new values. P and A may be null; their patterns must match the originals.
  void update_values(const CsrMatrix* P, const CsrMatrix* A, std::span<const double> h_values);
  void numeric_factor();
  /// Solves K·x = rhs with iterative refinement against the unregularized K.
  RefineResult solve(const Vector& rhs, Vector& x) const;

  [[nodiscard]] bool factors_current() const { return !stale_ && ldl_.factored(); }
  [[nodiscard]] int symbolic_count() const { return ldl_.analyze_count(); }
  [[nodiscard]] const QuasiDefiniteLdl& factorization() const { return ldl_; }
  [[nodiscard]] const KktSettings& settings() const { return settings_; }

 private:
  int n_ = 0;
  int m_ = 0;
  CsrMatrix k_;
  CsrMatrix p_pattern_;
  CsrMatrix a_pattern_;
  std::vector<int> p_map_;
  std::vector<int> a_map_;
  std::vector<int> h_map_;
  KktSettings settings_;
  QuasiDefiniteLdl ldl_;
  bool stale_ = true;
};

}  // namespace conicip

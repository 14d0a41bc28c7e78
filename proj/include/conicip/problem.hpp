#pragma once

#include "conicip/errors.hpp"
#include "conicip/sparse.hpp"

#include <string_view>
#include <utility>
#include <vector>

namespace conicip {

enum class ConeKind { Zero, Nonneg, SecondOrder, Exponential, Power, PsdTriangle };

std::string_view to_string(ConeKind kind);

inline constexpr int kMaxPsdSide = 32;

/// One atomic cone. `dim` is the number of rows it occupies in A; for the PSD
/// cone that is side*(side+1)/2 (lower triangle, column-major, off-diagonals
/// scaled by sqrt(2)).
struct ConeSpec {
  ConeKind kind = ConeKind::Zero;
  int dim = 0;
  double alpha = 0.0;  // power cone exponent only

  static ConeSpec zero(int dim) { return {ConeKind::Zero, dim, 0.0}; }
  static ConeSpec nonneg(int dim) { return {ConeKind::Nonneg, dim, 0.0}; }
  static ConeSpec soc(int dim) { return {ConeKind::SecondOrder, dim, 0.0}; }
  static ConeSpec exp() { return {ConeKind::Exponential, 3, 0.0}; }
  static ConeSpec pow(double alpha) { return {ConeKind::Power, 3, alpha}; }
  static ConeSpec psd(int side) { return {ConeKind::PsdTriangle, side * (side + 1) / 2, 0.0}; }

  /// Side length of a PSD cone; -1 when `dim` is not a triangular number.
  [[nodiscard]] int psd_side() const;

  friend bool operator==(const ConeSpec&, const ConeSpec&) = default;
};

/// minimize ½xᵀPx + qᵀx  subject to  Ax + s = b,  s ∈ K.
/// P is stored with both triangles.
struct ProblemData {
  CsrMatrix P;
  CsrMatrix A;
  Vector q;
  Vector b;
  std::vector<ConeSpec> cones;

  [[nodiscard]] int n() const { return A.ncols; }
  [[nodiscard]] int m() const { return A.nrows; }

  friend bool operator==(const ProblemData& a, const ProblemData& b) {
    return a.P == b.P && a.A == b.A && a.q == b.q && a.b == b.b && a.cones == b.cones;
  }
};

/// Throws ValidationError naming the first violated invariant.
void validate(const ProblemData& problem);

struct ReorderResult {
  ProblemData problem;
  /// row_perm[new_row] = original row.
  std::vector<int> row_perm;
};

/// Merge all Zero cones into one leading cone, all Nonneg cones into one
/// cone after it, then SOC, Exp, Pow, PSD blocks in original relative order.
ReorderResult reorder_cones(const ProblemData& problem);

/// Scaled problem:  P' = c·Dc·P·Dc,  A' = Dr·A·Dc,  q' = c·Dc·q,  b' = Dr·b.
struct Equilibration {
  Vector d_row;
  Vector d_col;
  double c_obj = 1.0;

  static Equilibration identity(int n, int m);
};

inline constexpr double kEquilibrationMin = 1e-4;
inline constexpr double kEquilibrationMax = 1e4;

/// Ruiz equilibration of [P Aᵀ; A 0]. Rows of every SOC/Exp/Pow/PSD block
/// share one row scale so that scaled slacks stay in the same cone.
std::pair<ProblemData, Equilibration> equilibrate(const ProblemData& problem, int iters = 10);

/// Maps a solution of the scaled problem back to the original one:
/// x = Dc·x',  s = s'/Dr,  z = Dr·z'/c.
void unscale_solution(Vector& x, Vector& z, Vector& s, const Equilibration& e);

/// Inverse of unscale_solution.
void scale_solution(Vector& x, Vector& z, Vector& s, const Equilibration& e);

}  // namespace conicip

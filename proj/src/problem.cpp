#include "conicip/problem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace conicip {

const char* to_string(ValidationKind kind) {
  switch (kind) {
    case ValidationKind::DimensionMismatch: return "DimensionMismatch";
    case ValidationKind::NonSymmetricP: return "NonSymmetricP";
    case ValidationKind::BadConeSpec: return "BadConeSpec";
    case ValidationKind::NonFiniteData: return "NonFiniteData";
    case ValidationKind::BadStructure: return "BadStructure";
  }
  return "Unknown";
}

std::string_view to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::Zero: return "zero";
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::Exponential: return "exp";
    case ConeKind::Power: return "pow";
    case ConeKind::PsdTriangle: return "psd";
  }
  return "unknown";
}

int ConeSpec::psd_side() const {
  const int side = static_cast<int>(std::lround((std::sqrt(8.0 * dim + 1.0) - 1.0) / 2.0));
  return side * (side + 1) / 2 == dim ? side : -1;
}

namespace {

void check_cone(const ConeSpec& c, std::size_t index) {
  const std::string where = "cone " + std::to_string(index) + " (" + std::string(to_string(c.kind)) + ")";
  auto bad = [&](const std::string& msg) { throw ValidationError(ValidationKind::BadConeSpec, where + ": " + msg); };
  switch (c.kind) {
    case ConeKind::Zero:
    case ConeKind::Nonneg:
      if (c.dim < 1) bad("dimension must be positive");
      break;
    case ConeKind::SecondOrder:
      if (c.dim < 2) bad("dimension must be at least 2");
      break;
    case ConeKind::Exponential:
      if (c.dim != 3) bad("dimension must be 3");
      break;
    case ConeKind::Power:
      if (c.dim != 3) bad("dimension must be 3");
      if (!(c.alpha > 0.0 && c.alpha < 1.0)) bad("exponent must lie strictly inside (0,1)");
      break;
    case ConeKind::PsdTriangle: {
      const int side = c.psd_side();
      if (c.dim < 1 || side < 1) bad("dimension is not a triangular number");
      if (side > kMaxPsdSide) bad("side " + std::to_string(side) + " exceeds " + std::to_string(kMaxPsdSide));
      break;
    }
  }
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

int family_rank(ConeKind k) {
  switch (k) {
    case ConeKind::Zero: return 0;
    case ConeKind::Nonneg: return 1;
    case ConeKind::SecondOrder: return 2;
    case ConeKind::Exponential: return 3;
    case ConeKind::Power: return 4;
    case ConeKind::PsdTriangle: return 5;
  }
  return 6;
}

CsrMatrix permute_rows(const CsrMatrix& a, const std::vector<int>& perm) {
  CsrMatrix out(a.nrows, a.ncols);
  out.colidx.reserve(a.colidx.size());
  out.values.reserve(a.values.size());
  for (int i = 0; i < a.nrows; ++i) {
    const int src = perm[i];
    for (int p = a.rowptr[src]; p < a.rowptr[src + 1]; ++p) {
      out.colidx.push_back(a.colidx[p]);
      out.values.push_back(a.values[p]);
    }
    out.rowptr[i + 1] = static_cast<int>(out.colidx.size());
  }
  return out;
}

// M' = diag(left) * M * diag(right) * scale, same pattern.
CsrMatrix scale_matrix(const CsrMatrix& m, const Vector& left, const Vector& right, double scale) {
  CsrMatrix out = m;
  for (int i = 0; i < m.nrows; ++i)
    for (int p = m.rowptr[i]; p < m.rowptr[i + 1]; ++p)
      out.values[p] = scale * left[i] * m.values[p] * right[m.colidx[p]];
  return out;
}

double scale_from_norm(double norm) {
  if (norm == 0.0) return 1.0;
  return 1.0 / std::sqrt(std::clamp(norm, kEquilibrationMin, kEquilibrationMax));
}

}  // namespace

void validate(const ProblemData& p) {
  try {
    p.P.check_structure();
    p.A.check_structure();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(ValidationKind::BadStructure, e.what());
  }
  const int n = p.A.ncols;
  const int m = p.A.nrows;
  if (p.P.nrows != n || p.P.ncols != n)
    throw ValidationError(ValidationKind::DimensionMismatch,
                          "P is " + std::to_string(p.P.nrows) + "x" + std::to_string(p.P.ncols) +
                              " but A has " + std::to_string(n) + " columns");
  if (p.q.size() != n) throw ValidationError(ValidationKind::DimensionMismatch, "q length differs from n");
  if (p.b.size() != m) throw ValidationError(ValidationKind::DimensionMismatch, "b length differs from m");
  if (m < 1) throw ValidationError(ValidationKind::DimensionMismatch, "problem needs at least one constraint row");
  long total = 0;
  for (std::size_t i = 0; i < p.cones.size(); ++i) {
    check_cone(p.cones[i], i);
    total += p.cones[i].dim;
  }
  if (total != m)
    throw ValidationError(ValidationKind::DimensionMismatch,
                          "cone dimensions sum to " + std::to_string(total) + " but A has " + std::to_string(m) +
                              " rows");
  if (!all_finite(p.P.values)) throw ValidationError(ValidationKind::NonFiniteData, "P has non-finite entries");
  if (!all_finite(p.A.values)) throw ValidationError(ValidationKind::NonFiniteData, "A has non-finite entries");
  if (!p.q.allFinite()) throw ValidationError(ValidationKind::NonFiniteData, "q has non-finite entries");
  if (!p.b.allFinite()) throw ValidationError(ValidationKind::NonFiniteData, "b has non-finite entries");
  if (!p.P.is_symmetric()) throw ValidationError(ValidationKind::NonSymmetricP, "P must be stored full and symmetric");
}

ReorderResult reorder_cones(const ProblemData& problem) {
  std::vector<int> offsets(problem.cones.size() + 1, 0);
  for (std::size_t i = 0; i < problem.cones.size(); ++i) offsets[i + 1] = offsets[i] + problem.cones[i].dim;

  ReorderResult out;
  out.row_perm.reserve(problem.m());
  std::array<int, 2> merged_dims{0, 0};
  for (int rank = 0; rank < 6; ++rank) {
    for (std::size_t i = 0; i < problem.cones.size(); ++i) {
      const auto& c = problem.cones[i];
      if (family_rank(c.kind) != rank) continue;
      for (int r = offsets[i]; r < offsets[i + 1]; ++r) out.row_perm.push_back(r);
      if (rank < 2)
        merged_dims[rank] += c.dim;
      else
        out.problem.cones.push_back(c);
    }
    if (rank < 2 && merged_dims[rank] > 0) {
      out.problem.cones.push_back(rank == 0 ? ConeSpec::zero(merged_dims[0]) : ConeSpec::nonneg(merged_dims[1]));
    }
  }

  out.problem.P = problem.P;
  out.problem.q = problem.q;
  out.problem.A = permute_rows(problem.A, out.row_perm);
  out.problem.b.resize(problem.m());
  for (int i = 0; i < problem.m(); ++i) out.problem.b[i] = problem.b[out.row_perm[i]];
  return out;
}

Equilibration Equilibration::identity(int n, int m) {
  return {Vector::Ones(m), Vector::Ones(n), 1.0};
}

std::pair<ProblemData, Equilibration> equilibrate(const ProblemData& problem, int iters) {
  const int n = problem.n();
  const int m = problem.m();
  Equilibration e = Equilibration::identity(n, m);

  // Row ranges whose scale must be a single scalar.
  std::vector<std::pair<int, int>> uniform_blocks;
  int offset = 0;
  for (const auto& c : problem.cones) {
    if (c.kind != ConeKind::Zero && c.kind != ConeKind::Nonneg && c.dim > 1) uniform_blocks.emplace_back(offset, c.dim);
    offset += c.dim;
  }

  for (int it = 0; it < iters; ++it) {
    const CsrMatrix Ps = scale_matrix(problem.P, e.d_col, e.d_col, 1.0);
    const CsrMatrix As = scale_matrix(problem.A, e.d_row, e.d_col, 1.0);
    const Vector pcol = col_inf_norms(Ps);
    const Vector acol = col_inf_norms(As);
    const Vector arow = row_inf_norms(As);

    Vector dcol(n), drow(m);
    for (int j = 0; j < n; ++j) dcol[j] = scale_from_norm(std::max(pcol[j], acol[j]));
    for (int i = 0; i < m; ++i) drow[i] = scale_from_norm(arow[i]);
    for (const auto& [start, len] : uniform_blocks) {
      const double mean = drow.segment(start, len).mean();
      drow.segment(start, len).setConstant(mean);
    }
    e.d_col = e.d_col.cwiseProduct(dcol).cwiseMax(kEquilibrationMin).cwiseMin(kEquilibrationMax);
    e.d_row = e.d_row.cwiseProduct(drow).cwiseMax(kEquilibrationMin).cwiseMin(kEquilibrationMax);
  }

  const Vector qs = e.d_col.cwiseProduct(problem.q);
  const double qnorm = qs.size() > 0 ? qs.lpNorm<Eigen::Infinity>() : 0.0;
  e.c_obj = qnorm == 0.0 ? 1.0 : std::clamp(1.0 / qnorm, kEquilibrationMin, kEquilibrationMax);

  ProblemData out;
  out.P = scale_matrix(problem.P, e.d_col, e.d_col, e.c_obj);
  out.A = scale_matrix(problem.A, e.d_row, e.d_col, 1.0);
  out.q = e.c_obj * qs;
  out.b = e.d_row.cwiseProduct(problem.b);
  out.cones = problem.cones;
  return {std::move(out), std::move(e)};
}

void unscale_solution(Vector& x, Vector& z, Vector& s, const Equilibration& e) {
  x = x.cwiseProduct(e.d_col);
  s = s.cwiseQuotient(e.d_row);
  z = z.cwiseProduct(e.d_row) / e.c_obj;
}

void scale_solution(Vector& x, Vector& z, Vector& s, const Equilibration& e) {
  x = x.cwiseQuotient(e.d_col);
  s = s.cwiseProduct(e.d_row);
  z = z.cwiseQuotient(e.d_row) * e.c_obj;
}

}  // namespace conicip

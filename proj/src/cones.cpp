#include "conicip/cones.hpp"

#include "parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace conicip {

using barrier::Mat3;
using barrier::Vec3;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

Vec3 seg3(const Vector& v, int offset) { return v.segment<3>(offset); }

}  // namespace

// ---------------------------------------------------------------------- svec

namespace svec {

int dim(int side) { return side * (side + 1) / 2; }

Eigen::MatrixXd to_matrix(std::span<const double> v, int side) {
  Eigen::MatrixXd m(side, side);
  int k = 0;
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i, ++k) {
      const double x = i == j ? v[k] : v[k] / kSqrt2;
      m(i, j) = x;
      m(j, i) = x;
    }
  }
  return m;
}

void from_matrix(const Eigen::MatrixXd& m, std::span<double> out) {
  const int side = static_cast<int>(m.rows());
  int k = 0;
  for (int j = 0; j < side; ++j)
    for (int i = j; i < side; ++i, ++k) out[k] = i == j ? m(i, j) : kSqrt2 * 0.5 * (m(i, j) + m(j, i));
}

}  // namespace svec

namespace {

Eigen::MatrixXd smat(const Vector& v, const ConeBlock& b, int side) {
  return svec::to_matrix(std::span<const double>(v.data() + b.offset, b.dim), side);
}

void put_svec(Vector& v, const ConeBlock& b, const Eigen::MatrixXd& m) {
  svec::from_matrix(m, std::span<double>(v.data() + b.offset, b.dim));
}

double soc_residual(const Vector& x, const ConeBlock& b) {
  const double t = x[b.offset];
  return t * t - tree_norm2(std::span<const double>(x.data() + b.offset + 1, b.dim - 1));
}

bool soc_contains(const Vector& x, const ConeBlock& b, bool strict) {
  const double t = x[b.offset];
  const double r = soc_residual(x, b);
  return strict ? (t > 0.0 && r > 0.0) : (t >= 0.0 && r >= 0.0);
}

bool psd_contains(const Vector& x, const ConeBlock& b, int side, bool strict) {
  const Eigen::MatrixXd m = smat(x, b, side);
  if (!m.allFinite()) return false;
  if (strict) {
    const Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  return strict ? lmin > 0.0 : lmin >= 0.0;
}

// SOC Jordan algebra helpers on one block; J = diag(1,-1,...,-1).
Vector jordan_soc(const Vector& x, const Vector& y) {
  Vector out(x.size());
  out[0] = x.dot(y);
  const auto n = x.size() - 1;
  out.tail(n) = x[0] * y.tail(n) + y[0] * x.tail(n);
  return out;
}

// Solves λ∘u = v.
Vector jordan_div_soc(const Vector& lambda, const Vector& v) {
  const auto n = lambda.size() - 1;
  const double det = lambda[0] * lambda[0] - lambda.tail(n).squaredNorm();
  Vector u(lambda.size());
  u[0] = (lambda[0] * v[0] - lambda.tail(n).dot(v.tail(n))) / det;
  u.tail(n) = (v.tail(n) - u[0] * lambda.tail(n)) / lambda[0];
  return u;
}

// W̄·v and W̄⁻¹·v for the normalized SOC scaling point w̄ (w̄ᵀJw̄ = 1).
Vector soc_wbar_apply(const Vector& w, const Vector& v, bool inverse) {
  const auto n = w.size() - 1;
  const double w0 = w[0];
  const double w1v1 = w.tail(n).dot(v.tail(n));
  const double sign = inverse ? -1.0 : 1.0;
  Vector out(w.size());
  out[0] = w0 * v[0] + sign * w1v1;
  out.tail(n) = sign * v[0] * w.tail(n) + v.tail(n) + (w1v1 / (1.0 + w0)) * w.tail(n);
  return out;
}

Eigen::MatrixXd soc_dense_H(const Vector& w, double eta) {
  const auto d = w.size();
  Eigen::MatrixXd h = 2.0 * w * w.transpose();
  h(0, 0) -= 1.0;
  for (Eigen::Index i = 1; i < d; ++i) h(i, i) += 1.0;
  return eta * eta * h;
}

// Matrix of X ↦ svec(M·X·M) in svec coordinates (M symmetric).
Eigen::MatrixXd svec_congruence(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  const int d = svec::dim(n);
  std::vector<std::pair<int, int>> idx;
  idx.reserve(d);
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) idx.emplace_back(i, j);
  Eigen::MatrixXd H(d, d);
  for (int r = 0; r < d; ++r) {
    const auto [i, j] = idx[r];
    const double si = i == j ? 1.0 : kSqrt2;
    for (int c = r; c < d; ++c) {
      const auto [k, l] = idx[c];
      const double sk = k == l ? 1.0 : kSqrt2;
      const double v = 0.5 * si * sk * (M(i, k) * M(j, l) + M(i, l) * M(j, k));
      H(r, c) = v;
      H(c, r) = v;
    }
  }
  return H;
}

template <class Barrier>
struct NonsymScaling {
  Mat3 H;
  Mat3 hess;
  Vec3 grad;
  bool bfgs;
};

// Rank-4 BFGS scaling: H = S(SᵀZ)⁻¹Sᵀ + Hₐ - HₐZ(ZᵀHₐZ)⁻¹ZᵀHₐ with
// Z = [z, z̃], S = [s, s̃], Hₐ = μ∇²f(z), giving Hz = s and Hz̃ = s̃.
// Falls back to Hₐ when the pair is (numerically) on the central path.
template <class Barrier>
NonsymScaling<Barrier> nonsym_scaling(const Barrier& f, const Vec3& s, const Vec3& z) {
  if (!f.in_domain(z)) throw ScalingFailure("dual iterate left the interior of a nonsymmetric cone");
  if (!f.in_primal(s)) throw ScalingFailure("primal iterate left the interior of a nonsymmetric cone");
  NonsymScaling<Barrier> out;
  out.grad = f.gradient(z);
  out.hess = f.hessian(z);
  const double nu = Barrier::degree;
  const double mu = s.dot(z) / nu;
  if (!(mu > 0.0)) throw ScalingFailure("nonpositive complementarity in a nonsymmetric cone");
  const Mat3 Ha = mu * out.hess;

  const auto conj = barrier::conjugate_gradient(f, s, z);
  const Vec3 z_shadow = -conj.gradient;
  const Vec3 s_shadow = -out.grad;
  const double mu_shadow = s_shadow.dot(z_shadow) / nu;
  const double eps = std::numeric_limits<double>::epsilon();

  out.bfgs = false;
  out.H = Ha;
  if (conj.converged && mu * mu_shadow - 1.0 > std::sqrt(eps)) {
    Eigen::Matrix<double, 3, 2> S, Z;
    S << s, s_shadow;
    Z << z, z_shadow;
    Eigen::Matrix2d SZ = S.transpose() * Z;
    SZ = 0.5 * (SZ + SZ.transpose()).eval();
    Eigen::Matrix2d ZHZ = Z.transpose() * Ha * Z;
    ZHZ = 0.5 * (ZHZ + ZHZ.transpose()).eval();
    const double det_sz = SZ.determinant();
    const double det_zhz = ZHZ.determinant();
    if (det_sz > eps * SZ.squaredNorm() && det_zhz > eps * ZHZ.squaredNorm()) {
      const Eigen::Matrix<double, 3, 2> HaZ = Ha * Z;
      Mat3 H = S * SZ.inverse() * S.transpose() + Ha - HaZ * ZHZ.inverse() * HaZ.transpose();
      H = 0.5 * (H + H.transpose()).eval();
      const Eigen::LLT<Mat3> llt(H);
      if (llt.info() == Eigen::Success && H.allFinite()) {
        out.H = H;
        out.bfgs = true;
      }
    }
  }
  if (!out.bfgs) {
    // Near the boundary μ∇²f(z) has condition ~1/μ², so Cholesky can fail on
    // rounding alone; accept it when it is semidefinite up to that rounding.
    if (!out.H.allFinite()) throw ScalingFailure("Hessian scaling of a nonsymmetric cone is not finite");
    const Eigen::LLT<Mat3> llt(out.H);
    if (llt.info() != Eigen::Success) {
      const Eigen::SelfAdjointEigenSolver<Mat3> eig(out.H, Eigen::EigenvaluesOnly);
      const Vec3 ev = eig.eigenvalues();
      if (!(ev[2] > 0.0) || ev[0] < -16.0 * eps * ev[2])
        throw ScalingFailure("Hessian scaling of a nonsymmetric cone is not positive definite");
    }
  }
  return out;
}

template <class Barrier>
Vec3 nonsym_combined_ds(const Barrier& f, const Vec3& s, const Vec3& z, const Vec3& grad, const Mat3& hess,
                        const Vec3& dz, const Vec3& ds, double sigma_mu) {
  Vec3 eta = Vec3::Zero();
  const Eigen::LLT<Mat3> llt(hess);
  if (llt.info() == Eigen::Success) eta = -0.5 * f.third_order(z, dz, llt.solve(ds));
  if (!eta.allFinite()) eta.setZero();
  return s + sigma_mu * grad + eta;
}

// Largest α with x + α·d inside the SOC block (∞ when unbounded).
double soc_step(const Vector& x, const Vector& d, const ConeBlock& b) {
  const auto n = b.dim - 1;
  const auto x0 = x[b.offset];
  const auto d0 = d[b.offset];
  const auto x1 = x.segment(b.offset + 1, n);
  const auto d1 = d.segment(b.offset + 1, n);
  const double a = d0 * d0 - d1.squaredNorm();
  const double bb = 2.0 * (x0 * d0 - x1.dot(d1));
  const double c = std::max(0.0, x0 * x0 - x1.squaredNorm());
  double alpha = kInf;
  if (a == 0.0) {
    if (bb < 0.0) alpha = -c / bb;
  } else {
    const double disc = bb * bb - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (bb + std::copysign(std::sqrt(disc), bb));
      const double r1 = q / a;
      const double r2 = q != 0.0 ? c / q : kInf;
      for (double r : {r1, r2})
        if (r >= 0.0) alpha = std::min(alpha, r);
    }
  }
  // The cone boundary is reached no later than t + α·dt = 0.
  if (d0 < 0.0) alpha = std::min(alpha, -x0 / d0);
  return alpha;
}

double psd_step(const Vector& x, const Vector& d, const ConeBlock& b, int side) {
  const Eigen::MatrixXd X = smat(x, b, side);
  const Eigen::MatrixXd D = smat(d, b, side);
  const Eigen::LLT<Eigen::MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd M = L.triangularView<Eigen::Lower>().solve(D);
  M = L.triangularView<Eigen::Lower>().solve(M.transpose()).transpose();
  M = 0.5 * (M + M.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

bool nonsym_blocks_interior(const ConeSet& cones, const Vector& s, const Vector& z) {
  for (const auto& b : cones.exp)
    if (!barrier::exp_primal_contains(seg3(s, b.offset), true) || !barrier::exp_dual_contains(seg3(z, b.offset), true))
      return false;
  for (std::size_t i = 0; i < cones.pow.size(); ++i) {
    const auto& b = cones.pow[i];
    const double a = cones.pow_alpha[i];
    if (!barrier::pow_primal_contains(seg3(s, b.offset), a, true) ||
        !barrier::pow_dual_contains(seg3(z, b.offset), a, true))
      return false;
  }
  return true;
}

void require_dual_interior(const ConeSet& cones, const Vector& z) {
  if (!is_in_dual_cone(cones, z, true)) throw DomainError("point is not in the interior of the dual cone");
}

}  // namespace

// ------------------------------------------------------------------- ConeSet

ConeSet::ConeSet(const std::vector<ConeSpec>& cones, int threads) {
  int offset = 0;
  int last_rank = -1;
  for (const auto& c : cones) {
    const int rank = static_cast<int>(c.kind);
    if (rank < last_rank) throw std::invalid_argument("cones are not in family order; call reorder_cones first");
    last_rank = rank;
    const ConeBlock b{offset, c.dim};
    switch (c.kind) {
      case ConeKind::Zero:
        if (zero.dim == 0) zero.offset = offset;
        zero.dim += c.dim;
        break;
      case ConeKind::Nonneg:
        if (nonneg.dim == 0) nonneg.offset = offset;
        nonneg.dim += c.dim;
        degree_ += c.dim;
        break;
      case ConeKind::SecondOrder:
        soc.push_back(b);
        degree_ += 1;
        break;
      case ConeKind::Exponential:
        exp.push_back(b);
        degree_ += 3;
        break;
      case ConeKind::Power:
        pow.push_back(b);
        pow_alpha.push_back(c.alpha);
        degree_ += 3;
        break;
      case ConeKind::PsdTriangle:
        psd.push_back(b);
        psd_side.push_back(c.psd_side());
        degree_ += c.psd_side();
        break;
    }
    offset += c.dim;
  }
  if (zero.dim == 0) zero.offset = 0;
  if (nonneg.dim == 0) nonneg.offset = zero.offset + zero.dim;
  dim_ = offset;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  set_threads(threads > 0 ? threads : hw);
}

std::vector<ConeBlock> ConeSet::dense_blocks() const {
  std::vector<ConeBlock> out;
  out.insert(out.end(), soc.begin(), soc.end());
  out.insert(out.end(), exp.begin(), exp.end());
  out.insert(out.end(), pow.begin(), pow.end());
  out.insert(out.end(), psd.begin(), psd.end());
  return out;
}

int ConeSet::h_value_count() const {
  int count = zero.dim + nonneg.dim;
  for (const auto& b : dense_blocks()) count += b.dim * (b.dim + 1) / 2;
  return count;
}

int degree(const ConeSet& cones) { return cones.degree(); }

InitialPoint unit_init(const ConeSet& cones) {
  const int m = cones.dim();
  InitialPoint p{Vector::Zero(m), Vector::Zero(m)};
  p.s.segment(cones.nonneg.offset, cones.nonneg.dim).setOnes();
  for (const auto& b : cones.soc) p.s[b.offset] = 1.0;
  const Vec3 exp_unit = barrier::ExpDualBarrier{}.unit_point();
  for (const auto& b : cones.exp) p.s.segment<3>(b.offset) = exp_unit;
  for (std::size_t i = 0; i < cones.pow.size(); ++i)
    p.s.segment<3>(cones.pow[i].offset) = barrier::PowDualBarrier{cones.pow_alpha[i]}.unit_point();
  for (std::size_t i = 0; i < cones.psd.size(); ++i)
    put_svec(p.s, cones.psd[i], Eigen::MatrixXd::Identity(cones.psd_side[i], cones.psd_side[i]));
  p.z = p.s;
  return p;
}

bool is_in_cone(const ConeSet& cones, const Vector& v, bool strict) {
  if (v.size() != cones.dim()) return false;
  if (!v.segment(cones.zero.offset, cones.zero.dim).isZero(0.0)) return false;
  const auto nn = v.segment(cones.nonneg.offset, cones.nonneg.dim);
  if (strict ? !(nn.array() > 0.0).all() : !(nn.array() >= 0.0).all()) return false;
  for (const auto& b : cones.soc)
    if (!soc_contains(v, b, strict)) return false;
  for (const auto& b : cones.exp)
    if (!barrier::exp_primal_contains(seg3(v, b.offset), strict)) return false;
  for (std::size_t i = 0; i < cones.pow.size(); ++i)
    if (!barrier::pow_primal_contains(seg3(v, cones.pow[i].offset), cones.pow_alpha[i], strict)) return false;
  for (std::size_t i = 0; i < cones.psd.size(); ++i)
    if (!psd_contains(v, cones.psd[i], cones.psd_side[i], strict)) return false;
  return true;
}

bool is_in_dual_cone(const ConeSet& cones, const Vector& v, bool strict) {
  if (v.size() != cones.dim()) return false;
  if (!v.segment(cones.zero.offset, cones.zero.dim).allFinite()) return false;
  const auto nn = v.segment(cones.nonneg.offset, cones.nonneg.dim);
  if (strict ? !(nn.array() > 0.0).all() : !(nn.array() >= 0.0).all()) return false;
  for (const auto& b : cones.soc)
    if (!soc_contains(v, b, strict)) return false;
  for (const auto& b : cones.exp)
    if (!barrier::exp_dual_contains(seg3(v, b.offset), strict)) return false;
  for (std::size_t i = 0; i < cones.pow.size(); ++i)
    if (!barrier::pow_dual_contains(seg3(v, cones.pow[i].offset), cones.pow_alpha[i], strict)) return false;
  for (std::size_t i = 0; i < cones.psd.size(); ++i)
    if (!psd_contains(v, cones.psd[i], cones.psd_side[i], strict)) return false;
  return true;
}

double barrier_value(const ConeSet& cones, const Vector& z) {
  require_dual_interior(cones, z);
  double f = 0.0;
  const auto nn = z.segment(cones.nonneg.offset, cones.nonneg.dim);
  for (Eigen::Index i = 0; i < nn.size(); ++i) f -= std::log(nn[i]);
  for (const auto& b : cones.soc) f -= 0.5 * std::log(soc_residual(z, b));
  for (const auto& b : cones.exp) f += barrier::ExpDualBarrier{}.value(seg3(z, b.offset));
  for (std::size_t i = 0; i < cones.pow.size(); ++i)
    f += barrier::PowDualBarrier{cones.pow_alpha[i]}.value(seg3(z, cones.pow[i].offset));
  for (std::size_t i = 0; i < cones.psd.size(); ++i) {
    const Eigen::LLT<Eigen::MatrixXd> llt(smat(z, cones.psd[i], cones.psd_side[i]));
    f -= 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  return f;
}

Vector barrier_gradient(const ConeSet& cones, const Vector& z) {
  require_dual_interior(cones, z);
  Vector g = Vector::Zero(z.size());
  const int no = cones.nonneg.offset;
  g.segment(no, cones.nonneg.dim) = -z.segment(no, cones.nonneg.dim).cwiseInverse();
  for (const auto& b : cones.soc) {
    const double r = soc_residual(z, b);
    g[b.offset] = -z[b.offset] / r;
    g.segment(b.offset + 1, b.dim - 1) = z.segment(b.offset + 1, b.dim - 1) / r;
  }
  for (const auto& b : cones.exp) g.segment<3>(b.offset) = barrier::ExpDualBarrier{}.gradient(seg3(z, b.offset));
  for (std::size_t i = 0; i < cones.pow.size(); ++i)
    g.segment<3>(cones.pow[i].offset) =
        barrier::PowDualBarrier{cones.pow_alpha[i]}.gradient(seg3(z, cones.pow[i].offset));
  for (std::size_t i = 0; i < cones.psd.size(); ++i) {
    const Eigen::MatrixXd Z = smat(z, cones.psd[i], cones.psd_side[i]);
    put_svec(g, cones.psd[i], -Z.inverse());
  }
  return g;
}

// ------------------------------------------------------------------- scaling

ScalingState update_scaling(const ConeSet& cones, const Vector& s, const Vector& z, double mu) {
  if (!(mu > 0.0)) throw ScalingFailure("complementarity measure must be positive");
  const int m = cones.dim();
  ScalingState st;
  st.mu = mu;
  st.w = Vector::Zero(m);
  st.lambda = Vector::Zero(m);

  // Nonneg: H = s/z.
  for (int i = cones.nonneg.offset; i < cones.nonneg.offset + cones.nonneg.dim; ++i) {
    if (!(s[i] > 0.0 && z[i] > 0.0)) throw ScalingFailure("nonnegative iterate left the interior");
    st.w[i] = std::sqrt(s[i] / z[i]);
    st.lambda[i] = std::sqrt(s[i] * z[i]);
  }

  // Second-order cones.
  const Vector s_res = soc_residuals_batch(cones, s);
  const Vector z_res = soc_residuals_batch(cones, z);
  st.soc_eta.assign(cones.soc.size(), 1.0);
  detail::parallel_for(static_cast<int>(cones.soc.size()), cones.threads(), [&](int k) {
    const auto& b = cones.soc[k];
    if (!(s[b.offset] > 0.0 && z[b.offset] > 0.0 && s_res[k] > 0.0 && z_res[k] > 0.0))
      throw ScalingFailure("second-order cone iterate left the interior");
    const double s_scale = std::sqrt(s_res[k]);
    const double z_scale = std::sqrt(z_res[k]);
    const Vector sb = s.segment(b.offset, b.dim) / s_scale;
    const Vector zb = z.segment(b.offset, b.dim) / z_scale;
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    Vector w = sb;
    w[0] += zb[0];
    w.tail(b.dim - 1) -= zb.tail(b.dim - 1);
    w /= 2.0 * gamma;
    // Renormalize so that wᵀJw = 1 holds to rounding.
    const double wres = w[0] * w[0] - w.tail(b.dim - 1).squaredNorm();
    if (!(wres > 0.0)) throw ScalingFailure("second-order cone scaling point is not interior");
    w /= std::sqrt(wres);
    const double eta = std::sqrt(s_scale / z_scale);
    st.soc_eta[k] = eta;
    st.w.segment(b.offset, b.dim) = w;
    st.lambda.segment(b.offset, b.dim) = eta * soc_wbar_apply(w, z.segment(b.offset, b.dim), false);
  });

  // Exponential cones.
  const std::size_t ne = cones.exp.size();
  st.exp_H.resize(ne);
  st.exp_hess.resize(ne);
  st.exp_grad.resize(ne);
  st.exp_bfgs.assign(ne, 0);
  detail::parallel_for(static_cast<int>(ne), cones.threads(), [&](int k) {
    const int o = cones.exp[k].offset;
    const auto r = nonsym_scaling(barrier::ExpDualBarrier{}, seg3(s, o), seg3(z, o));
    st.exp_H[k] = r.H;
    st.exp_hess[k] = r.hess;
    st.exp_grad[k] = r.grad;
    st.exp_bfgs[k] = r.bfgs;
  });

  // Power cones.
  const std::size_t np = cones.pow.size();
  st.pow_H.resize(np);
  st.pow_hess.resize(np);
  st.pow_grad.resize(np);
  st.pow_bfgs.assign(np, 0);
  detail::parallel_for(static_cast<int>(np), cones.threads(), [&](int k) {
    const int o = cones.pow[k].offset;
    const auto r = nonsym_scaling(barrier::PowDualBarrier{cones.pow_alpha[k]}, seg3(s, o), seg3(z, o));
    st.pow_H[k] = r.H;
    st.pow_hess[k] = r.hess;
    st.pow_grad[k] = r.grad;
    st.pow_bfgs[k] = r.bfgs;
  });

  // PSD cones: R = L_s V Σ^{-1/2} from the SVD of L_zᵀL_s, so RᵀZR = R⁻¹SR⁻ᵀ = Σ.
  const std::size_t nd = cones.psd.size();
  st.psd_R.resize(nd);
  st.psd_Rinv.resize(nd);
  st.psd_H.resize(nd);
  detail::parallel_for(static_cast<int>(nd), cones.threads(), [&](int k) {
    const auto& b = cones.psd[k];
    const int side = cones.psd_side[k];
    const Eigen::LLT<Eigen::MatrixXd> llt_s(smat(s, b, side));
    const Eigen::LLT<Eigen::MatrixXd> llt_z(smat(z, b, side));
    if (llt_s.info() != Eigen::Success || llt_z.info() != Eigen::Success)
      throw ScalingFailure("semidefinite iterate left the interior");
    const Eigen::MatrixXd Ls = llt_s.matrixL();
    const Eigen::MatrixXd Lz = llt_z.matrixL();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sig = svd.singularValues();
    if (!(sig.minCoeff() > 0.0)) throw ScalingFailure("semidefinite scaling is singular");
    const Eigen::VectorXd isq = sig.cwiseSqrt().cwiseInverse();
    st.psd_R[k] = Ls * svd.matrixV() * isq.asDiagonal();
    st.psd_Rinv[k] = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
    st.psd_H[k] = svec_congruence(st.psd_R[k] * st.psd_R[k].transpose());
    put_svec(st.lambda, b, Eigen::MatrixXd(sig.asDiagonal()));
  });
  return st;
}

Vector apply_H(const ConeSet& cones, const ScalingState& st, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  const int no = cones.nonneg.offset;
  const int nn = cones.nonneg.dim;
  out.segment(no, nn) = st.w.segment(no, nn).array().square() * v.segment(no, nn).array();
  for (std::size_t k = 0; k < cones.soc.size(); ++k) {
    const auto& b = cones.soc[k];
    const auto w = st.w.segment(b.offset, b.dim);
    const auto vb = v.segment(b.offset, b.dim);
    Vector hv = 2.0 * w.dot(vb) * w;
    hv[0] -= vb[0];
    hv.tail(b.dim - 1) += vb.tail(b.dim - 1);
    out.segment(b.offset, b.dim) = st.soc_eta[k] * st.soc_eta[k] * hv;
  }
  for (std::size_t k = 0; k < cones.exp.size(); ++k)
    out.segment<3>(cones.exp[k].offset) = st.exp_H[k] * seg3(v, cones.exp[k].offset);
  for (std::size_t k = 0; k < cones.pow.size(); ++k)
    out.segment<3>(cones.pow[k].offset) = st.pow_H[k] * seg3(v, cones.pow[k].offset);
  for (std::size_t k = 0; k < cones.psd.size(); ++k) {
    const auto& b = cones.psd[k];
    out.segment(b.offset, b.dim) = st.psd_H[k] * v.segment(b.offset, b.dim);
  }
  return out;
}

Eigen::MatrixXd dense_H_block(const ConeSet& cones, const ScalingState& st, int index) {
  const int nsoc = static_cast<int>(cones.soc.size());
  const int nexp = static_cast<int>(cones.exp.size());
  const int npow = static_cast<int>(cones.pow.size());
  if (index < nsoc) {
    const auto& b = cones.soc[index];
    return soc_dense_H(st.w.segment(b.offset, b.dim), st.soc_eta[index]);
  }
  index -= nsoc;
  if (index < nexp) return st.exp_H[index];
  index -= nexp;
  if (index < npow) return st.pow_H[index];
  index -= npow;
  return st.psd_H.at(index);
}

void fill_H_values(const ConeSet& cones, const ScalingState& st, std::span<double> out) {
  int k = 0;
  for (int i = 0; i < cones.zero.dim; ++i) out[k++] = 0.0;
  for (int i = 0; i < cones.nonneg.dim; ++i) {
    const double w = st.w[cones.nonneg.offset + i];
    out[k++] = w * w;
  }
  const auto blocks = cones.dense_blocks();
  for (int d = 0; d < static_cast<int>(blocks.size()); ++d) {
    const Eigen::MatrixXd h = dense_H_block(cones, st, d);
    for (int i = 0; i < h.rows(); ++i)
      for (int j = i; j < h.cols(); ++j) out[k++] = h(i, j);
  }
}

// --------------------------------------------------------------- step length

double step_length(const ConeSet& cones, const StepLengthRequest& req) {
  const Vector& z = *req.z;
  const Vector& s = *req.s;
  const Vector& dz = *req.dz;
  const Vector& ds = *req.ds;
  double alpha = req.alpha_max;
  if (req.dtau < 0.0) alpha = std::min(alpha, -req.tau / req.dtau);
  if (req.dkappa < 0.0) alpha = std::min(alpha, -req.kappa / req.dkappa);
  for (int i = cones.nonneg.offset; i < cones.nonneg.offset + cones.nonneg.dim; ++i) {
    if (dz[i] < 0.0) alpha = std::min(alpha, -z[i] / dz[i]);
    if (ds[i] < 0.0) alpha = std::min(alpha, -s[i] / ds[i]);
  }
  for (const auto& b : cones.soc) alpha = std::min({alpha, soc_step(z, dz, b), soc_step(s, ds, b)});
  for (std::size_t k = 0; k < cones.psd.size(); ++k) {
    const auto& b = cones.psd[k];
    const int side = cones.psd_side[k];
    alpha = std::min({alpha, psd_step(z, dz, b, side), psd_step(s, ds, b, side)});
  }
  if (!cones.exp.empty() || !cones.pow.empty()) {
    while (alpha >= kMinStepLength) {
      const Vector zt = z + alpha * dz;
      const Vector st = s + alpha * ds;
      if (nonsym_blocks_interior(cones, st, zt)) break;
      alpha *= req.backtrack;
    }
  }
  if (!(alpha >= kMinStepLength)) throw StepTooSmall(alpha);
  return alpha;
}

// ------------------------------------------------------------------ corrector

Vector combined_ds(const ConeSet& cones, const ScalingState& st, const Vector& s, const Vector& z,
                   const Vector& dz, const Vector& ds, double sigma, double mu) {
  const double sm = sigma * mu;
  Vector out = Vector::Zero(s.size());
  for (int i = cones.nonneg.offset; i < cones.nonneg.offset + cones.nonneg.dim; ++i) {
    const double l = st.lambda[i];
    out[i] = (l * l + ds[i] * dz[i] - sm) / z[i];
  }
  for (std::size_t k = 0; k < cones.soc.size(); ++k) {
    const auto& b = cones.soc[k];
    const Vector w = st.w.segment(b.offset, b.dim);
    const double eta_w = st.soc_eta[k];
    const Vector lambda = st.lambda.segment(b.offset, b.dim);
    const Vector a = soc_wbar_apply(w, ds.segment(b.offset, b.dim), true) / eta_w;
    const Vector c = eta_w * soc_wbar_apply(w, dz.segment(b.offset, b.dim), false);
    Vector v = jordan_soc(lambda, lambda) + jordan_soc(a, c);
    v[0] -= sm;
    out.segment(b.offset, b.dim) = eta_w * soc_wbar_apply(w, jordan_div_soc(lambda, v), false);
  }
  for (std::size_t k = 0; k < cones.exp.size(); ++k) {
    const int o = cones.exp[k].offset;
    out.segment<3>(o) = nonsym_combined_ds(barrier::ExpDualBarrier{}, seg3(s, o), seg3(z, o), st.exp_grad[k],
                                           st.exp_hess[k], seg3(dz, o), seg3(ds, o), sm);
  }
  for (std::size_t k = 0; k < cones.pow.size(); ++k) {
    const int o = cones.pow[k].offset;
    out.segment<3>(o) = nonsym_combined_ds(barrier::PowDualBarrier{cones.pow_alpha[k]}, seg3(s, o), seg3(z, o),
                                           st.pow_grad[k], st.pow_hess[k], seg3(dz, o), seg3(ds, o), sm);
  }
  for (std::size_t k = 0; k < cones.psd.size(); ++k) {
    const auto& b = cones.psd[k];
    const int side = cones.psd_side[k];
    const Eigen::MatrixXd& R = st.psd_R[k];
    const Eigen::MatrixXd& Rinv = st.psd_Rinv[k];
    const Eigen::MatrixXd lam = smat(st.lambda, b, side);
    const Eigen::MatrixXd A = Rinv * smat(ds, b, side) * Rinv.transpose();  // W⁻¹Δs
    const Eigen::MatrixXd C = R.transpose() * smat(dz, b, side) * R;        // WΔz
    Eigen::MatrixXd V = lam * lam + 0.5 * (A * C + C * A);
    V.diagonal().array() -= sm;
    Eigen::MatrixXd U(side, side);
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) U(i, j) = 2.0 * V(i, j) / (lam(i, i) + lam(j, j));
    put_svec(out, b, R * U * R.transpose());
  }
  return out;
}

// -------------------------------------------------------------- neighborhood

bool neighborhood_ok(const ConeSet& cones, const Vector& s, const Vector& z, double mu, double beta) {
  if (!is_in_cone(cones, s, true) || !is_in_dual_cone(cones, z, true))
    throw DomainError("neighborhood check needs a strictly interior pair");
  const double bound = beta * mu;
  for (int i = cones.nonneg.offset; i < cones.nonneg.offset + cones.nonneg.dim; ++i)
    if (s[i] * z[i] < bound) return false;
  for (const auto& b : cones.soc) {
    const double ratio = soc_residual(s, b) * soc_residual(z, b) / s.segment(b.offset, b.dim).dot(z.segment(b.offset, b.dim));
    if (ratio < bound) return false;
  }
  for (std::size_t k = 0; k < cones.psd.size(); ++k) {
    const auto& b = cones.psd[k];
    const int side = cones.psd_side[k];
    const Eigen::MatrixXd Si = smat(s, b, side).inverse();
    const Eigen::MatrixXd Zi = smat(z, b, side).inverse();
    const double ratio = side / (Si.cwiseProduct(Zi).sum());
    if (ratio < bound) return false;
  }
  const ShadowIterates sh = shadow_iterates(cones, s, z);
  auto nonsym_ok = [&](int o) {
    const double inner = sh.s_shadow.segment<3>(o).dot(sh.z_shadow.segment<3>(o));
    return 3.0 / inner >= bound;
  };
  for (const auto& b : cones.exp)
    if (!nonsym_ok(b.offset)) return false;
  for (const auto& b : cones.pow)
    if (!nonsym_ok(b.offset)) return false;
  return true;
}

// ------------------------------------------------------------- SOC residuals

double tree_norm2(std::span<const double> u) {
  constexpr std::size_t kChunk = 8;
  if (u.empty()) return 0.0;
  const std::size_t nchunks = (u.size() + kChunk - 1) / kChunk;
  double stack_buf[64] = {};
  std::vector<double> heap_buf;
  double* partial = stack_buf;
  if (nchunks > 64) {
    heap_buf.resize(nchunks);
    partial = heap_buf.data();
  }
  for (std::size_t c = 0; c < nchunks; ++c) {
    double acc = 0.0;
    const std::size_t end = std::min(u.size(), (c + 1) * kChunk);
    for (std::size_t j = c * kChunk; j < end; ++j) acc += u[j] * u[j];
    partial[c] = acc;
  }
  std::size_t count = nchunks;
  while (count > 1) {
    const std::size_t half = count / 2;
    for (std::size_t i = 0; i < half; ++i) partial[i] = partial[2 * i] + partial[2 * i + 1];
    if (count % 2 == 1) partial[half] = partial[count - 1];
    count = half + count % 2;
  }
  return partial[0];
}

Vector soc_residuals_batch(const ConeSet& cones, const Vector& x) {
  Vector r(static_cast<Eigen::Index>(cones.soc.size()));
  detail::parallel_for(static_cast<int>(cones.soc.size()), cones.threads(),
                       [&](int k) { r[k] = soc_residual(x, cones.soc[k]); });
  return r;
}

// ------------------------------------------------------------------- shadows

ShadowIterates shadow_iterates(const ConeSet& cones, const Vector& s, const Vector& z) {
  ShadowIterates out{Vector::Zero(s.size()), Vector::Zero(s.size()), 0.0};
  auto one = [&](const auto& f, int o) {
    const Vec3 sb = seg3(s, o);
    const Vec3 zb = seg3(z, o);
    if (!f.in_primal(sb) || !f.in_domain(zb)) throw DomainError("shadow iterates need a strictly interior pair");
    out.s_shadow.segment<3>(o) = -f.gradient(zb);
    out.z_shadow.segment<3>(o) = -barrier::conjugate_gradient(f, sb, zb).gradient;
  };
  detail::parallel_for(static_cast<int>(cones.exp.size()), cones.threads(),
                       [&](int k) { one(barrier::ExpDualBarrier{}, cones.exp[k].offset); });
  detail::parallel_for(static_cast<int>(cones.pow.size()), cones.threads(),
                       [&](int k) { one(barrier::PowDualBarrier{cones.pow_alpha[k]}, cones.pow[k].offset); });
  const double nu = 3.0 * static_cast<double>(cones.exp.size() + cones.pow.size());
  if (nu > 0.0) out.mu_shadow = out.s_shadow.dot(out.z_shadow) / nu;
  return out;
}

}  // namespace conicip

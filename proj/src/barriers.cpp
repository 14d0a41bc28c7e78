#include "conicip/barriers.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <cmath>

namespace conicip::barrier {

namespace {

// Value and derivatives (up to third order) of a scalar function h at a point;
// third[i] holds ∂H/∂z_i.
struct Jet {
  double h = 0.0;
  Vec3 g = Vec3::Zero();
  Mat3 H = Mat3::Zero();
  std::array<Mat3, 3> third{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
};

Jet linear_jet(const Vec3& c, const Vec3& z) {
  Jet j;
  j.h = c.dot(z);
  j.g = c;
  return j;
}

Vec3 third_contract(const std::array<Mat3, 3>& t, const Vec3& u, const Vec3& v) {
  Vec3 out = Vec3::Zero();
  for (int k = 0; k < 3; ++k) out += t[k] * u * v[k];
  return out;
}

// Derivatives of -w·log h.
Vec3 neglog_gradient(const Jet& j, double w) { return -w * j.g / j.h; }

Mat3 neglog_hessian(const Jet& j, double w) { return -w * (j.H / j.h - j.g * j.g.transpose() / (j.h * j.h)); }

Vec3 neglog_third(const Jet& j, double w, const Vec3& u, const Vec3& v) {
  const double h2 = j.h * j.h;
  const double gu = j.g.dot(u);
  const double gv = j.g.dot(v);
  const Vec3 out = third_contract(j.third, u, v) / j.h - (j.H * u) * gv / h2 - (j.H * v) * gu / h2 -
                   j.g * u.dot(j.H * v) / h2 + 2.0 * j.g * gu * gv / (h2 * j.h);
  return -w * out;
}

// φ(z) = z₂ - z₁ - z₁·log(z₃/(-z₁))   (0-based: z[1] - z[0] - z[0]·log(z[2]/(-z[0])))
Jet exp_psi(const Vec3& z) {
  Jet j;
  const double u = z[0], w = z[2];
  j.h = z[1] - u - u * std::log(w / (-u));
  j.g = Vec3(std::log(-u) - std::log(w), 1.0, -u / w);
  j.H(0, 0) = 1.0 / u;
  j.H(0, 2) = j.H(2, 0) = -1.0 / w;
  j.H(2, 2) = u / (w * w);
  // ∂H/∂u
  j.third[0](0, 0) = -1.0 / (u * u);
  j.third[0](2, 2) = 1.0 / (w * w);
  // ∂H/∂w
  j.third[2](0, 2) = j.third[2](2, 0) = 1.0 / (w * w);
  j.third[2](2, 2) = -2.0 * u / (w * w * w);
  return j;
}

// φ(z) = (z₁/α)^{2α}(z₂/(1-α))^{2(1-α)} - z₃²
Jet pow_phi(const Vec3& z, double alpha) {
  Jet j;
  const double a = 2.0 * alpha;
  const double b = 2.0 * (1.0 - alpha);
  const double x = z[0], y = z[1];
  const double p = std::exp(a * std::log(x / alpha) + b * std::log(y / (1.0 - alpha)));
  j.h = p - z[2] * z[2];
  j.g = Vec3(a * p / x, b * p / y, -2.0 * z[2]);
  j.H(0, 0) = a * (a - 1.0) * p / (x * x);
  j.H(0, 1) = j.H(1, 0) = a * b * p / (x * y);
  j.H(1, 1) = b * (b - 1.0) * p / (y * y);
  j.H(2, 2) = -2.0;
  const double t000 = a * (a - 1.0) * (a - 2.0) * p / (x * x * x);
  const double t001 = a * (a - 1.0) * b * p / (x * x * y);
  const double t011 = a * b * (b - 1.0) * p / (x * y * y);
  const double t111 = b * (b - 1.0) * (b - 2.0) * p / (y * y * y);
  j.third[0](0, 0) = t000;
  j.third[0](0, 1) = j.third[0](1, 0) = t001;
  j.third[0](1, 1) = t011;
  j.third[1](0, 0) = t001;
  j.third[1](0, 1) = j.third[1](1, 0) = t011;
  j.third[1](1, 1) = t111;
  return j;
}

}  // namespace

bool exp_primal_contains(const Vec3& s, bool strict) {
  if (!s.allFinite()) return false;
  if (strict) return s[1] > 0.0 && s[2] > 0.0 && s[1] * std::log(s[2] / s[1]) - s[0] > 0.0;
  if (s[1] > 0.0) return s[2] > 0.0 && s[1] * std::log(s[2] / s[1]) - s[0] >= 0.0;
  return s[1] == 0.0 && s[0] <= 0.0 && s[2] >= 0.0;
}

bool exp_dual_contains(const Vec3& z, bool strict) {
  if (!z.allFinite()) return false;
  if (strict) return z[0] < 0.0 && z[2] > 0.0 && z[1] - z[0] - z[0] * std::log(z[2] / (-z[0])) > 0.0;
  if (z[0] < 0.0) return z[2] > 0.0 && z[1] - z[0] - z[0] * std::log(z[2] / (-z[0])) >= 0.0;
  return z[0] == 0.0 && z[1] >= 0.0 && z[2] >= 0.0;
}

bool pow_primal_contains(const Vec3& s, double alpha, bool strict) {
  if (!s.allFinite()) return false;
  if (strict) {
    return s[0] > 0.0 && s[1] > 0.0 &&
           std::exp(alpha * std::log(s[0]) + (1.0 - alpha) * std::log(s[1])) - std::abs(s[2]) > 0.0;
  }
  if (s[0] < 0.0 || s[1] < 0.0) return false;
  return std::pow(s[0], alpha) * std::pow(s[1], 1.0 - alpha) >= std::abs(s[2]);
}

bool pow_dual_contains(const Vec3& z, double alpha, bool strict) {
  if (!z.allFinite()) return false;
  if (strict) {
    return z[0] > 0.0 && z[1] > 0.0 &&
           std::exp(alpha * std::log(z[0] / alpha) + (1.0 - alpha) * std::log(z[1] / (1.0 - alpha))) -
                   std::abs(z[2]) >
               0.0;
  }
  if (z[0] < 0.0 || z[1] < 0.0) return false;
  return std::pow(z[0] / alpha, alpha) * std::pow(z[1] / (1.0 - alpha), 1.0 - alpha) >= std::abs(z[2]);
}

// ---------------------------------------------------------------- exponential

double ExpDualBarrier::value(const Vec3& z) const {
  return -std::log(exp_psi(z).h) - std::log(-z[0]) - std::log(z[2]);
}

Vec3 ExpDualBarrier::gradient(const Vec3& z) const {
  return neglog_gradient(exp_psi(z), 1.0) + neglog_gradient(linear_jet(Vec3(-1, 0, 0), z), 1.0) +
         neglog_gradient(linear_jet(Vec3(0, 0, 1), z), 1.0);
}

Mat3 ExpDualBarrier::hessian(const Vec3& z) const {
  return neglog_hessian(exp_psi(z), 1.0) + neglog_hessian(linear_jet(Vec3(-1, 0, 0), z), 1.0) +
         neglog_hessian(linear_jet(Vec3(0, 0, 1), z), 1.0);
}

Vec3 ExpDualBarrier::third_order(const Vec3& z, const Vec3& u, const Vec3& v) const {
  return neglog_third(exp_psi(z), 1.0, u, v) + neglog_third(linear_jet(Vec3(-1, 0, 0), z), 1.0, u, v) +
         neglog_third(linear_jet(Vec3(0, 0, 1), z), 1.0, u, v);
}

Vec3 ExpDualBarrier::unit_point() const { return {-1.051383945322714, 0.556409619469370, 1.258967884768947}; }

// ---------------------------------------------------------------------- power

double PowDualBarrier::value(const Vec3& z) const {
  return -std::log(pow_phi(z, alpha).h) - (1.0 - alpha) * std::log(z[0]) - alpha * std::log(z[1]);
}

Vec3 PowDualBarrier::gradient(const Vec3& z) const {
  return neglog_gradient(pow_phi(z, alpha), 1.0) + neglog_gradient(linear_jet(Vec3(1, 0, 0), z), 1.0 - alpha) +
         neglog_gradient(linear_jet(Vec3(0, 1, 0), z), alpha);
}

Mat3 PowDualBarrier::hessian(const Vec3& z) const {
  return neglog_hessian(pow_phi(z, alpha), 1.0) + neglog_hessian(linear_jet(Vec3(1, 0, 0), z), 1.0 - alpha) +
         neglog_hessian(linear_jet(Vec3(0, 1, 0), z), alpha);
}

Vec3 PowDualBarrier::third_order(const Vec3& z, const Vec3& u, const Vec3& v) const {
  return neglog_third(pow_phi(z, alpha), 1.0, u, v) + neglog_third(linear_jet(Vec3(1, 0, 0), z), 1.0 - alpha, u, v) +
         neglog_third(linear_jet(Vec3(0, 1, 0), z), alpha, u, v);
}

Vec3 PowDualBarrier::unit_point() const { return {std::sqrt(1.0 + alpha), std::sqrt(2.0 - alpha), 0.0}; }

// ------------------------------------------------------------------ conjugate

template <class Barrier>
ConjugateResult conjugate_gradient(const Barrier& f, const Vec3& s, const std::optional<Vec3>& hint) {
  ConjugateResult out;
  Vec3 z = (hint && f.in_domain(*hint)) ? *hint : f.unit_point();
  // Best multiple of the seed: minimize t⟨s,z⟩ - ν log t.
  const double sz = s.dot(z);
  if (sz > 0.0) z *= Barrier::degree / sz;

  for (int it = 0; it < kConjugateMaxIter; ++it) {
    out.iterations = it + 1;
    const Vec3 g = s + f.gradient(z);
    const Eigen::LLT<Mat3> llt(f.hessian(z));
    if (llt.info() != Eigen::Success) break;
    const Vec3 dz = -llt.solve(g);
    const double decrement = std::sqrt(std::max(0.0, -g.dot(dz)));
    if (!std::isfinite(decrement)) break;
    const double step = decrement > 0.25 ? 1.0 / (1.0 + decrement) : 1.0;
    Vec3 trial = z + step * dz;
    // Self-concordance keeps the damped step interior; guard against rounding.
    double shrink = 1.0;
    while (!f.in_domain(trial) && shrink > 1e-8) {
      shrink *= 0.5;
      trial = z + shrink * step * dz;
    }
    if (!f.in_domain(trial)) break;
    z = trial;
    if (decrement <= kConjugateTol) {
      out.converged = true;
      break;
    }
  }
  out.gradient = -z;
  return out;
}

template ConjugateResult conjugate_gradient<ExpDualBarrier>(const ExpDualBarrier&, const Vec3&,
                                                            const std::optional<Vec3>&);
template ConjugateResult conjugate_gradient<PowDualBarrier>(const PowDualBarrier&, const Vec3&,
                                                            const std::optional<Vec3>&);

}  // namespace conicip::barrier

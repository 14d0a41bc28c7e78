#pragma once

// Per-block barrier calculus for the three-dimensional nonsymmetric cones.
// The barriers are the dual-cone barriers f(z); primal-side quantities are
// reached through the conjugate f*.

#include <Eigen/Core>

#include <optional>

namespace conicip::barrier {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Interior test for the primal exponential cone {(x,y,z): y>0, y·exp(x/y) <= z} and its closure.
bool exp_primal_contains(const Vec3& s, bool strict);
/// Interior test for the dual exponential cone {(u,v,w): u<0, -u·exp(v/u) <= e·w} and its closure.
bool exp_dual_contains(const Vec3& z, bool strict);
bool pow_primal_contains(const Vec3& s, double alpha, bool strict);
bool pow_dual_contains(const Vec3& z, double alpha, bool strict);

/// f(z) = -log(z₂ - z₁ - z₁·log(z₃/(-z₁))) - log(-z₁) - log(z₃), degree 3.
struct ExpDualBarrier {
  [[nodiscard]] bool in_domain(const Vec3& z) const { return exp_dual_contains(z, true); }
  [[nodiscard]] bool in_primal(const Vec3& s) const { return exp_primal_contains(s, true); }
  [[nodiscard]] double value(const Vec3& z) const;
  [[nodiscard]] Vec3 gradient(const Vec3& z) const;
  [[nodiscard]] Mat3 hessian(const Vec3& z) const;
  /// ∇³f(z)[u, v], a vector.
  [[nodiscard]] Vec3 third_order(const Vec3& z, const Vec3& u, const Vec3& v) const;
  [[nodiscard]] Vec3 unit_point() const;
  static constexpr double degree = 3.0;
};

/// f(z) = -log((z₁/α)^{2α}(z₂/(1-α))^{2(1-α)} - z₃²) - (1-α)log z₁ - α log z₂, degree 3.
struct PowDualBarrier {
  double alpha;
  [[nodiscard]] bool in_domain(const Vec3& z) const { return pow_dual_contains(z, alpha, true); }
  [[nodiscard]] bool in_primal(const Vec3& s) const { return pow_primal_contains(s, alpha, true); }
  [[nodiscard]] double value(const Vec3& z) const;
  [[nodiscard]] Vec3 gradient(const Vec3& z) const;
  [[nodiscard]] Mat3 hessian(const Vec3& z) const;
  [[nodiscard]] Vec3 third_order(const Vec3& z, const Vec3& u, const Vec3& v) const;
  [[nodiscard]] Vec3 unit_point() const;
  static constexpr double degree = 3.0;
};

struct ConjugateResult {
  Vec3 gradient;  // ∇f*(s)
  int iterations = 0;
  bool converged = false;
};

inline constexpr double kConjugateTol = 1e-10;
inline constexpr int kConjugateMaxIter = 100;

/// ∇f*(s) for s in the primal interior, by damped Newton on
/// min_z ⟨s,z⟩ + f(z); the minimizer ẑ satisfies -∇f(ẑ) = s and ∇f*(s) = -ẑ.
/// `hint` (a dual interior point) seeds the iteration after an optimal rescaling.
template <class Barrier>
ConjugateResult conjugate_gradient(const Barrier& f, const Vec3& s, const std::optional<Vec3>& hint = std::nullopt);

extern template ConjugateResult conjugate_gradient<ExpDualBarrier>(const ExpDualBarrier&, const Vec3&,
                                                                   const std::optional<Vec3>&);
extern template ConjugateResult conjugate_gradient<PowDualBarrier>(const PowDualBarrier&, const Vec3&,
                                                                   const std::optional<Vec3>&);

}  // namespace conicip::barrier

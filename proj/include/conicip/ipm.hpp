#pragma once

// Building blocks of the homogeneous-embedding predictor-corrector loop.
//
// Variables v = (x, z, s, τ, κ) solve G(v) = 0 with s ∈ K, z ∈ K*, τ, κ ≥ 0:
//   G_x = -(Px + Aᵀz + qτ)
//   G_z = s + Ax - bτ
//   G_τ = κ + qᵀx + bᵀz + xᵀPx/τ

#include "conicip/cones.hpp"
#include "conicip/kkt.hpp"
#include "conicip/problem.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string_view>

namespace conicip {

enum class Status {
  Unsolved,
  Optimal,
  PrimalInfeasible,
  DualInfeasible,
  AlmostOptimal,
  MaxIterations,
  TimeLimit,
  NumericalError,
  InsufficientProgress,
};

std::string_view to_string(Status s);
/// Inverse of to_string; throws std::invalid_argument for unknown names.
Status status_from_string(std::string_view name);
bool is_solved(Status s);  // Optimal or an infeasibility certificate

struct IterateState {
  Vector x;
  Vector z;
  Vector s;
  double tau = 1.0;
  double kappa = 1.0;
  double mu = 1.0;
};

/// μ = (sᵀz + κτ)/(ν + 1).
double complementarity(const IterateState& v, int degree);

struct Residuals {
  Vector r_p;  // -Ax̄ - s̄ + b
  Vector r_d;  // Px̄ + Aᵀz̄ + q
  double g_p = 0.0;
  double g_d = 0.0;
  double r_p_norm = 0.0;
  double r_d_norm = 0.0;
  double x_norm = 0.0;  // of x̄, s̄, z̄
  double s_norm = 0.0;
  double z_norm = 0.0;
  double b_norm = 0.0;
  double q_norm = 0.0;
};

Residuals compute_residuals(const IterateState& v, const ProblemData& problem);

/// The three relative measures compared against ε by the optimality test;
/// the iterate is optimal when all are < ε.
struct OptimalityMeasures {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  [[nodiscard]] double worst() const;
};

OptimalityMeasures optimality_measures(const Residuals& r);
std::optional<Status> check_termination(const Residuals& r, double eps_feas);
std::optional<Status> check_infeasibility(const IterateState& v, const ProblemData& problem, double eps_inf);

struct Rhs {
  Vector dx;
  Vector dz;
  Vector ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

struct Direction {
  Vector dx;
  Vector dz;
  Vector ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

/// (G_x, G_z, G_τ) at the iterate.
Rhs residual_map(const IterateState& v, const ProblemData& problem);
/// d = (G, κτ, s).
Rhs affine_rhs(const IterateState& v, const ProblemData& problem);

/// Solution (Δx₂, Δz₂) of K·[Δx₂; Δz₂] = [-q; b], reused by both steps of an iteration.
struct ConstantColumn {
  Vector dx2;
  Vector dz2;
  RefineResult refine;
};

ConstantColumn solve_constant_column(const KktSystem& kkt, const ProblemData& problem);

struct DirectionInfo {
  RefineResult refine;
  double dtau_numerator = 0.0;
  double dtau_denominator = 0.0;
};

inline constexpr double kMinDenominator = 1e-14;

/// Solves the reduced system for d and recovers the full direction:
/// Δτ from the scalar equations, Δs = -d_s - HΔz, Δκ = -(d_κ + κΔτ)/τ.
/// Throws DegenerateDenominator when |Δτ denominator| < kMinDenominator.
Direction solve_directions(const KktSystem& kkt, const ConeSet& cones, const ScalingState& scaling,
                           const ProblemData& problem, const IterateState& v, const Rhs& d,
                           const ConstantColumn& column, DirectionInfo* info = nullptr);

/// σ = (1 - α)³.
double centering(double alpha_affine);

Rhs combined_rhs(const IterateState& v, const ProblemData& problem, const ConeSet& cones,
                 const ScalingState& scaling, const Direction& affine, double sigma);

/// v + scale·α·Δ with μ refreshed. Throws DomainError if the result left the interior.
IterateState take_step(const IterateState& v, const Direction& d, double alpha, const ConeSet& cones,
                       double step_scale = 0.99);

/// Raw affine step bound (0 when the cone search breaks down).
double affine_step_size(const IterateState& v, const Direction& d, const ConeSet& cones, double backtrack = 0.8);

/// Cone step bound, then backtracking until the scaled trial point lies in
/// the neighborhood N(β). Throws StepTooSmall.
double combined_step_size(const IterateState& v, const Direction& d, const ConeSet& cones, double beta,
                          double backtrack = 0.8, double step_scale = 0.99);

/// Neighborhood test on the whole iterate (every cone plus the τκ pair).
bool in_neighborhood(const IterateState& v, const ConeSet& cones, double beta);

}  // namespace conicip

#include "conicip/ipm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace conicip {

namespace {

constexpr std::array<std::pair<Status, std::string_view>, 9> kStatusNames{{
    {Status::Unsolved, "unsolved"},
    {Status::Optimal, "optimal"},
    {Status::PrimalInfeasible, "primal_infeasible"},
    {Status::DualInfeasible, "dual_infeasible"},
    {Status::AlmostOptimal, "almost_optimal"},
    {Status::MaxIterations, "max_iterations"},
    {Status::TimeLimit, "time_limit"},
    {Status::NumericalError, "numerical_error"},
    {Status::InsufficientProgress, "insufficient_progress"},
}};

double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

std::string_view to_string(Status s) {
  for (const auto& [status, name] : kStatusNames)
    if (status == s) return name;
  return "unknown";
}

Status status_from_string(std::string_view name) {
  for (const auto& [status, n] : kStatusNames)
    if (n == name) return status;
  throw std::invalid_argument("unknown status '" + std::string(name) + "'");
}

bool is_solved(Status s) {
  return s == Status::Optimal || s == Status::PrimalInfeasible || s == Status::DualInfeasible;
}

double complementarity(const IterateState& v, int degree) {
  return (v.s.dot(v.z) + v.kappa * v.tau) / (degree + 1.0);
}

Residuals compute_residuals(const IterateState& v, const ProblemData& problem) {
  Residuals r;
  const Vector x = v.x / v.tau;
  const Vector s = v.s / v.tau;
  const Vector z = v.z / v.tau;
  const Vector px = problem.P * x;
  r.r_p = problem.b - problem.A * x - s;
  r.r_d = px + problem.A.transpose_times(z) + problem.q;
  const double xpx = x.dot(px);
  r.g_p = 0.5 * xpx + problem.q.dot(x);
  r.g_d = -0.5 * xpx - problem.b.dot(z);
  r.r_p_norm = inf_norm(r.r_p);
  r.r_d_norm = inf_norm(r.r_d);
  r.x_norm = inf_norm(x);
  r.s_norm = inf_norm(s);
  r.z_norm = inf_norm(z);
  r.b_norm = inf_norm(problem.b);
  r.q_norm = inf_norm(problem.q);
  return r;
}

double OptimalityMeasures::worst() const { return std::max({primal, dual, gap}); }

OptimalityMeasures optimality_measures(const Residuals& r) {
  OptimalityMeasures m;
  m.primal = r.r_p_norm / std::max(1.0, r.b_norm + r.x_norm + r.s_norm);
  m.dual = r.r_d_norm / std::max(1.0, r.q_norm + r.x_norm + r.z_norm);
  m.gap = std::abs(r.g_p - r.g_d) / std::max(1.0, std::min(std::abs(r.g_p), std::abs(r.g_d)));
  if (!std::isfinite(m.primal)) m.primal = HUGE_VAL;
  if (!std::isfinite(m.dual)) m.dual = HUGE_VAL;
  if (!std::isfinite(m.gap)) m.gap = HUGE_VAL;
  return m;
}

std::optional<Status> check_termination(const Residuals& r, double eps_feas) {
  const OptimalityMeasures m = optimality_measures(r);
  if (m.primal < eps_feas && m.dual < eps_feas && m.gap < eps_feas) return Status::Optimal;
  return std::nullopt;
}

std::optional<Status> check_infeasibility(const IterateState& v, const ProblemData& problem, double eps_inf) {
  const double xn = inf_norm(v.x);
  const double zn = inf_norm(v.z);
  const double sn = inf_norm(v.s);
  const double bz = problem.b.dot(v.z);
  if (bz < -eps_inf) {
    const double atz = inf_norm(problem.A.transpose_times(v.z));
    if (atz < -eps_inf * std::max(1.0, xn + zn) * bz) return Status::PrimalInfeasible;
  }
  const double qx = problem.q.dot(v.x);
  if (qx < -eps_inf) {
    const double px = inf_norm(problem.P * v.x);
    const double axs = inf_norm(problem.A * v.x + v.s);
    if (px < -eps_inf * std::max(1.0, xn) * qx && axs < -eps_inf * std::max(1.0, xn + sn) * qx)
      return Status::DualInfeasible;
  }
  return std::nullopt;
}

Rhs residual_map(const IterateState& v, const ProblemData& problem) {
  Rhs d;
  const Vector px = problem.P * v.x;
  d.dx = -(px + problem.A.transpose_times(v.z) + problem.q * v.tau);
  d.dz = v.s + problem.A * v.x - problem.b * v.tau;
  d.dtau = v.kappa + problem.q.dot(v.x) + problem.b.dot(v.z) + v.x.dot(px) / v.tau;
  return d;
}

Rhs affine_rhs(const IterateState& v, const ProblemData& problem) {
  Rhs d = residual_map(v, problem);
  d.dkappa = v.kappa * v.tau;
  d.ds = v.s;
  return d;
}

ConstantColumn solve_constant_column(const KktSystem& kkt, const ProblemData& problem) {
  const int n = problem.n();
  const int m = problem.m();
  Vector rhs(n + m);
  rhs.head(n) = -problem.q;
  rhs.tail(m) = problem.b;
  Vector sol;
  ConstantColumn c;
  c.refine = kkt.solve(rhs, sol);
  c.dx2 = sol.head(n);
  c.dz2 = sol.tail(m);
  return c;
}

Direction solve_directions(const KktSystem& kkt, const ConeSet& cones, const ScalingState& scaling,
                           const ProblemData& problem, const IterateState& v, const Rhs& d,
                           const ConstantColumn& column, DirectionInfo* info) {
  const int n = problem.n();
  const int m = problem.m();
  Vector rhs(n + m);
  rhs.head(n) = d.dx;
  rhs.tail(m) = -(d.dz - d.ds);
  Vector sol;
  const RefineResult refine = kkt.solve(rhs, sol);
  const Vector dx1 = sol.head(n);
  const Vector dz1 = sol.tail(m);

  const Vector xi = v.x / v.tau;
  const Vector p_xi = problem.P * xi;
  const double numerator = d.dtau - d.dkappa / v.tau + (problem.q + 2.0 * p_xi).dot(dx1) + problem.b.dot(dz1);
  const Vector diff = column.dx2 - xi;
  const double denominator = v.kappa / v.tau + problem.P.quad_form(diff) - problem.P.quad_form(column.dx2) -
                             problem.q.dot(column.dx2) - problem.b.dot(column.dz2);
  if (info) {
    info->refine = refine;
    info->dtau_numerator = numerator;
    info->dtau_denominator = denominator;
  }
  if (!(std::abs(denominator) >= kMinDenominator))
    throw DegenerateDenominator("step-length denominator for tau is " + std::to_string(denominator));

  Direction out;
  out.dtau = numerator / denominator;
  out.dx = dx1 + out.dtau * column.dx2;
  out.dz = dz1 + out.dtau * column.dz2;
  out.ds = -d.ds - apply_H(cones, scaling, out.dz);
  out.dkappa = -(d.dkappa + v.kappa * out.dtau) / v.tau;
  return out;
}

double centering(double alpha_affine) {
  const double t = 1.0 - alpha_affine;
  return t * t * t;
}

Rhs combined_rhs(const IterateState& v, const ProblemData& problem, const ConeSet& cones,
                 const ScalingState& scaling, const Direction& affine, double sigma) {
  Rhs d = residual_map(v, problem);
  d.dx *= 1.0 - sigma;
  d.dz *= 1.0 - sigma;
  d.dtau *= 1.0 - sigma;
  d.dkappa = v.kappa * v.tau + affine.dkappa * affine.dtau - sigma * v.mu;
  d.ds = combined_ds(cones, scaling, v.s, v.z, affine.dz, affine.ds, sigma, v.mu);
  return d;
}

IterateState take_step(const IterateState& v, const Direction& d, double alpha, const ConeSet& cones,
                       double step_scale) {
  const double a = step_scale * alpha;
  IterateState out;
  out.x = v.x + a * d.dx;
  out.z = v.z + a * d.dz;
  out.s = v.s + a * d.ds;
  out.tau = v.tau + a * d.dtau;
  out.kappa = v.kappa + a * d.dkappa;
  if (!(out.tau > 0.0 && out.kappa > 0.0) || !is_in_cone(cones, out.s, true) || !is_in_dual_cone(cones, out.z, true))
    throw DomainError("iterate left the interior after a step of length " + std::to_string(a));
  out.mu = complementarity(out, cones.degree());
  return out;
}

double affine_step_size(const IterateState& v, const Direction& d, const ConeSet& cones, double backtrack) {
  StepLengthRequest req{&v.z, &v.s, v.tau, v.kappa, &d.dz, &d.ds, d.dtau, d.dkappa, 1.0, backtrack};
  try {
    return step_length(cones, req);
  } catch (const StepTooSmall&) {
    return 0.0;
  }
}

bool in_neighborhood(const IterateState& v, const ConeSet& cones, double beta) {
  const double bound = beta * v.mu;
  if (v.tau * v.kappa < bound) return false;
  return neighborhood_ok(cones, v.s, v.z, v.mu, beta);
}

double combined_step_size(const IterateState& v, const Direction& d, const ConeSet& cones, double beta,
                          double backtrack, double step_scale) {
  StepLengthRequest req{&v.z, &v.s, v.tau, v.kappa, &d.dz, &d.ds, d.dtau, d.dkappa, 1.0, backtrack};
  double alpha = step_length(cones, req);
  while (true) {
    bool ok = false;
    try {
      ok = in_neighborhood(take_step(v, d, alpha, cones, step_scale), cones, beta);
    } catch (const DomainError&) {
      ok = false;
    }
    if (ok) return alpha;
    alpha *= backtrack;
    if (alpha < kMinStepLength) throw StepTooSmall(alpha);
  }
}

}  // namespace conicip

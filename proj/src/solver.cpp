#include "conicip/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace conicip {

void SolverSettings::check() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(eps_feas > 0.0, "eps_feas must be positive");
  require(eps_inf > 0.0, "eps_inf must be positive");
  require(max_iter >= 0, "max_iter must be nonnegative");
  require(time_limit > 0.0, "time_limit must be positive");
  require(beta >= 0.0 && beta < 1.0, "beta must lie in [0, 1)");
  require(backtrack > 0.0 && backtrack < 1.0, "backtrack must lie in (0, 1)");
  require(step_scale > 0.0 && step_scale < 1.0, "step_scale must lie in (0, 1)");
  require(refinement.t_abs > 0.0 && refinement.t_rel > 0.0, "refinement tolerances must be positive");
  require(refinement.max_steps >= 1, "refinement needs at least one step");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Iterate mapped back to the unscaled (but still reordered) problem.
IterateState unscale_iterate(const IterateState& v, const Equilibration& e) {
  IterateState out = v;
  unscale_solution(out.x, out.z, out.s, e);
  return out;
}

Vector unpermute(const Vector& v, const std::vector<int>& perm) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[perm[i]] = v[i];
  return out;
}

// Tracks whether μ or the residuals still improve.
class ProgressGuard {
 public:
  static constexpr int kWindow = 5;
  static constexpr double kFactor = 0.99;

  bool stalled(double mu, double rp, double rd) {
    bool improved = false;
    if (mu < kFactor * best_mu_) improved = true;
    if (rp < kFactor * best_rp_) improved = true;
    if (rd < kFactor * best_rd_) improved = true;
    best_mu_ = std::min(best_mu_, mu);
    best_rp_ = std::min(best_rp_, rp);
    best_rd_ = std::min(best_rd_, rd);
    idle_ = improved ? 0 : idle_ + 1;
    return idle_ >= kWindow;
  }

 private:
  double best_mu_ = HUGE_VAL;
  double best_rp_ = HUGE_VAL;
  double best_rd_ = HUGE_VAL;
  int idle_ = 0;
};

}  // namespace

struct Solver::Impl {
  ProblemData original;
  SolverSettings settings;
  std::vector<int> row_perm;
  ProblemData reordered;
  ProblemData scaled;
  Equilibration equil;
  ConeSet cones;
  KktSystem kkt;
  double setup_seconds = 0.0;

  void prepare_values() {
    ReorderResult r = reorder_cones(original);
    row_perm = std::move(r.row_perm);
    reordered = std::move(r.problem);
    if (settings.equilibrate) {
      auto [p, e] = equilibrate(reordered);
      scaled = std::move(p);
      equil = std::move(e);
    } else {
      scaled = reordered;
      equil = Equilibration::identity(reordered.n(), reordered.m());
    }
  }

  SolveResult finish(Status status, const IterateState& v, const Residuals& res, int iterations) const;
  SolveResult run();
};

Solver::Solver(ProblemData problem, SolverSettings settings) : impl_(std::make_unique<Impl>()) {
  const auto t0 = Clock::now();
  settings.check();
  validate(problem);
  impl_->original = std::move(problem);
  impl_->settings = std::move(settings);
  impl_->prepare_values();
  impl_->cones = ConeSet(impl_->scaled.cones, impl_->settings.threads);
  KktSettings ks;
  ks.precision = impl_->settings.precision;
  ks.static_reg = impl_->settings.static_reg;
  ks.dynamic_reg = impl_->settings.dynamic_reg;
  ks.refinement = impl_->settings.refinement;
  impl_->kkt = KktSystem(impl_->scaled.P, impl_->scaled.A, impl_->cones, ks);
  impl_->kkt.symbolic_factor();
  impl_->setup_seconds = seconds_since(t0);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

int Solver::symbolic_factorizations() const { return impl_->kkt.symbolic_count(); }
const ProblemData& Solver::problem() const { return impl_->original; }
const SolverSettings& Solver::settings() const { return impl_->settings; }
SolverSettings& Solver::settings() { return impl_->settings; }

void Solver::update_data(const CsrMatrix* P, const CsrMatrix* A, const Vector* q, const Vector* b) {
  const auto t0 = Clock::now();
  ProblemData next = impl_->original;
  if (P) {
    if (!P->same_pattern(next.P)) throw PatternMismatch("P sparsity pattern differs from the original");
    next.P = *P;
  }
  if (A) {
    if (!A->same_pattern(next.A)) throw PatternMismatch("A sparsity pattern differs from the original");
    next.A = *A;
  }
  if (q) next.q = *q;
  if (b) next.b = *b;
  validate(next);
  impl_->original = std::move(next);
  impl_->prepare_values();
  impl_->kkt.update_values(&impl_->scaled.P, &impl_->scaled.A, {});
  impl_->setup_seconds = seconds_since(t0);
}

SolveResult Solver::solve() { return impl_->run(); }

SolveResult Solver::Impl::finish(Status status, const IterateState& v, const Residuals& res, int iterations) const {
  SolveResult out;
  out.status = status;
  out.iterations = iterations;
  out.tau = v.tau;
  out.kappa = v.kappa;
  out.primal_objective = res.g_p;
  out.dual_objective = res.g_d;
  out.r_p_norm = res.r_p_norm;
  out.r_d_norm = res.r_d_norm;
  out.measures = optimality_measures(res);
  out.factor_work = kkt.factorization().flops();
  out.symbolic_factorizations = kkt.symbolic_count();

  const IterateState u = unscale_iterate(v, equil);
  if (status == Status::PrimalInfeasible) {
    const double bz = std::abs(reordered.b.dot(u.z));
    out.z = unpermute(u.z / bz, row_perm);
    out.s = unpermute(u.s / bz, row_perm);
    out.x = u.x / bz;
    out.certificate = out.z;
    out.certificate_raw = unpermute(u.z, row_perm);
  } else if (status == Status::DualInfeasible) {
    const double qx = std::abs(reordered.q.dot(u.x));
    out.x = u.x / qx;
    out.s = unpermute(u.s / qx, row_perm);
    out.z = unpermute(u.z / qx, row_perm);
    out.certificate = out.x;
    out.certificate_raw = u.x;
  } else {
    out.x = u.x / u.tau;
    out.z = unpermute(u.z / u.tau, row_perm);
    out.s = unpermute(u.s / u.tau, row_perm);
  }
  return out;
}

SolveResult Solver::Impl::run() {
  const auto t0 = Clock::now();
  const SolverSettings& st = settings;
  const int nu = cones.degree();

  const InitialPoint init = unit_init(cones);
  IterateState v;
  v.x = Vector::Zero(scaled.n());
  v.s = init.s;
  v.z = init.z;
  v.tau = 1.0;
  v.kappa = 1.0;
  v.mu = complementarity(v, nu);

  IterateState best = v;
  Residuals best_res;
  double best_merit = HUGE_VAL;
  ProgressGuard guard;
  std::vector<double> h_values(cones.h_value_count());

  Status status = Status::Unsolved;
  Residuals res;
  std::string message;
  int iter = 0;

  if (st.verbose)
    std::fprintf(stderr, "%4s %12s %12s %10s %10s %10s %8s %8s\n", "iter", "pcost", "dcost", "pres", "dres", "mu",
                 "sigma", "alpha");

  double sigma = 0.0;
  double alpha = 0.0;
  for (;; ++iter) {
    const IterateState u = unscale_iterate(v, equil);
    res = compute_residuals(u, reordered);
    const OptimalityMeasures meas = optimality_measures(res);
    if (meas.worst() < best_merit) {
      best_merit = meas.worst();
      best = v;
      best_res = res;
    }
    if (st.verbose)
      std::fprintf(stderr, "%4d %12.4e %12.4e %10.3e %10.3e %10.3e %8.2e %8.2e\n", iter, res.g_p, res.g_d, meas.primal,
                   meas.dual, v.mu, sigma, alpha);

    if (check_termination(res, st.eps_feas)) {
      status = Status::Optimal;
      break;
    }
    if (auto inf = check_infeasibility(u, reordered, st.eps_inf)) {
      status = *inf;
      break;
    }
    if (iter >= st.max_iter) {
      status = Status::MaxIterations;
      break;
    }
    if (seconds_since(t0) + setup_seconds > st.time_limit) {
      status = Status::TimeLimit;
      break;
    }
    if (guard.stalled(v.mu, meas.primal, meas.dual)) {
      status = Status::InsufficientProgress;
      break;
    }

    try {
      const ScalingState scaling = update_scaling(cones, v.s, v.z, v.mu);
      fill_H_values(cones, scaling, h_values);
      kkt.update_values(nullptr, nullptr, h_values);
      kkt.numeric_factor();
      const ConstantColumn column = solve_constant_column(kkt, scaled);

      const Rhs d_aff = affine_rhs(v, scaled);
      const Direction aff = solve_directions(kkt, cones, scaling, scaled, v, d_aff, column);
      if (st.direction_observer) st.direction_observer({iter, true, &scaled, &cones, &scaling, &v, &d_aff, &aff});
      const double alpha_aff = affine_step_size(v, aff, cones, st.backtrack);
      sigma = centering(std::min(1.0, alpha_aff));

      const Rhs d_cmb = combined_rhs(v, scaled, cones, scaling, aff, sigma);
      const Direction cmb = solve_directions(kkt, cones, scaling, scaled, v, d_cmb, column);
      if (st.direction_observer) st.direction_observer({iter, false, &scaled, &cones, &scaling, &v, &d_cmb, &cmb});
      alpha = combined_step_size(v, cmb, cones, st.beta, st.backtrack, st.step_scale);
      v = take_step(v, cmb, alpha, cones, st.step_scale);
    } catch (const Error& e) {
      status = Status::NumericalError;
      message = e.what();
      break;
    }
  }

  SolveResult out;
  if (is_solved(status)) {
    out = finish(status, v, res, iter);
  } else {
    const bool almost = best_merit < 10.0 * st.eps_feas;
    out = finish(almost ? Status::AlmostOptimal : status, best, best_res, iter);
    if (almost) message = "stopped with " + std::string(to_string(status)) + (message.empty() ? "" : ": " + message);
  }
  out.message = message;
  out.setup_seconds = setup_seconds;
  out.solve_seconds = seconds_since(t0);
  if (st.verbose)
    std::fprintf(stderr, "status: %s  iterations: %d  setup %.3fs  solve %.3fs\n", std::string(to_string(out.status)).c_str(),
                 out.iterations, out.setup_seconds, out.solve_seconds);
  return out;
}

SolveResult solve(const ProblemData& problem, const SolverSettings& settings) {
  Solver solver(problem, settings);
  return solver.solve();
}

}  // namespace conicip

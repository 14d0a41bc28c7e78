// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include "conicip/barriers.hpp"
#include "conicip/bench.hpp"
#include "conicip/generators.hpp"
#include "conicip/solver.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>

using namespace conicip;

namespace {

// Tolerances.
constexpr double kAnalyticTol = 1e-6;
constexpr double kAnalyticEps = 1e-8;  // solver tolerance for the analytic checks
constexpr double kAnalyticSeconds = 5.0;
constexpr double kPortfolioTol = 1e-7;
constexpr double kKktLoose = 1e-6;
constexpr double kKktTight = 1e-8;
constexpr int kSeedsPerFamily = 50;
constexpr int kTightSolvesRequired = 48;
constexpr double kDirectionTol = 1e-8;
constexpr double kBruteForceTol = 1e-9;  // distance floor for well-conditioned steps
constexpr double kCertificateTol = 1e-7;
constexpr int kCertificateIterations = 50;
constexpr double kGradTol = 1e-6;
constexpr double kHessTol = 1e-5;
constexpr double kThirdTol = 1e-4;
constexpr int kCalculusPoints = 100;
constexpr double kNtTol = 1e-10;
constexpr double kBfgsTol = 1e-8;
constexpr int kScalingPairs = 100;
constexpr double kMixedIterFactor = 1.5;
constexpr int kMixedSeeds = 20;
constexpr int kMixedFailuresAllowed = 2;
constexpr int kParametricRuns = 50;
constexpr double kParametricTol = 1e-9;
constexpr int kSocCones = 10000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

Vector cat(std::initializer_list<Vector> parts) {
  Eigen::Index n = 0;
  for (const Vector& p : parts) n += p.size();
  Vector out(n);
  n = 0;
  for (const Vector& p : parts) {
    out.segment(n, p.size()) = p;
    n += p.size();
  }
  return out;
}

// ------------------------------------------------------------ small problems

ProblemData lp(const Eigen::MatrixXd& A, const Vector& q, const Vector& b) {
  ProblemData p;
  p.P = CsrMatrix(static_cast<int>(A.cols()), static_cast<int>(A.cols()));
  p.A = CsrMatrix::from_dense(A);
  p.q = q;
  p.b = b;
  p.cones = {ConeSpec::nonneg(static_cast<int>(A.rows()))};
  return p;
}

// x ≥ 0 and x ≤ -1.
ProblemData primal_infeasible_lp() {
  Eigen::MatrixXd A(2, 1);
  A << -1, 1;
  return lp(A, Vector::Ones(1), Eigen::Vector2d(0, -1));
}

// min -x - y over x, y ≥ 0, x - y ≤ 1.
ProblemData dual_infeasible_lp() {
  Eigen::MatrixXd A(3, 2);
  A << -1, 0, 0, -1, 1, -1;
  return lp(A, -Vector::Ones(2), Eigen::Vector3d(0, 0, 1));
}

// max z s.t. x + y = 2, (x, y, z) ∈ K_pow(0.5): optimum z = 1.
ProblemData power_problem() {
  ProblemData p;
  p.P = CsrMatrix(3, 3);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 3);
  A.row(0) << 1, 1, 0;
  A.bottomRows(3) = -Eigen::Matrix3d::Identity();
  p.A = CsrMatrix::from_dense(A);
  p.q = Eigen::Vector3d(0, 0, -1);
  p.b = Vector::Zero(4);
  p.b[0] = 2.0;
  p.cones = {ConeSpec::zero(1), ConeSpec::pow(0.5)};
  return p;
}

// min ⟨C, X⟩ s.t. tr X = 1, X ⪰ 0 on 3×3 svec variables: smallest eigenvalue of C.
ProblemData psd_problem() {
  const int d = 6;
  ProblemData p;
  p.P = CsrMatrix(d, d);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1 + d, d);
  // svec order (0,0), (1,0), (2,0), (1,1), (2,1), (2,2); diagonal entries at 0, 3, 5.
  A(0, 0) = A(0, 3) = A(0, 5) = 1.0;
  A.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
  p.A = CsrMatrix::from_dense(A);
  const double r2 = std::sqrt(2.0);
  p.q = Vector(d);
  p.q << 2.0, r2 * 0.5, r2 * 0.1, 1.0, r2 * -0.3, 3.0;
  p.b = Vector::Zero(1 + d);
  p.b[0] = 1.0;
  p.cones = {ConeSpec::zero(1), ConeSpec::psd(3)};
  return p;
}

// ---------------------------------------------------------------- criteria

Outcome analytic_entropy() {
  double worst = 0.0, slowest = 0.0;
  bool ok = true;
  for (int n : {4, 16, 64}) {
    EntropyData d = entropy_data(n, static_cast<std::uint64_t>(n));
    d.with_inequalities = false;
    const auto t0 = std::chrono::steady_clock::now();
    SolverSettings s;
    s.eps_feas = kAnalyticEps;
    const SolveResult r = solve(entropy_problem(d), s);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    slowest = std::max(slowest, secs);
    if (r.status != Status::Optimal) {
      ok = false;
      continue;
    }
    const double obj_err = std::abs(-r.primal_objective - std::log(static_cast<double>(n)));
    const double x_err = (r.x.head(n).array() - 1.0 / n).abs().maxCoeff();
    worst = std::max({worst, obj_err, x_err});
    ok = ok && secs < kAnalyticSeconds;
  }
  ok = ok && worst <= kAnalyticTol;
  return {ok, fmt("n in {4,16,64}: max error %.2e, slowest %.3f s", worst, slowest)};
}

Outcome symmetric_portfolio() {
  PortfolioData d;
  d.F = Eigen::MatrixXd::Zero(2, 1);
  d.D = Vector::Ones(2);
  d.mu = Vector::Zero(2);
  d.gamma = 1.0;
  SolverSettings s;
  s.eps_feas = 1e-9;
  const SolveResult r = solve(portfolio_problem(d), s);
  const double err = (r.x.head(2).array() - 0.5).abs().maxCoeff();
  return {r.status == Status::Optimal && err <= kPortfolioTol,
          fmt("status %s, x = (%.10f, %.10f)", std::string(to_string(r.status)).c_str(), r.x[0], r.x[1])};
}

GenSpec contract_instance(Family f, int seed) {
  switch (f) {
    case Family::Portfolio: return {f, 10 + (7 * seed) % 91, 2, 1, static_cast<std::uint64_t>(seed)};
    case Family::Huber: return {f, 5 + (11 * seed) % 96, 2, 1, static_cast<std::uint64_t>(seed)};
    case Family::Entropy: return {f, 4 + (5 * seed) % 61, 2, 1, static_cast<std::uint64_t>(seed)};
    case Family::Multistage: return {f, 5 + seed % 16, 1 + seed % 4, 1 + seed % 3, static_cast<std::uint64_t>(seed)};
  }
  return {};
}

Outcome kkt_contract() {
  std::string detail;
  bool ok = true;
  for (Family f : {Family::Portfolio, Family::Huber, Family::Entropy, Family::Multistage}) {
    int loose = 0, tight = 0;
    for (int seed = 0; seed < kSeedsPerFamily; ++seed) {
      const ProblemData p = generate(contract_instance(f, seed));
      SolverSettings s;
      s.eps_feas = kKktLoose;
      const SolveResult r = solve(p, s);
      if (r.status == Status::Optimal && oracle::kkt_report(p, r.x, r.s, r.z).ok(kKktLoose)) ++loose;
      s.eps_feas = kKktTight;
      const SolveResult rt = solve(p, s);
      if (rt.status == Status::Optimal && oracle::kkt_report(p, rt.x, rt.s, rt.z).ok(kKktTight)) ++tight;
    }
    ok = ok && loose == kSeedsPerFamily && tight >= kTightSolvesRequired;
    detail += fmt("%s %d/%d@1e-6 %d/%d@1e-8; ", std::string(to_string(f)).c_str(), loose, kSeedsPerFamily, tight,
                  kSeedsPerFamily);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome direction_oracle() {
  const std::vector<ProblemData> problems{
      gen_portfolio(8, 1.0, 0),           gen_portfolio(8, 1.0, 1),   gen_huber(6, 0),
      gen_huber(6, 1),                    gen_entropy(5, 0),          gen_entropy(5, 1),
      gen_multistage_portfolio(5, 2, 2, 0), power_problem(),          psd_problem(),
      primal_infeasible_lp()};
  double worst_res = 0.0, worst_dist = 0.0, worst_ratio = 0.0;
  int events = 0;
  bool solved = true;
  for (const ProblemData& p : problems) {
    SolverSettings s;
    s.direction_observer = [&](const DirectionEvent& e) {
      const Eigen::MatrixXd H = oracle::dense_H(*e.cones, *e.scaling);
      const double scale = 1.0 + oracle::rhs_norm(*e.rhs);
      const double res = oracle::linearization_residual(*e.problem, H, *e.state, *e.rhs, *e.direction);
      worst_res = std::max(worst_res, res / scale);
      // The dense solve is compared up to what the conditioning of the
      // unreduced system allows for two solutions with these residuals.
      const Direction bf = oracle::solve_linearization(*e.problem, H, *e.state, *e.rhs);
      const double bf_res = oracle::linearization_residual(*e.problem, H, *e.state, *e.rhs, bf);
      const double dist = oracle::direction_distance(*e.direction, bf);
      const double allowed = std::max(oracle::linearization_forward_bound(*e.problem, H, *e.state, *e.rhs, res + bf_res),
                                      kBruteForceTol * scale);
      worst_dist = std::max(worst_dist, dist / scale);
      worst_ratio = std::max(worst_ratio, dist / allowed);
      ++events;
    };
    solved = solved && is_solved(solve(p, s).status);
  }
  return {solved && worst_res <= kDirectionTol && worst_ratio <= 1.0,
          fmt("%d directions: max scaled residual %.2e, max scaled distance to dense solve %.2e (%.2f of the "
              "conditioning bound)",
              events, worst_res, worst_dist, worst_ratio)};
}

Outcome certificates() {
  const ProblemData pi = primal_infeasible_lp(), di = dual_infeasible_lp();
  const SolveResult rp = solve(pi), rd = solve(di);
  const bool ok_p = rp.status == Status::PrimalInfeasible && rp.iterations <= kCertificateIterations &&
                    oracle::primal_certificate_ok(pi, rp.certificate, kCertificateTol);
  const bool ok_d = rd.status == Status::DualInfeasible && rd.iterations <= kCertificateIterations &&
                    oracle::dual_certificate_ok(di, rd.certificate, kCertificateTol);
  return {ok_p && ok_d, fmt("primal: %s in %d it, dual: %s in %d it", std::string(to_string(rp.status)).c_str(),
                            rp.iterations, std::string(to_string(rd.status)).c_str(), rd.iterations)};
}

struct CalculusErrors {
  double grad = 0.0, hess = 0.0, third = 0.0;
  void merge(const CalculusErrors& o) {
    grad = std::max(grad, o.grad);
    hess = std::max(hess, o.hess);
    third = std::max(third, o.third);
  }
};

template <class B>
CalculusErrors nonsymmetric_calculus(const B& f, const barrier::Vec3& z, oracle::Rng& r) {
  const double h = 1e-6 * std::max(1.0, z.norm());
  const barrier::Vec3 u(r.normal(), r.normal(), r.normal()), v(r.normal(), r.normal(), r.normal());
  CalculusErrors e;
  e.grad = oracle::rel_error(f.gradient(z), oracle::fd_gradient([&](const Vector& y) { return f.value(y); }, z, h));
  e.hess = oracle::rel_error(
      f.hessian(z), oracle::fd_jacobian([&](const Vector& y) { return Vector(f.gradient(y)); }, z, h));
  const barrier::Vec3 t_fd = (f.hessian(z + h * v) - f.hessian(z - h * v)) * u / (2.0 * h);
  e.third = oracle::rel_error(f.third_order(z, u, v), t_fd);
  return e;
}

// Symmetric cones: the barrier Hessian is read off the NT scaling at a
// central pair, H = μ∇²f(z) when s = -μ∇f(z).
CalculusErrors symmetric_calculus(const ConeSet& c, const Vector& z, oracle::Rng& r) {
  const double h = 1e-6 * std::max(1.0, z.norm());
  CalculusErrors e;
  e.grad = oracle::rel_error(barrier_gradient(c, z),
                             oracle::fd_gradient([&](const Vector& y) { return barrier_value(c, y); }, z, h));
  const double mu = r.uniform(0.1, 5.0);
  const Vector s = -mu * barrier_gradient(c, z);
  const Eigen::MatrixXd hess = oracle::dense_H(c, update_scaling(c, s, z, mu)) / mu;
  e.hess = oracle::rel_error(hess, oracle::fd_jacobian([&](const Vector& y) { return barrier_gradient(c, y); }, z, h));
  return e;
}

Outcome barrier_calculus() {
  oracle::Rng r(606);
  CalculusErrors exp_e, pow_e, sym_e;
  const ConeSet nn({ConeSpec::nonneg(5)}), soc({ConeSpec::soc(5)}), psd({ConeSpec::psd(3)});
  for (int i = 0; i < kCalculusPoints; ++i) {
    exp_e.merge(nonsymmetric_calculus(barrier::ExpDualBarrier{}, oracle::random_exp_dual(r), r));
    const double alpha = r.uniform(0.1, 0.9);
    pow_e.merge(nonsymmetric_calculus(barrier::PowDualBarrier{alpha}, oracle::random_pow_dual(r, alpha), r));
    sym_e.merge(symmetric_calculus(nn, oracle::random_nonneg(r, 5), r));
    sym_e.merge(symmetric_calculus(soc, oracle::random_soc(r, 5), r));
    sym_e.merge(symmetric_calculus(psd, oracle::random_psd(r, 3), r));
  }
  auto good = [](const CalculusErrors& e) { return e.grad <= kGradTol && e.hess <= kHessTol && e.third <= kThirdTol; };
  return {good(exp_e) && good(pow_e) && good(sym_e),
          fmt("exp %.1e/%.1e/%.1e, pow %.1e/%.1e/%.1e, symmetric %.1e/%.1e", exp_e.grad, exp_e.hess, exp_e.third,
              pow_e.grad, pow_e.hess, pow_e.third, sym_e.grad, sym_e.hess)};
}

Outcome scaling_identities() {
  oracle::Rng r(707);
  double nt = 0.0, bfgs = 0.0;
  int fallbacks = 0;
  const ConeSet sym({ConeSpec::nonneg(4), ConeSpec::soc(5), ConeSpec::psd(3)});
  for (int i = 0; i < kScalingPairs; ++i) {
    const Vector s = cat({oracle::random_nonneg(r, 4), oracle::random_soc(r, 5), oracle::random_psd(r, 3)});
    const Vector z = cat({oracle::random_nonneg(r, 4), oracle::random_soc(r, 5), oracle::random_psd(r, 3)});
    const ScalingState st = update_scaling(sym, s, z, s.dot(z) / sym.degree());
    nt = std::max(nt, rel(apply_H(sym, st, z), s));
  }
  for (int i = 0; i < kScalingPairs; ++i) {
    const double alpha = r.uniform(0.1, 0.9);
    const ConeSet c({ConeSpec::exp(), ConeSpec::pow(alpha)});
    const Vector s = cat({Vector(oracle::random_exp_primal(r)), Vector(oracle::random_pow_primal(r, alpha))});
    const Vector z = cat({Vector(oracle::random_exp_dual(r)), Vector(oracle::random_pow_dual(r, alpha))});
    const ScalingState st = update_scaling(c, s, z, s.dot(z) / c.degree());
    fallbacks += (st.exp_bfgs[0] ? 0 : 1) + (st.pow_bfgs[0] ? 0 : 1);
    const ShadowIterates sh = shadow_iterates(c, s, z);
    bfgs = std::max({bfgs, rel(apply_H(c, st, z), s), rel(apply_H(c, st, sh.z_shadow), sh.s_shadow)});
  }
  return {nt <= kNtTol && bfgs <= kBfgsTol && fallbacks == 0,
          fmt("NT max %.2e, BFGS max %.2e, dual-scaling fallbacks %d", nt, bfgs, fallbacks)};
}

Outcome mixed_precision() {
  bool ok = true;
  std::string detail;
  for (Family f : {Family::Portfolio, Family::Huber}) {
    int solved = 0, failures = 0, dirty = 0;
    double worst_ratio = 0.0;
    for (int seed = 0; seed < kMixedSeeds; ++seed) {
      const ProblemData p = generate({f, 10 + 4 * seed, 2, 1, static_cast<std::uint64_t>(seed)});
      SolverSettings full;
      full.eps_feas = kKktTight;
      SolverSettings mixed = full;
      mixed.precision = Precision::Mixed;
      const SolveResult rf = solve(p, full), rm = solve(p, mixed);
      if (rm.status == Status::Optimal) {
        if (!oracle::kkt_report(p, rm.x, rm.s, rm.z).ok(kKktTight)) {
          ++dirty;  // claimed optimal but inaccurate
          continue;
        }
        ++solved;
        if (rf.status == Status::Optimal)
          worst_ratio = std::max(worst_ratio, static_cast<double>(rm.iterations) / rf.iterations);
      } else if (rm.status == Status::PrimalInfeasible || rm.status == Status::DualInfeasible) {
        ++dirty;
      } else {
        ++failures;
      }
    }
    ok = ok && dirty == 0 && failures <= kMixedFailuresAllowed && worst_ratio <= kMixedIterFactor;
    detail += fmt("%s %d/%d solved, %d clean failures, %d wrong, iteration ratio %.2f; ",
                  std::string(to_string(f)).c_str(), solved, kMixedSeeds, failures, dirty, worst_ratio);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome parametric_reuse() {
  const ProblemData base = gen_portfolio(30, 1.0, 11);
  Solver solver(base);
  oracle::Rng r(909);
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < kParametricRuns; ++k) {
    Vector q = base.q, b = base.b;
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += 0.05 * r.normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += 0.01 * r.normal();
    solver.update_data(nullptr, nullptr, &q, &b);
    const SolveResult a = solver.solve();
    ProblemData fresh = base;
    fresh.q = q;
    fresh.b = b;
    const SolveResult f = solve(fresh);
    ok = ok && a.status == Status::Optimal && f.status == Status::Optimal;
    worst = std::max(worst, (a.x - f.x).lpNorm<Eigen::Infinity>());
  }
  const int count = solver.symbolic_factorizations();
  return {ok && worst <= kParametricTol && count == 1,
          fmt("%d re-solves, max |x - x_fresh| %.2e, symbolic factorizations %d", kParametricRuns, worst, count)};
}

BenchRecord rec(const std::string& p, const std::string& c, double t) {
  BenchRecord r;
  r.problem = p;
  r.config = c;
  r.status = Status::Optimal;
  r.metric_time = r.total_time = r.solve_time = t;
  return r;
}

Outcome metrics() {
  bool ok = shifted_geomean(std::vector<double>{1, 1}) == 1.0 && shifted_geomean(std::vector<double>{0}) == 0.0 &&
            shifted_geomean(std::vector<double>{3, 8}) == 5.0;
  const Metrics one = compute_metrics(std::vector<BenchRecord>{rec("p1", "a", 0.2), rec("p2", "a", 4.0)});
  ok = ok && relative_profile(one, 0, 1.0) == 1.0;
  const Metrics two = compute_metrics(std::vector<BenchRecord>{rec("p", "a", 1.0), rec("p", "b", 2.0)}, 0.0);
  ok = ok && two.ratios(0, 0) == 1.0 && two.ratios(0, 1) == 2.0 && relative_profile(two, 0, 1.0) == 1.0 &&
       relative_profile(two, 1, 1.0) == 0.0;
  const bool examples = ok;

  BenchSuite suite;
  const std::vector<Family> fams{Family::Portfolio, Family::Huber, Family::Entropy, Family::Multistage};
  const std::vector<int> sizes{6, 10};
  const std::vector<std::uint64_t> seeds{0, 1};
  suite.problems = suite_problems(fams, sizes, seeds, 2, 2);
  suite.configs = {parse_config("full"), parse_config("mixed")};
  suite.clock = ClockKind::Work;
  std::string first;
  bool identical = true;
  for (int jobs : {1, 1, 4}) {
    suite.jobs = jobs;
    std::ostringstream out;
    write_csv(out, run_bench(suite));
    if (first.empty()) first = out.str();
    identical = identical && out.str() == first;
  }
  return {examples && identical, fmt("unit examples %s, CSV of %zu runs identical across 3 runs: %s",
                                     examples ? "exact" : "wrong", suite.problems.size() * suite.configs.size(),
                                     identical ? "yes" : "no")};
}

Outcome soc_batch() {
  oracle::Rng r(1111);
  std::vector<ConeSpec> specs;
  int m = 0;
  for (int i = 0; i < kSocCones; ++i) {
    specs.push_back(ConeSpec::soc(r.integer(2, 2048)));
    m += specs.back().dim;
  }
  const ConeSet cones(specs);
  Vector x(m);
  for (Eigen::Index i = 0; i < m; ++i) x[i] = r.normal();
  const Vector batch = soc_residuals_batch(cones, x);
  int mismatches = 0;
  int offset = 0;
  for (int i = 0; i < kSocCones; ++i) {
    const int d = specs[i].dim;
    const std::vector<double> u(x.data() + offset + 1, x.data() + offset + d);
    const double t = x[offset];
    const double expect = t * t - oracle::sequential_tree_norm2(u);
    if (std::memcmp(&expect, &batch[i], sizeof(double)) != 0) ++mismatches;
    offset += d;
  }
  return {mismatches == 0, fmt("%d cones, %d entries, %d bitwise mismatches", kSocCones, m, mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"analytic entropy optima", analytic_entropy},
      {"symmetric portfolio", symmetric_portfolio},
      {"KKT residual contract", kkt_contract},
      {"direction residual oracle", direction_oracle},
      {"infeasibility certificates", certificates},
      {"barrier calculus", barrier_calculus},
      {"scaling identities", scaling_identities},
      {"mixed precision parity", mixed_precision},
      {"parametric reuse", parametric_reuse},
      {"metrics and reproducible CSV", metrics},
      {"batched SOC residuals", soc_batch},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

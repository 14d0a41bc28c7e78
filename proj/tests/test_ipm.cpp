#include "conicip/generators.hpp"
#include "conicip/ipm.hpp"
#include "conicip/solver.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace conicip;

namespace {

ProblemData make(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Vector& q, const Vector& b,
                 std::vector<ConeSpec> cones) {
  ProblemData p;
  p.P = CsrMatrix::from_dense(P);
  p.A = CsrMatrix::from_dense(A);
  p.q = q;
  p.b = b;
  p.cones = std::move(cones);
  validate(p);
  return p;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Random QP over Nonneg and SOC rows with a strictly interior random iterate.
struct Instance {
  ProblemData p;
  ConeSet cones;
  IterateState v;
  ScalingState scaling;
  KktSystem kkt;
  ConstantColumn column;

  Instance(std::uint64_t seed, int n, double tau = 1.3) {
    oracle::Rng r(seed);
    Eigen::MatrixXd G(n, n), A(6, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = r.normal();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = r.normal();
    Vector q(n), b(6);
    for (int i = 0; i < n; ++i) q[i] = r.normal();
    for (int i = 0; i < 6; ++i) b[i] = r.normal();
    p = make(G * G.transpose() / n, A, q, b, {ConeSpec::zero(1), ConeSpec::nonneg(2), ConeSpec::soc(3)});
    cones = ConeSet(p.cones);
    v.x = Vector(n);
    for (int i = 0; i < n; ++i) v.x[i] = r.normal();
    v.s = Vector::Zero(6);
    v.z = Vector::Zero(6);
    v.z[0] = r.normal();
    v.s.segment(1, 2) = oracle::random_nonneg(r, 2);
    v.z.segment(1, 2) = oracle::random_nonneg(r, 2);
    v.s.segment(3, 3) = oracle::random_soc(r, 3);
    v.z.segment(3, 3) = oracle::random_soc(r, 3);
    v.tau = tau;
    v.kappa = r.uniform(0.2, 2.0);
    v.mu = complementarity(v, cones.degree());
    scaling = update_scaling(cones, v.s, v.z, v.mu);
    kkt = KktSystem(p.P, p.A, cones);
    kkt.symbolic_factor();
    std::vector<double> h(cones.h_value_count());
    fill_H_values(cones, scaling, h);
    kkt.update_values(nullptr, nullptr, h);
    kkt.numeric_factor();
    column = solve_constant_column(kkt, p);
  }
};

}  // namespace

TEST(Residuals, FeasiblePointHasZeroResiduals) {
  oracle::Rng r(41);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Random(3, 2);
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
  const Vector x = Vector::Random(2), s = oracle::random_nonneg(r, 3), z = oracle::random_nonneg(r, 3);
  const ProblemData p = make(P, A, -(P * x + A.transpose() * z), A * x + s, {ConeSpec::nonneg(3)});
  IterateState v{2.0 * x, 2.0 * z, 2.0 * s, 2.0, 1.0, 1.0};
  const Residuals res = compute_residuals(v, p);
  EXPECT_LE(res.r_p.lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_LE(res.r_d.lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Residuals, ZeroDataGivesZeroObjectives) {
  const ProblemData p = make(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(1, 2), Vector::Zero(2), Vector::Zero(1),
                             {ConeSpec::nonneg(1)});
  IterateState v{vec({1, 2}), vec({3}), vec({4}), 1.0, 1.0, 1.0};
  const Residuals res = compute_residuals(v, p);
  EXPECT_EQ(res.g_p, 0.0);
  EXPECT_EQ(res.g_d, 0.0);
}

TEST(Residuals, MatchDenseOracle) {
  Instance st(42, 4);
  const Residuals res = compute_residuals(st.v, st.p);
  const Eigen::MatrixXd P = oracle::dense(st.p.P), A = oracle::dense(st.p.A);
  const Vector x = st.v.x / st.v.tau, s = st.v.s / st.v.tau, z = st.v.z / st.v.tau;
  EXPECT_LE((res.r_p - (-A * x - s + st.p.b)).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LE((res.r_d - (P * x + A.transpose() * z + st.p.q)).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_NEAR(res.g_p, 0.5 * x.dot(P * x) + st.p.q.dot(x), 1e-14);
  EXPECT_NEAR(res.g_d, -0.5 * x.dot(P * x) - st.p.b.dot(z), 1e-14);
}

TEST(Termination, Examples) {
  Residuals r;
  EXPECT_EQ(check_termination(r, 1e-12), Status::Optimal);
  r.r_p_norm = 0.9e-6;
  EXPECT_EQ(check_termination(r, 1e-6), Status::Optimal);
  r.r_p_norm = 0.0;
  r.g_p = 1e6 + 0.5;
  r.g_d = 1e6;
  EXPECT_EQ(check_termination(r, 1e-6), Status::Optimal);
  r.g_p = 11.0;
  r.g_d = 10.0;
  EXPECT_FALSE(check_termination(r, 1e-6).has_value());
}

TEST(Infeasibility, SignAndOrthogonality) {
  // Aᵀz = 0 with bᵀz = -1.
  const ProblemData p = make(Eigen::MatrixXd::Zero(1, 1), vec({-1, 1}), Vector::Zero(1), vec({0, -1}),
                             {ConeSpec::nonneg(2)});
  IterateState v{Vector::Zero(1), vec({1, 1}), vec({1, 1}), 1.0, 1.0, 1.0};
  EXPECT_EQ(check_infeasibility(v, p, 1e-8), Status::PrimalInfeasible);
  v.z = vec({-1, -1});
  EXPECT_FALSE(check_infeasibility(v, p, 1e-8).has_value());
}

TEST(AffineRhs, ZeroDataAndHomogeneity) {
  const ProblemData p = make(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 2), Vector::Zero(2), Vector::Zero(2),
                             {ConeSpec::nonneg(2)});
  IterateState v{Vector::Zero(2), Vector::Zero(2), vec({1, 2}), 1.5, 2.0, 1.0};
  const Rhs d = affine_rhs(v, p);
  EXPECT_EQ(d.dx, Vector::Zero(2));
  EXPECT_EQ(d.dz, vec({1, 2}));  // s + Ax - bτ with x = 0, b = 0
  EXPECT_EQ(d.dkappa, 3.0);
  EXPECT_EQ(d.ds, v.s);

  Instance st(43, 3);
  st.p.P = CsrMatrix(3, 3);
  const Rhs g1 = residual_map(st.v, st.p);
  IterateState twice{2 * st.v.x, 2 * st.v.z, 2 * st.v.s, 2 * st.v.tau, 2 * st.v.kappa, 1.0};
  const Rhs g2 = residual_map(twice, st.p);
  EXPECT_LE((g2.dx - 2 * g1.dx).norm(), 1e-13);
  EXPECT_LE((g2.dz - 2 * g1.dz).norm(), 1e-13);
  EXPECT_NEAR(g2.dtau, 2 * g1.dtau, 1e-13);
}

TEST(Directions, ZeroRhsGivesZeroDirection) {
  Instance st(44, 3);
  Rhs d{Vector::Zero(3), Vector::Zero(6), Vector::Zero(6), 0.0, 0.0};
  const Direction dir = solve_directions(st.kkt, st.cones, st.scaling, st.p, st.v, d, st.column);
  EXPECT_EQ(dir.dtau, 0.0);
  EXPECT_LE(dir.dx.norm() + dir.dz.norm() + dir.ds.norm(), 1e-14);
  EXPECT_EQ(dir.dkappa, 0.0);
}

TEST(Directions, MatchBruteForceLinearization) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance st(100 + seed, 4, 0.7 + 0.2 * static_cast<double>(seed));
    const Eigen::MatrixXd H = oracle::dense_H(st.cones, st.scaling);
    const Rhs aff = affine_rhs(st.v, st.p);
    const Direction d_aff = solve_directions(st.kkt, st.cones, st.scaling, st.p, st.v, aff, st.column);
    const double scale = 1.0 + oracle::rhs_norm(aff);
    EXPECT_LE(oracle::linearization_residual(st.p, H, st.v, aff, d_aff), 1e-8 * scale);
    EXPECT_LE(oracle::direction_distance(d_aff, oracle::solve_linearization(st.p, H, st.v, aff)), 1e-7 * scale);

    const Rhs cmb = combined_rhs(st.v, st.p, st.cones, st.scaling, d_aff, 0.3);
    const Direction d_cmb = solve_directions(st.kkt, st.cones, st.scaling, st.p, st.v, cmb, st.column);
    EXPECT_LE(oracle::linearization_residual(st.p, H, st.v, cmb, d_cmb), 1e-8 * (1.0 + oracle::rhs_norm(cmb)));
    // Scalar rows hold to rounding.
    EXPECT_LE((H * d_cmb.dz + d_cmb.ds + cmb.ds).lpNorm<Eigen::Infinity>(), 1e-10 * (1.0 + oracle::rhs_norm(cmb)));
    EXPECT_LE(std::abs(st.v.kappa * d_cmb.dtau + st.v.tau * d_cmb.dkappa + cmb.dkappa), 1e-12 * (1.0 + std::abs(cmb.dkappa)));
  }
}

TEST(Directions, ScalarHandInstance) {
  // n = m = 1: min x²/2 + x s.t. x ≤ 2.
  const ProblemData p = make(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), vec({1}), vec({2}),
                             {ConeSpec::nonneg(1)});
  const ConeSet cones(p.cones);
  IterateState v{vec({0.3}), vec({0.8}), vec({1.5}), 1.1, 0.6, 1.0};
  v.mu = complementarity(v, 1);
  const ScalingState sc = update_scaling(cones, v.s, v.z, v.mu);
  KktSystem kkt(p.P, p.A, cones);
  std::vector<double> h(1);
  fill_H_values(cones, sc, h);
  kkt.update_values(nullptr, nullptr, h);
  kkt.numeric_factor();
  const ConstantColumn col = solve_constant_column(kkt, p);
  const Rhs d = affine_rhs(v, p);
  const Direction got = solve_directions(kkt, cones, sc, p, v, d, col);
  const Direction ref = oracle::solve_linearization(p, oracle::dense_H(cones, sc), v, d);
  EXPECT_LE(oracle::direction_distance(got, ref), 1e-10);
}

TEST(Centering, Cube) {
  EXPECT_EQ(centering(0.0), 1.0);
  EXPECT_EQ(centering(1.0), 0.0);
  EXPECT_EQ(centering(0.5), 0.125);
}

TEST(CombinedRhs, PureCenteringLimit) {
  Instance st(45, 3);
  Direction zero{Vector::Zero(3), Vector::Zero(6), Vector::Zero(6), 0.0, 0.0};
  const Rhs d = combined_rhs(st.v, st.p, st.cones, st.scaling, zero, 1.0);
  EXPECT_EQ(d.dx, Vector::Zero(3));
  EXPECT_EQ(d.dz, Vector::Zero(6));
  EXPECT_EQ(d.dtau, 0.0);
  EXPECT_DOUBLE_EQ(d.dkappa, st.v.kappa * st.v.tau - st.v.mu);
  const Rhs g = combined_rhs(st.v, st.p, st.cones, st.scaling, zero, 0.0);
  const Rhs G = residual_map(st.v, st.p);
  EXPECT_EQ(g.dx, G.dx);
  EXPECT_EQ(g.dtau, G.dtau);
}

TEST(Steps, ZeroStepAndNeighborhood) {
  Instance st(46, 3);
  const Rhs aff = affine_rhs(st.v, st.p);
  const Direction d = solve_directions(st.kkt, st.cones, st.scaling, st.p, st.v, aff, st.column);
  const IterateState same = take_step(st.v, d, 0.0, st.cones);
  EXPECT_EQ(same.x, st.v.x);
  EXPECT_EQ(same.tau, st.v.tau);

  const double raw = affine_step_size(st.v, d, st.cones);
  EXPECT_DOUBLE_EQ(combined_step_size(st.v, d, st.cones, 0.0), raw);
  const double beta = 1e-3;
  ASSERT_TRUE(in_neighborhood(st.v, st.cones, beta));
  const double a = combined_step_size(st.v, d, st.cones, beta);
  EXPECT_GT(a, 0.0);
  EXPECT_LE(a, raw);
  EXPECT_TRUE(in_neighborhood(take_step(st.v, d, a, st.cones), st.cones, beta));
}

// ------------------------------------------------------------------ solve

TEST(Solve, ScalarQpWithBound) {
  // min ½x² s.t. x ≥ 1  ⇔  -x + s = -1, s ≥ 0.
  const ProblemData p = make(Eigen::MatrixXd::Ones(1, 1), -Eigen::MatrixXd::Ones(1, 1), vec({0}), vec({-1}),
                             {ConeSpec::nonneg(1)});
  const SolveResult r = solve(p, {});
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_LE(r.iterations, 20);
  EXPECT_LE(std::min(r.tau, r.kappa) / std::max(r.tau, r.kappa), 1e-4);
}

TEST(Solve, SymmetricPortfolio) {
  PortfolioData d;
  d.F = Eigen::MatrixXd::Zero(2, 1);
  d.D = Vector::Ones(2);
  d.mu = Vector::Zero(2);
  d.gamma = 1.0;
  SolverSettings s;
  s.eps_feas = 1e-9;
  const SolveResult r = solve(portfolio_problem(d), s);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.x[0], 0.5, 1e-7);
  EXPECT_NEAR(r.x[1], 0.5, 1e-7);
}

TEST(Solve, UniformEntropy) {
  EntropyData d = entropy_data(4, 1);
  d.with_inequalities = false;
  const SolveResult r = solve(entropy_problem(d), {});
  ASSERT_EQ(r.status, Status::Optimal);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.x[i], 0.25, 1e-6);
  EXPECT_NEAR(-r.primal_objective, std::log(4.0), 1e-6);
}

TEST(Solve, PrimalInfeasibleLp) {
  // x ≥ 0 and x ≤ -1.
  const ProblemData p = make(Eigen::MatrixXd::Zero(1, 1), vec({-1, 1}), vec({1}), vec({0, -1}), {ConeSpec::nonneg(2)});
  const SolveResult r = solve(p, {});
  ASSERT_EQ(r.status, Status::PrimalInfeasible);
  EXPECT_TRUE(oracle::primal_certificate_ok(p, r.z, 1e-7));
  EXPECT_NEAR(p.b.dot(r.certificate), -1.0, 1e-12);
  EXPECT_LE(r.iterations, 50);
}

TEST(Solve, DualInfeasibleLp) {
  // min -x - y s.t. x, y ≥ 0, x - y ≤ 1.
  Eigen::MatrixXd A(3, 2);
  A << -1, 0, 0, -1, 1, -1;
  const ProblemData p = make(Eigen::MatrixXd::Zero(2, 2), A, vec({-1, -1}), vec({0, 0, 1}), {ConeSpec::nonneg(3)});
  const SolveResult r = solve(p, {});
  ASSERT_EQ(r.status, Status::DualInfeasible);
  EXPECT_TRUE(oracle::dual_certificate_ok(p, r.x, 1e-7));
  EXPECT_LE(r.iterations, 50);
}

TEST(Solve, OptimalSatisfiesKktOnOriginalData) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ProblemData p = gen_huber(12, seed);
    const SolveResult r = solve(p, {});
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_TRUE(oracle::kkt_report(p, r.x, r.s, r.z).ok(1e-6));
  }
}

TEST(Solve, EquilibrationDoesNotChangeTheAnswer) {
  const ProblemData p = gen_portfolio(20, 1.0, 3);
  SolverSettings a, b;
  a.eps_feas = b.eps_feas = 1e-9;
  b.equilibrate = false;
  const SolveResult ra = solve(p, a), rb = solve(p, b);
  ASSERT_EQ(ra.status, Status::Optimal);
  ASSERT_EQ(rb.status, Status::Optimal);
  EXPECT_LE((ra.x - rb.x).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Solve, DeterministicTrace) {
  const ProblemData p = gen_multistage_portfolio(6, 2, 2, 4);
  std::vector<double> mus1, mus2;
  SolverSettings s;
  s.direction_observer = [&](const DirectionEvent& e) {
    if (!e.affine) mus1.push_back(e.state->mu);
  };
  const SolveResult r1 = solve(p, s);
  s.direction_observer = [&](const DirectionEvent& e) {
    if (!e.affine) mus2.push_back(e.state->mu);
  };
  const SolveResult r2 = solve(p, s);
  EXPECT_EQ(mus1, mus2);
  EXPECT_EQ(r1.x, r2.x);
  ASSERT_EQ(r1.status, Status::Optimal);
  EXPECT_LE(mus1.back(), mus1.front());
}

TEST(Solve, MuDecreasesBySixOrders) {
  const ProblemData p = gen_entropy(10, 2);
  double mu0 = -1.0, mu_last = 0.0;
  SolverSettings s;
  s.eps_feas = 1e-8;
  s.direction_observer = [&](const DirectionEvent& e) {
    if (mu0 < 0.0) mu0 = e.state->mu;
    mu_last = e.state->mu;
  };
  const SolveResult r = solve(p, s);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_LE(mu_last, 1e-6 * mu0 * 10.0);  // μ after the final step is smaller still
}

TEST(Solve, LimitsReturnBestIterate) {
  const ProblemData p = gen_huber(15, 1);
  SolverSettings s;
  s.max_iter = 2;
  const SolveResult r = solve(p, s);
  EXPECT_EQ(r.status, Status::MaxIterations);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.x.size(), p.n());
}

TEST(UpdateData, MatchesFreshSolveAndReusesSymbolic) {
  const ProblemData p = gen_portfolio(15, 1.0, 7);
  SolverSettings s;
  s.eps_feas = 1e-10;
  Solver solver(p, s);
  oracle::Rng r(47);
  for (int k = 0; k < 5; ++k) {
    Vector q = p.q;
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += 0.1 * r.normal();
    solver.update_data(nullptr, nullptr, &q, nullptr);
    const SolveResult a = solver.solve();
    ProblemData fresh = p;
    fresh.q = q;
    const SolveResult b = solve(fresh, s);
    ASSERT_EQ(a.status, Status::Optimal);
    EXPECT_LE((a.x - b.x).lpNorm<Eigen::Infinity>(), 1e-9);
  }
  EXPECT_EQ(solver.symbolic_factorizations(), 1);
  CsrMatrix A2 = CsrMatrix::from_dense(Eigen::MatrixXd::Ones(p.m(), p.n()));
  EXPECT_THROW(solver.update_data(nullptr, &A2, nullptr, nullptr), PatternMismatch);
}

TEST(Solve, SmallestEigenvalueThroughPsdCone) {
  // min ⟨C, X⟩ s.t. tr X = 1, X ⪰ 0, with X in svec coordinates.
  Eigen::Matrix3d C;
  C << 2, 0.5, 0.1, 0.5, 1, -0.3, 0.1, -0.3, 3;
  const double r2 = std::sqrt(2.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(7, 6);
  A(0, 0) = A(0, 3) = A(0, 5) = 1.0;
  A.bottomRows(6) = -Eigen::MatrixXd::Identity(6, 6);
  Vector q(6);
  q << C(0, 0), r2 * C(1, 0), r2 * C(2, 0), C(1, 1), r2 * C(2, 1), C(2, 2);
  Vector b = Vector::Zero(7);
  b[0] = 1.0;
  const ProblemData p = make(Eigen::MatrixXd::Zero(6, 6), A, q, b, {ConeSpec::zero(1), ConeSpec::psd(3)});
  SolverSettings s;
  s.eps_feas = 1e-9;
  const SolveResult r = solve(p, s);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.primal_objective, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(C).eigenvalues()[0], 1e-7);
  EXPECT_LE(r.iterations, 20);
}

TEST(Solve, GeometricMeanThroughPowerCone) {
  // max z s.t. x + y = 2, (x, y, z) ∈ K_pow(α); optimum x = 2α, y = 2(1-α).
  for (double alpha : {0.5, 0.3}) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 3);
    A.row(0) << 1, 1, 0;
    A.bottomRows(3) = -Eigen::Matrix3d::Identity();
    Vector b = Vector::Zero(4);
    b[0] = 2.0;
    const ProblemData p = make(Eigen::MatrixXd::Zero(3, 3), A, vec({0, 0, -1}), b, {ConeSpec::zero(1), ConeSpec::pow(alpha)});
    SolverSettings s;
    s.eps_feas = 1e-9;
    const SolveResult r = solve(p, s);
    ASSERT_EQ(r.status, Status::Optimal);
    const double expect = std::pow(2 * alpha, alpha) * std::pow(2 * (1 - alpha), 1 - alpha);
    EXPECT_NEAR(r.x[2], expect, 1e-6);
  }
}

#include "conicip/generators.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace conicip {

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

double SplitMix64::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("empty range");
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return r % bound;
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Portfolio: return "portfolio";
    case Family::Huber: return "huber";
    case Family::Entropy: return "entropy";
    case Family::Multistage: return "multistage";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::Portfolio, Family::Huber, Family::Entropy, Family::Multistage})
    if (to_string(f) == name) return f;
  throw std::invalid_argument("unknown problem family '" + std::string(name) + "'");
}

namespace {

Eigen::MatrixXd gaussian(SplitMix64& rng, int rows, int cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

Vector gaussian_vector(SplitMix64& rng, int n, double scale = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

void add_dense(std::vector<Triplet>& t, const Eigen::MatrixXd& m, int row0, int col0, double scale = 1.0) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) t.push_back({row0 + i, col0 + j, scale * m(i, j)});
}

void add_diag(std::vector<Triplet>& t, int row0, int col0, int count, double value) {
  for (int i = 0; i < count; ++i) t.push_back({row0 + i, col0 + i, value});
}

void check_size(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

// ------------------------------------------------------------------ portfolio

PortfolioData portfolio_data(int n, double gamma, std::uint64_t seed) {
  check_size(n >= 2, "portfolio needs n >= 2");
  check_size(gamma > 0.0, "risk aversion must be positive");
  SplitMix64 rng(seed);
  const int p = std::max(1, static_cast<int>(std::lround(0.1 * n)));
  PortfolioData d;
  d.gamma = gamma;
  d.F = gaussian(rng, n, p);
  d.D.resize(n);
  for (int i = 0; i < n; ++i) d.D[i] = rng.uniform_pos() + 1e-3;
  d.mu = gaussian_vector(rng, n);
  return d;
}

ProblemData portfolio_problem(const PortfolioData& data) {
  const int n = static_cast<int>(data.F.rows());
  const int p = static_cast<int>(data.F.cols());
  const int nv = n + p;
  std::vector<Triplet> pt;
  for (int i = 0; i < n; ++i) pt.push_back({i, i, 2.0 * data.gamma * data.D[i]});
  add_diag(pt, n, n, p, 2.0 * data.gamma);

  // Rows: Fᵀx - y = 0 (p), 1ᵀx = 1, -x + s = 0 with s ≥ 0 (n).
  std::vector<Triplet> at;
  add_dense(at, data.F.transpose(), 0, 0);
  add_diag(at, 0, n, p, -1.0);
  for (int j = 0; j < n; ++j) at.push_back({p, j, 1.0});
  add_diag(at, p + 1, 0, n, -1.0);

  ProblemData out;
  out.P = CsrMatrix::from_triplets(nv, nv, std::move(pt));
  out.A = CsrMatrix::from_triplets(p + 1 + n, nv, std::move(at));
  out.q = Vector::Zero(nv);
  out.q.head(n) = -data.mu;
  out.b = Vector::Zero(p + 1 + n);
  out.b[p] = 1.0;
  out.cones = {ConeSpec::zero(p + 1), ConeSpec::nonneg(n)};
  return out;
}

ProblemData gen_portfolio(int n, double gamma, std::uint64_t seed) {
  return portfolio_problem(portfolio_data(n, gamma, seed));
}

// ---------------------------------------------------------------------- huber

HuberData huber_data(int n, std::uint64_t seed, bool noisy) {
  check_size(n >= 1, "huber needs n >= 1");
  SplitMix64 rng(seed);
  const int m = static_cast<int>(std::lround(1.5 * n));
  HuberData d;
  d.A = gaussian(rng, m, n);
  d.x_true = gaussian_vector(rng, n);
  d.b = d.A * d.x_true;
  if (noisy) {
    d.b += gaussian_vector(rng, m, 0.1);
    // Outliers on round(0.1m) distinct rows, picked by a partial Fisher-Yates shuffle.
    std::vector<int> rows(m);
    for (int i = 0; i < m; ++i) rows[i] = i;
    const int outliers = static_cast<int>(std::lround(0.1 * m));
    for (int i = 0; i < outliers; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
      std::swap(rows[i], rows[j]);
      d.b[rows[i]] += 10.0 * rng.normal();
    }
  }
  return d;
}

ProblemData huber_problem(const HuberData& data) {
  const int m = static_cast<int>(data.A.rows());
  const int n = static_cast<int>(data.A.cols());
  const int nv = n + 3 * m;
  std::vector<Triplet> pt;
  add_diag(pt, n, n, m, 2.0);

  std::vector<Triplet> at;
  add_dense(at, data.A, 0, 0);
  add_diag(at, 0, n, m, -1.0);
  add_diag(at, 0, n + m, m, -1.0);
  add_diag(at, 0, n + 2 * m, m, 1.0);
  add_diag(at, m, n + m, 2 * m, -1.0);

  ProblemData out;
  out.P = CsrMatrix::from_triplets(nv, nv, std::move(pt));
  out.A = CsrMatrix::from_triplets(3 * m, nv, std::move(at));
  out.q = Vector::Zero(nv);
  out.q.tail(2 * m).setConstant(2.0 * data.threshold);
  out.b = Vector::Zero(3 * m);
  out.b.head(m) = data.b;
  out.cones = {ConeSpec::zero(m), ConeSpec::nonneg(2 * m)};
  return out;
}

ProblemData gen_huber(int n, std::uint64_t seed) { return huber_problem(huber_data(n, seed)); }

// -------------------------------------------------------------------- entropy

EntropyData entropy_data(int n, std::uint64_t seed) {
  check_size(n >= 2, "entropy needs n >= 2");
  SplitMix64 rng(seed);
  const int m = static_cast<int>(std::lround(0.5 * n));
  EntropyData d;
  d.A = gaussian(rng, m, n, std::sqrt(static_cast<double>(n)));
  d.v.resize(n);
  for (int i = 0; i < n; ++i) d.v[i] = rng.uniform();
  d.b = d.A * d.v / d.v.sum();
  return d;
}

ProblemData entropy_problem(const EntropyData& data) {
  const int n = static_cast<int>(data.v.size());
  const int m = data.with_inequalities ? static_cast<int>(data.A.rows()) : 0;
  const int nv = 2 * n;
  const int rows = 1 + m + 3 * n;

  std::vector<Triplet> at;
  for (int j = 0; j < n; ++j) at.push_back({0, j, 1.0});
  if (m > 0) add_dense(at, data.A, 1, 0);
  Vector b = Vector::Zero(rows);
  b[0] = 1.0;
  if (m > 0) b.segment(1, m) = data.b;
  for (int i = 0; i < n; ++i) {
    const int r = 1 + m + 3 * i;
    at.push_back({r, n + i, -1.0});
    at.push_back({r + 1, i, -1.0});
    b[r + 2] = 1.0;
  }

  ProblemData out;
  out.P = CsrMatrix(nv, nv);
  out.A = CsrMatrix::from_triplets(rows, nv, std::move(at));
  out.q = Vector::Zero(nv);
  out.q.tail(n).setConstant(-1.0);
  out.b = std::move(b);
  out.cones.push_back(ConeSpec::zero(1));
  if (m > 0) out.cones.push_back(ConeSpec::nonneg(m));
  for (int i = 0; i < n; ++i) out.cones.push_back(ConeSpec::exp());
  return out;
}

ProblemData gen_entropy(int n, std::uint64_t seed) { return entropy_problem(entropy_data(n, seed)); }

// ----------------------------------------------------------------- multistage

int multistage_rows(int n, int k, int T) { return T * (5 * n + 4 * k + 3); }

MultistageData multistage_data(int n, int k, int T, std::uint64_t seed, const MultistageParams& params) {
  check_size(n >= k && k >= 1 && T >= 1, "multistage needs n >= k >= 1 and T >= 1");
  SplitMix64 rng(seed);
  MultistageData d;
  d.n = n;
  d.k = k;
  d.T = T;
  d.inflow = params.inflow >= 0.0 ? params.inflow : 0.02 * n;
  const double initial = params.initial_capital >= 0.0 ? params.initial_capital : 0.02 * n;
  const double capital = d.inflow + initial;
  if (d.box * n < capital)
    throw InfeasibleBoxBudget("capital " + std::to_string(capital) + " does not fit in " + std::to_string(n) +
                              " assets bounded by " + std::to_string(d.box));

  // x0: uniform on the simplex, scaled to the initial capital.
  d.x0.resize(n);
  for (int i = 0; i < n; ++i) d.x0[i] = -std::log(rng.uniform_pos());
  d.x0 *= initial / d.x0.sum();

  // F_t = a·11ᵀ + (a/2)·G̃ with G̃ row-centred, so that the equal split
  // x = (capital/n)·1 maps to y = box/2 in every factor.
  const double a = 0.5 * d.box / capital;
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd G = gaussian(rng, k, n);
    G.colwise() -= G.rowwise().mean();
    d.F.push_back(Eigen::MatrixXd::Constant(k, n, a) + 0.5 * a * G);
    d.mu.push_back(gaussian_vector(rng, n, 0.1));
  }
  const Eigen::MatrixXd G = gaussian(rng, k, k);
  const Eigen::MatrixXd cov = G * G.transpose() / k + 0.1 * Eigen::MatrixXd::Identity(k, k);
  d.U = cov.llt().matrixU();
  d.D_sqrt.resize(n);
  for (int i = 0; i < n; ++i) d.D_sqrt[i] = std::sqrt(0.01 + 0.1 * rng.uniform());
  return d;
}

ProblemData multistage_problem(const MultistageData& d) {
  const int n = d.n;
  const int k = d.k;
  const int per = 2 * n + k + 1;
  const int nv = d.T * per;
  auto xi = [&](int t) { return t * per; };
  auto yi = [&](int t) { return t * per + n; };
  auto zi = [&](int t) { return t * per + n + k; };
  auto ri = [&](int t) { return t * per + 2 * n + k; };

  std::vector<Triplet> at;
  std::vector<double> b;
  std::vector<ConeSpec> cones;
  int row = 0;
  auto new_rows = [&](int count) {
    const int r0 = row;
    row += count;
    b.resize(row, 0.0);
    return r0;
  };

  // Zero rows: budgets then factor maps.
  for (int t = 0; t < d.T; ++t) {
    const int r = new_rows(1);
    for (int j = 0; j < n; ++j) at.push_back({r, xi(t) + j, 1.0});
    if (t == 0) {
      b[r] = d.inflow + d.x0.sum();
    } else {
      for (int j = 0; j < n; ++j) at.push_back({r, xi(t - 1) + j, -1.0});
    }
    const int rf = new_rows(k);
    add_dense(at, d.F[t], rf, xi(t));
    add_diag(at, rf, yi(t), k, -1.0);
  }
  cones.push_back(ConeSpec::zero(row));

  // Nonnegative rows: trade volumes and boxes.
  const int nonneg_start = row;
  for (int t = 0; t < d.T; ++t) {
    // z ≥ x_t - x_{t-1}:  x_t - x_{t-1} - z ≤ 0
    int r = new_rows(n);
    add_diag(at, r, xi(t), n, 1.0);
    add_diag(at, r, zi(t), n, -1.0);
    if (t == 0)
      for (int j = 0; j < n; ++j) b[r + j] = d.x0[j];
    else
      add_diag(at, r, xi(t - 1), n, -1.0);
    // z ≥ x_{t-1} - x_t:  x_{t-1} - x_t - z ≤ 0
    r = new_rows(n);
    add_diag(at, r, xi(t), n, -1.0);
    add_diag(at, r, zi(t), n, -1.0);
    if (t == 0)
      for (int j = 0; j < n; ++j) b[r + j] = -d.x0[j];
    else
      add_diag(at, r, xi(t - 1), n, 1.0);
    // 0 ≤ x ≤ box, 0 ≤ y ≤ box, r ≥ 0
    r = new_rows(n);
    add_diag(at, r, xi(t), n, -1.0);
    r = new_rows(n);
    add_diag(at, r, xi(t), n, 1.0);
    for (int j = 0; j < n; ++j) b[r + j] = d.box;
    r = new_rows(k);
    add_diag(at, r, yi(t), k, -1.0);
    r = new_rows(k);
    add_diag(at, r, yi(t), k, 1.0);
    for (int j = 0; j < k; ++j) b[r + j] = d.box;
    r = new_rows(1);
    at.push_back({r, ri(t), -1.0});
  }
  cones.push_back(ConeSpec::nonneg(row - nonneg_start));

  // (r_t, U y_t, D_sqrt ⊙ x_t) ∈ SOC
  for (int t = 0; t < d.T; ++t) {
    const int r = new_rows(1 + k + n);
    at.push_back({r, ri(t), -1.0});
    add_dense(at, d.U, r + 1, yi(t), -1.0);
    for (int j = 0; j < n; ++j) at.push_back({r + 1 + k + j, xi(t) + j, -d.D_sqrt[j]});
    cones.push_back(ConeSpec::soc(1 + k + n));
  }

  ProblemData out;
  out.P = CsrMatrix(nv, nv);
  out.A = CsrMatrix::from_triplets(row, nv, std::move(at));
  out.q = Vector::Zero(nv);
  for (int t = 0; t < d.T; ++t) {
    out.q.segment(xi(t), n) = -d.mu[t];
    out.q.segment(zi(t), n).setConstant(d.c);
    out.q[ri(t)] = d.gamma;
  }
  out.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
  out.cones = std::move(cones);
  return out;
}

ProblemData gen_multistage_portfolio(int n, int k, int T, std::uint64_t seed) {
  return multistage_problem(multistage_data(n, k, T, seed));
}

// ------------------------------------------------------------------- dispatch

ProblemData generate(const GenSpec& spec) {
  switch (spec.family) {
    case Family::Portfolio: return gen_portfolio(spec.n, 1.0, spec.seed);
    case Family::Huber: return gen_huber(spec.n, spec.seed);
    case Family::Entropy: return gen_entropy(spec.n, spec.seed);
    case Family::Multistage: return gen_multistage_portfolio(spec.n, spec.k, spec.T, spec.seed);
  }
  throw std::invalid_argument("unknown problem family");
}

std::string instance_name(const GenSpec& spec) {
  std::string name = std::string(to_string(spec.family)) + "_n" + std::to_string(spec.n);
  if (spec.family == Family::Multistage) name += "_k" + std::to_string(spec.k) + "_T" + std::to_string(spec.T);
  return name + "_s" + std::to_string(spec.seed);
}

}  // namespace conicip

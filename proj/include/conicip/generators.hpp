#pragma once

// Seeded synthetic benchmark families. Every generator is a pure function of
// its size parameters and seed.
//
// Random numbers come from SplitMix64 (Steele, Lea, Flood 2014):
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; output z ^ (z >> 31)
// uniform() = (output >> 11) · 2⁻⁵³ in [0, 1), uniform_pos() = ((output >> 11) + 1) · 2⁻⁵³ in (0, 1],
// normal() = sqrt(-2 log u₁) · cos(2π u₂) with u₁ = uniform_pos(), u₂ = uniform(),
// one normal per pair of outputs.

#include "conicip/problem.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>

namespace conicip {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();
  double uniform_pos();
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

enum class Family { Portfolio, Huber, Entropy, Multistage };

std::string_view to_string(Family f);
/// Accepts "portfolio", "huber", "entropy", "multistage".
Family family_from_string(std::string_view name);

struct GenSpec {
  Family family = Family::Portfolio;
  int n = 10;
  int k = 2;  // multistage factors
  int T = 1;  // multistage periods
  std::uint64_t seed = 0;
};

/// Dispatches to the family generator with default parameters.
ProblemData generate(const GenSpec& spec);
/// "<family>_n<n>[_k<k>_T<T>]_s<seed>".
std::string instance_name(const GenSpec& spec);

// ------------------------------------------------------------------ portfolio
// Variables (x, y) with y = Fᵀx:
//   minimize γ(xᵀDx + yᵀy) - μᵀx   s.t.  Fᵀx - y = 0,  1ᵀx = 1,  x ≥ 0.

struct PortfolioData {
  Eigen::MatrixXd F;  // n×p factor loadings
  Vector D;           // idiosyncratic variances
  Vector mu;          // expected returns
  double gamma = 1.0;
};

PortfolioData portfolio_data(int n, double gamma, std::uint64_t seed);
ProblemData portfolio_problem(const PortfolioData& data);
ProblemData gen_portfolio(int n, double gamma, std::uint64_t seed);

// ---------------------------------------------------------------------- huber
// Variables (x, u, r⁺, r⁻) with Ax - b = u + r⁺ - r⁻:
//   minimize Σ u² + 2T·Σ(r⁺ + r⁻)   s.t.  Ax - u - r⁺ + r⁻ = b,  r⁺, r⁻ ≥ 0.

struct HuberData {
  Eigen::MatrixXd A;
  Vector b;
  Vector x_true;
  double threshold = 1.0;
};

/// m = round(1.5n); b = A·x_true + 0.1·noise, with 10% of the rows hit by
/// outliers of scale 10. `noisy = false` gives b = A·x_true exactly.
HuberData huber_data(int n, std::uint64_t seed, bool noisy = true);
ProblemData huber_problem(const HuberData& data);
ProblemData gen_huber(int n, std::uint64_t seed);

// -------------------------------------------------------------------- entropy
// Variables (x, t):  minimize -Σt  s.t.  1ᵀx = 1,  Ax ≤ b,  (tᵢ, xᵢ, 1) ∈ K_exp.

struct EntropyData {
  Eigen::MatrixXd A;  // m×n, entries N(0, n)
  Vector b;           // A·v/1ᵀv
  Vector v;
  bool with_inequalities = true;
};

EntropyData entropy_data(int n, std::uint64_t seed);
ProblemData entropy_problem(const EntropyData& data);
ProblemData gen_entropy(int n, std::uint64_t seed);

// ----------------------------------------------------------------- multistage
// Per period t the variables are (x_t, y_t, z_t, r_t):
//   minimize Σ -μ_tᵀx_t + c·1ᵀz_t + γ·r_t
//   s.t. z_t ≥ ±(x_t - x_{t-1}),  1ᵀx_1 = d + 1ᵀx_0,  1ᵀx_t = 1ᵀx_{t-1},
//        y_t = F_t x_t,  (r_t, U y_t, D_sqrt ⊙ x_t) ∈ SOC,
//        0 ≤ x_t ≤ 0.1,  0 ≤ y_t ≤ 0.1,  r_t ≥ 0.

class InfeasibleBoxBudget : public Error {
 public:
  using Error::Error;
};

struct MultistageData {
  int n = 0;
  int k = 0;
  int T = 0;
  std::vector<Eigen::MatrixXd> F;  // k×n per period
  std::vector<Vector> mu;          // per period
  Eigen::MatrixXd U;               // k×k upper triangular
  Vector D_sqrt;
  Vector x0;
  double inflow = 0.0;  // d
  double c = 1e-3;
  double gamma = 1.0;
  double box = 0.1;
};

struct MultistageParams {
  /// Negative values pick the defaults d = 0.02n and 1ᵀx₀ = 0.02n.
  double inflow = -1.0;
  double initial_capital = -1.0;
};

/// Throws InfeasibleBoxBudget when the capital d + 1ᵀx₀ exceeds box·n.
MultistageData multistage_data(int n, int k, int T, std::uint64_t seed, const MultistageParams& params = {});
ProblemData multistage_problem(const MultistageData& data);
ProblemData gen_multistage_portfolio(int n, int k, int T, std::uint64_t seed);
/// Rows of the multistage problem: T·(5n + 4k + 3).
int multistage_rows(int n, int k, int T);

}  // namespace conicip

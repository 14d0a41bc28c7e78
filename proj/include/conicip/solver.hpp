#pragma once

#include "conicip/ipm.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>

namespace conicip {

/// Passed to SolverSettings::direction_observer after every direction solve,
/// in the scaled and reordered coordinates the iteration works in.
struct DirectionEvent {
  int iteration = 0;
  bool affine = true;
  const ProblemData* problem = nullptr;
  const ConeSet* cones = nullptr;
  const ScalingState* scaling = nullptr;
  const IterateState* state = nullptr;
  const Rhs* rhs = nullptr;
  const Direction* direction = nullptr;
};

struct SolverSettings {
  double eps_feas = 1e-6;
  double eps_inf = 1e-8;
  int max_iter = 200;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  Precision precision = Precision::Full;
  double static_reg = -1.0;   // negative: precision default
  double dynamic_reg = -1.0;  // negative: precision default
  double beta = 1e-6;
  double backtrack = 0.8;
  double step_scale = 0.99;
  bool equilibrate = true;
  bool verbose = false;
  int threads = 0;  // 0: hardware concurrency
  RefinementSettings refinement;
  std::function<void(const DirectionEvent&)> direction_observer;

  /// Throws std::invalid_argument for out-of-range values.
  void check() const;
};

struct SolveResult {
  Status status = Status::Unsolved;
  /// Solution in the original row order (x̄, z̄, s̄), or the normalized
  /// certificate iterate for infeasible statuses.
  Vector x;
  Vector z;
  Vector s;
  /// z/|bᵀz| for PrimalInfeasible, x/|qᵀx| for DualInfeasible, empty otherwise.
  Vector certificate;
  /// The certificate before normalization.
  Vector certificate_raw;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  OptimalityMeasures measures;
  double r_p_norm = 0.0;
  double r_d_norm = 0.0;
  double tau = 1.0;
  double kappa = 1.0;
  int iterations = 0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  /// Multiply-adds spent in factorizations and triangular solves.
  std::int64_t factor_work = 0;
  int symbolic_factorizations = 0;
  std::string message;
};

class Solver {
 public:
  /// Validates, reorders, equilibrates, assembles and analyzes the KKT system.
  explicit Solver(ProblemData problem, SolverSettings settings = {});
  ~Solver();
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  SolveResult solve();

  /// Replace problem values; null arguments keep the current data. Patterns
  /// of P and A must match. The symbolic factorization is reused.
  void update_data(const CsrMatrix* P, const CsrMatrix* A, const Vector* q, const Vector* b);

  [[nodiscard]] int symbolic_factorizations() const;
  [[nodiscard]] const ProblemData& problem() const;
  [[nodiscard]] const SolverSettings& settings() const;
  SolverSettings& settings();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper.
SolveResult solve(const ProblemData& problem, const SolverSettings& settings = {});

}  // namespace conicip

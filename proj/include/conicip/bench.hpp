#pragma once

// Benchmark suites over the generator families and the aggregate metrics used
// to compare solver configurations:
//
//   shifted geometric mean   g_s = (∏_p (t_ps + k))^{1/N} - k
//   normalized               r_s = g_s / min_s' g_s'
//   performance ratio        u_ps = t_ps / min_s' t_ps'
//   relative profile         f_r,s(τ) = #{p solved by s : u_ps ≤ τ} / N
//   absolute profile         f_a,s(τ) = #{p solved by s : t_ps ≤ τ} / N
//
// t_ps is setup + solve time, or the time limit when the run failed.

#include "conicip/generators.hpp"
#include "conicip/solver.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace conicip {

/// Wall: measured seconds. Work: factorization multiply-adds scaled by 1e-9,
/// which makes every column of the CSV reproducible bit for bit.
enum class ClockKind { Wall, Work };

inline constexpr double kWorkUnitsPerSecond = 1e9;

std::string_view to_string(ClockKind c);
ClockKind clock_from_string(std::string_view name);

struct BenchConfig {
  std::string label;
  SolverSettings settings;
};

/// "full", "mixed", or "label:key=value,..." with keys precision, eps_feas,
/// eps_inf, max_iter, equilibrate, static_reg. Throws std::invalid_argument.
BenchConfig parse_config(std::string_view text);

struct BenchSuite {
  std::vector<GenSpec> problems;
  std::vector<BenchConfig> configs;
  double time_limit = 10.0;
  ClockKind clock = ClockKind::Wall;
  /// Parallel runs distort wall-clock comparisons; use 1 for timing.
  int jobs = 1;
};

/// Cartesian product families × sizes × seeds, in that nesting order.
std::vector<GenSpec> suite_problems(std::span<const Family> families, std::span<const int> sizes,
                                    std::span<const std::uint64_t> seeds, int k = 2, int T = 1);

struct BenchRecord {
  std::string problem;
  std::string config;
  Status status = Status::Unsolved;
  /// Time entering the metrics: total time if solved, else the time limit.
  double metric_time = 0.0;
  double total_time = 0.0;
  double setup_time = 0.0;
  double solve_time = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::int64_t work = 0;
  std::string message;

  [[nodiscard]] bool solved() const { return is_solved(status); }
};

/// Runs every (problem, config) pair. Rows come out problem-major in suite
/// order regardless of `jobs`. Exceptions inside a run become NumericalError
/// records.
std::vector<BenchRecord> run_bench(const BenchSuite& suite);

BenchRecord make_record(std::string problem, std::string config, const SolveResult& result, double time_limit,
                        ClockKind clock);

void write_csv(std::ostream& out, std::span<const BenchRecord> records);
std::vector<BenchRecord> read_csv(std::istream& in);

double shifted_geomean(std::span<const double> times, double k = 1.0);

struct Metrics {
  std::vector<std::string> problems;  // first-appearance order
  std::vector<std::string> configs;
  Eigen::MatrixXd times;   // problems × configs, metric times
  Eigen::MatrixXd ratios;  // u_ps
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> solved;
  std::vector<double> geomean;
  std::vector<double> normalized;
  std::vector<double> tau_relative;
  std::vector<double> tau_absolute;
  Eigen::MatrixXd relative_profile;  // tau_relative × configs
  Eigen::MatrixXd absolute_profile;  // tau_absolute × configs
};

/// f_r,s(τ) and f_a,s(τ) evaluated exactly.
double relative_profile(const Metrics& m, int config, double tau);
double absolute_profile(const Metrics& m, int config, double tau);

/// Throws std::invalid_argument if the records do not cover every
/// (problem, config) pair exactly once.
Metrics compute_metrics(std::span<const BenchRecord> records, double shift = 1.0, int samples = 50);
std::string metrics_json(const Metrics& m, int indent = 2);

}  // namespace conicip

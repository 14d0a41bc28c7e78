// conicip command-line tool.
//
//   conicip solve problem.json [--eps-feas 1e-8] [--precision mixed] [--verbose]
//   conicip gen --family huber --n 50 --seed 3 -o huber.json
//   conicip bench --family portfolio --sizes 10,20 --seeds 0-9 --config full --config mixed
//   conicip metrics records.csv
//
// Exit codes: 0 solved (optimal or certified infeasible), 1 any other solver
// status or runtime failure, 2 invalid input.

#include "conicip/bench.hpp"
#include "conicip/generators.hpp"
#include "conicip/problem_io.hpp"
#include "conicip/solver.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace conicip;

constexpr int kExitSolved = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;

// "0-4,7" -> 0 1 2 3 4 7
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  auto num = [](const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw CLI::ValidationError("--seeds", "bad seed '" + s + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(num(item));
      continue;
    }
    const std::uint64_t lo = num(item.substr(0, dash));
    const std::uint64_t hi = num(item.substr(dash + 1));
    if (hi < lo) throw CLI::ValidationError("--seeds", "empty range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  return out;
}

struct SolveOptions {
  std::string path;
  SolverSettings settings;
  std::string precision = "full";
};

void add_settings_flags(CLI::App* cmd, SolverSettings& s, std::string& precision) {
  cmd->add_option("--eps-feas", s.eps_feas, "Feasibility and gap tolerance")->capture_default_str();
  cmd->add_option("--eps-inf", s.eps_inf, "Infeasibility tolerance")->capture_default_str();
  cmd->add_option("--max-iter", s.max_iter, "Iteration limit")->capture_default_str();
  cmd->add_option("--time-limit", s.time_limit, "Time limit in seconds");
  cmd->add_option("--precision", precision, "Factorization precision")
      ->check(CLI::IsMember({"full", "mixed"}))
      ->capture_default_str();
  cmd->add_flag("--verbose,-v", s.verbose, "Print the iteration log to stderr");
}

Precision precision_of(const std::string& name) { return name == "mixed" ? Precision::Mixed : Precision::Full; }

int run_solve(SolveOptions& opt) {
  ProblemFile file;
  try {
    file = read_problem(opt.path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  opt.settings.precision = precision_of(opt.precision);
  try {
    const SolveResult r = solve(file.problem, opt.settings);
    std::cout << result_to_json(r) << '\n';
    return is_solved(r.status) ? kExitSolved : kExitFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}

struct GenOptions {
  std::string family = "portfolio";
  GenSpec spec;
  std::string out;
};

int run_gen(GenOptions& opt) {
  opt.spec.family = family_from_string(opt.family);
  ProblemFile file{generate(opt.spec), {instance_name(opt.spec), opt.spec.seed}};
  if (opt.out.empty() || opt.out == "-") {
    std::cout << emit_problem(file) << '\n';
  } else {
    write_problem(opt.out, file);
  }
  return kExitSolved;
}

struct BenchOptions {
  std::vector<std::string> families{"portfolio"};
  std::vector<int> sizes{10};
  std::string seeds = "0";
  int k = 2;
  int T = 1;
  std::vector<std::string> configs{"full"};
  double time_limit = 10.0;
  std::string clock = "wall";
  int jobs = 1;
  std::string csv;
  std::string metrics;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

int run_bench_cmd(const BenchOptions& opt) {
  std::vector<Family> families;
  for (const auto& f : opt.families) families.push_back(family_from_string(f));
  const auto seeds = parse_seed_list(opt.seeds);

  BenchSuite suite;
  suite.problems = suite_problems(families, opt.sizes, seeds, opt.k, opt.T);
  for (const auto& c : opt.configs) suite.configs.push_back(parse_config(c));
  suite.time_limit = opt.time_limit;
  suite.clock = clock_from_string(opt.clock);
  suite.jobs = opt.jobs;
  if (suite.jobs > 1 && suite.clock == ClockKind::Wall)
    std::cerr << "note: parallel runs distort wall-clock timings\n";

  const auto records = run_bench(suite);
  std::ostringstream csv;
  write_csv(csv, records);
  const std::string metrics = metrics_json(compute_metrics(records)) + "\n";

  if (opt.csv.empty()) {
    std::cout << csv.str();
  } else {
    write_text(opt.csv, csv.str());
  }
  if (!opt.metrics.empty()) {
    write_text(opt.metrics, metrics);
  } else if (!opt.csv.empty()) {
    std::cout << metrics;
  }
  int failed = 0;
  for (const auto& r : records) failed += r.solved() ? 0 : 1;
  std::cerr << records.size() << " runs, " << failed << " unsolved\n";
  return kExitSolved;
}

struct MetricsOptions {
  std::string path;
  double shift = 1.0;
  int samples = 50;
};

int run_metrics(const MetricsOptions& opt) {
  std::ifstream in(opt.path);
  if (!in) throw std::invalid_argument("cannot open " + opt.path);
  const auto records = read_csv(in);
  std::cout << metrics_json(compute_metrics(records, opt.shift, opt.samples)) << '\n';
  return kExitSolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conic interior-point solver"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file and print the result as JSON");
  solve_cmd->add_option("problem", solve_opt.path, "Problem JSON file")->required();
  add_settings_flags(solve_cmd, solve_opt.settings, solve_opt.precision);

  GenOptions gen_opt;
  auto* gen_cmd = app.add_subcommand("gen", "Write a generated benchmark instance");
  gen_cmd->add_option("--family", gen_opt.family)
      ->check(CLI::IsMember({"portfolio", "huber", "entropy", "multistage"}))
      ->capture_default_str();
  gen_cmd->add_option("--n", gen_opt.spec.n, "Problem size")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--k", gen_opt.spec.k, "Multistage factor count")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--T", gen_opt.spec.T, "Multistage periods")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--seed", gen_opt.spec.seed)->capture_default_str();
  gen_cmd->add_option("-o,--out", gen_opt.out, "Output file (default stdout)");

  BenchOptions bench_opt;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite and report records and metrics");
  bench_cmd->add_option("--family", bench_opt.families, "Generator families")
      ->check(CLI::IsMember({"portfolio", "huber", "entropy", "multistage"}))
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--sizes", bench_opt.sizes, "Problem sizes")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--seeds", bench_opt.seeds, "Seeds, e.g. 0-9,20")->capture_default_str();
  bench_cmd->add_option("--k", bench_opt.k, "Multistage factor count")->capture_default_str();
  bench_cmd->add_option("--T", bench_opt.T, "Multistage periods")->capture_default_str();
  bench_cmd->add_option("--config", bench_opt.configs, "full, mixed, or label:key=value,...")->capture_default_str();
  bench_cmd->add_option("--time-limit", bench_opt.time_limit)->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--clock", bench_opt.clock)->check(CLI::IsMember({"wall", "work"}))->capture_default_str();
  bench_cmd->add_option("--jobs", bench_opt.jobs)->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--csv", bench_opt.csv, "Write records here instead of stdout");
  bench_cmd->add_option("--metrics", bench_opt.metrics, "Write metrics JSON here");

  MetricsOptions metrics_opt;
  auto* metrics_cmd = app.add_subcommand("metrics", "Recompute metrics from a bench CSV");
  metrics_cmd->add_option("records", metrics_opt.path, "Bench CSV")->required();
  metrics_cmd->add_option("--shift", metrics_opt.shift)->capture_default_str();
  metrics_cmd->add_option("--samples", metrics_opt.samples)->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*solve_cmd) return run_solve(solve_opt);
    if (*gen_cmd) return run_gen(gen_opt);
    if (*bench_cmd) return run_bench_cmd(bench_opt);
    if (*metrics_cmd) return run_metrics(metrics_opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitInput;
}

#include "conicip/bench.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace conicip {

std::string_view to_string(ClockKind c) { return c == ClockKind::Wall ? "wall" : "work"; }

ClockKind clock_from_string(std::string_view name) {
  if (name == "wall") return ClockKind::Wall;
  if (name == "work") return ClockKind::Work;
  throw std::invalid_argument("unknown clock '" + std::string(name) + "'");
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("bad number '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("bad integer '" + std::string(s) + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

Precision precision_from_string(std::string_view s) {
  if (s == "full") return Precision::Full;
  if (s == "mixed") return Precision::Mixed;
  throw std::invalid_argument("unknown precision '" + std::string(s) + "'");
}

}  // namespace

BenchConfig parse_config(std::string_view text) {
  BenchConfig cfg;
  const std::size_t colon = text.find(':');
  cfg.label = std::string(text.substr(0, colon));
  if (cfg.label.empty()) throw std::invalid_argument("empty configuration label");
  if (cfg.label.find(',') != std::string::npos) throw std::invalid_argument("label must not contain ','");
  if (colon == std::string_view::npos) {
    cfg.settings.precision = precision_from_string(cfg.label);
    return cfg;
  }
  for (std::string_view kv : split(text.substr(colon + 1), ',')) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("expected key=value, got '" + std::string(kv) + "'");
    const std::string_view key = kv.substr(0, eq);
    const std::string_view value = kv.substr(eq + 1);
    SolverSettings& s = cfg.settings;
    if (key == "precision") s.precision = precision_from_string(value);
    else if (key == "eps_feas") s.eps_feas = parse_double(value);
    else if (key == "eps_inf") s.eps_inf = parse_double(value);
    else if (key == "max_iter") s.max_iter = static_cast<int>(parse_int(value));
    else if (key == "static_reg") s.static_reg = parse_double(value);
    else if (key == "equilibrate") s.equilibrate = parse_int(value) != 0;
    else throw std::invalid_argument("unknown configuration key '" + std::string(key) + "'");
  }
  cfg.settings.check();
  return cfg;
}

std::vector<GenSpec> suite_problems(std::span<const Family> families, std::span<const int> sizes,
                                    std::span<const std::uint64_t> seeds, int k, int T) {
  std::vector<GenSpec> out;
  for (Family f : families)
    for (int n : sizes)
      for (std::uint64_t seed : seeds) out.push_back({f, n, k, T, seed});
  return out;
}

BenchRecord make_record(std::string problem, std::string config, const SolveResult& r, double time_limit,
                        ClockKind clock) {
  BenchRecord rec;
  rec.problem = std::move(problem);
  rec.config = std::move(config);
  rec.status = r.status;
  rec.iterations = r.iterations;
  rec.primal_residual = r.measures.primal;
  rec.dual_residual = r.measures.dual;
  rec.gap = r.measures.gap;
  rec.work = r.factor_work;
  rec.message = r.message;
  if (clock == ClockKind::Wall) {
    rec.setup_time = r.setup_seconds;
    rec.solve_time = r.solve_seconds;
  } else {
    rec.setup_time = 0.0;
    rec.solve_time = static_cast<double>(r.factor_work) / kWorkUnitsPerSecond;
  }
  rec.total_time = rec.setup_time + rec.solve_time;
  if (clock == ClockKind::Work && rec.total_time > time_limit && is_solved(rec.status)) rec.status = Status::TimeLimit;
  rec.metric_time = rec.solved() ? rec.total_time : time_limit;
  return rec;
}

std::vector<BenchRecord> run_bench(const BenchSuite& suite) {
  const std::size_t nc = suite.configs.size();
  const std::size_t total = suite.problems.size() * nc;
  std::vector<BenchRecord> records(total);

  auto run_one = [&](std::size_t idx) {
    const GenSpec& spec = suite.problems[idx / nc];
    const BenchConfig& cfg = suite.configs[idx % nc];
    const std::string name = instance_name(spec);
    SolverSettings settings = cfg.settings;
    // Under the work clock the limit is applied after the fact so that the
    // outcome never depends on machine speed.
    settings.time_limit = suite.clock == ClockKind::Wall ? suite.time_limit : HUGE_VAL;
    try {
      const ProblemData problem = generate(spec);
      const SolveResult r = solve(problem, settings);
      records[idx] = make_record(name, cfg.label, r, suite.time_limit, suite.clock);
    } catch (const std::exception& e) {
      BenchRecord rec;
      rec.problem = name;
      rec.config = cfg.label;
      rec.status = Status::NumericalError;
      rec.metric_time = suite.time_limit;
      rec.message = e.what();
      records[idx] = std::move(rec);
    }
  };

  const int jobs = std::max(1, std::min<int>(suite.jobs, static_cast<int>(total)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) run_one(i);
    });
  pool.clear();
  return records;
}

// ----------------------------------------------------------------------- CSV

namespace {

constexpr const char* kHeader =
    "problem,config,status,metric_time,total_time,setup_time,solve_time,iterations,primal_residual,dual_residual,gap,"
    "work,message";

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << kHeader << '\n';
  for (const BenchRecord& r : records) {
    out << sanitize(r.problem) << ',' << sanitize(r.config) << ',' << to_string(r.status) << ','
        << format_double(r.metric_time) << ',' << format_double(r.total_time) << ',' << format_double(r.setup_time)
        << ',' << format_double(r.solve_time) << ',' << r.iterations << ',' << format_double(r.primal_residual) << ','
        << format_double(r.dual_residual) << ',' << format_double(r.gap) << ',' << r.work << ',' << sanitize(r.message)
        << '\n';
  }
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::invalid_argument("missing or unexpected CSV header");
  std::vector<BenchRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 13) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 13 fields");
    try {
      BenchRecord r;
      r.problem = std::string(f[0]);
      r.config = std::string(f[1]);
      r.status = status_from_string(f[2]);
      r.metric_time = parse_double(f[3]);
      r.total_time = parse_double(f[4]);
      r.setup_time = parse_double(f[5]);
      r.solve_time = parse_double(f[6]);
      r.iterations = static_cast<int>(parse_int(f[7]));
      r.primal_residual = parse_double(f[8]);
      r.dual_residual = parse_double(f[9]);
      r.gap = parse_double(f[10]);
      r.work = parse_int(f[11]);
      r.message = std::string(f[12]);
      out.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ------------------------------------------------------------------- metrics

double shifted_geomean(std::span<const double> times, double k) {
  if (times.empty()) throw std::invalid_argument("shifted_geomean of an empty set");
  double prod = 1.0;
  double log_sum = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("negative or NaN time");
    prod *= t + k;
    log_sum += std::log(t + k);
  }
  const double n = static_cast<double>(times.size());
  // The direct product is exact for small sets; logs take over on overflow.
  if (std::isfinite(prod) && prod > 0.0) return std::pow(prod, 1.0 / n) - k;
  return std::exp(log_sum / n) - k;
}

double relative_profile(const Metrics& m, int config, double tau) {
  const Eigen::Index np = m.ratios.rows();
  int count = 0;
  for (Eigen::Index p = 0; p < np; ++p)
    if (m.solved(p, config) && m.ratios(p, config) <= tau) ++count;
  return static_cast<double>(count) / static_cast<double>(np);
}

double absolute_profile(const Metrics& m, int config, double tau) {
  const Eigen::Index np = m.times.rows();
  int count = 0;
  for (Eigen::Index p = 0; p < np; ++p)
    if (m.solved(p, config) && m.times(p, config) <= tau) ++count;
  return static_cast<double>(count) / static_cast<double>(np);
}

namespace {

std::vector<double> log_grid(double lo, double hi, int samples) {
  std::vector<double> g;
  if (!(hi > lo) || samples < 2) return {lo};
  const double step = std::log(hi / lo) / (samples - 1);
  for (int i = 0; i < samples; ++i) g.push_back(lo * std::exp(step * i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace

Metrics compute_metrics(std::span<const BenchRecord> records, double shift, int samples) {
  if (records.empty()) throw std::invalid_argument("no benchmark records");
  Metrics m;
  std::map<std::string, int> pidx, cidx;
  for (const BenchRecord& r : records) {
    if (pidx.emplace(r.problem, static_cast<int>(m.problems.size())).second) m.problems.push_back(r.problem);
    if (cidx.emplace(r.config, static_cast<int>(m.configs.size())).second) m.configs.push_back(r.config);
  }
  const auto np = static_cast<Eigen::Index>(m.problems.size());
  const auto nc = static_cast<Eigen::Index>(m.configs.size());
  m.times = Eigen::MatrixXd::Constant(np, nc, std::nan(""));
  m.solved.setConstant(np, nc, false);
  for (const BenchRecord& r : records) {
    const int p = pidx[r.problem];
    const int c = cidx[r.config];
    if (!std::isnan(m.times(p, c))) throw std::invalid_argument("duplicate record for " + r.problem + "/" + r.config);
    m.times(p, c) = r.metric_time;
    m.solved(p, c) = r.solved();
  }
  if (m.times.hasNaN()) throw std::invalid_argument("records do not cover every problem/config pair");

  m.ratios.resize(np, nc);
  for (Eigen::Index p = 0; p < np; ++p) {
    const double best = m.times.row(p).minCoeff();
    for (Eigen::Index c = 0; c < nc; ++c) m.ratios(p, c) = best > 0.0 ? m.times(p, c) / best : 1.0;
  }

  for (Eigen::Index c = 0; c < nc; ++c) {
    std::vector<double> col(m.times.col(c).data(), m.times.col(c).data() + np);
    m.geomean.push_back(shifted_geomean(col, shift));
  }
  const double best_g = *std::min_element(m.geomean.begin(), m.geomean.end());
  for (double g : m.geomean) m.normalized.push_back(best_g > 0.0 ? g / best_g : 1.0);

  double max_ratio = 1.0;
  double t_lo = HUGE_VAL;
  double t_hi = 0.0;
  for (Eigen::Index p = 0; p < np; ++p)
    for (Eigen::Index c = 0; c < nc; ++c) {
      if (m.solved(p, c)) max_ratio = std::max(max_ratio, m.ratios(p, c));
      if (m.times(p, c) > 0.0) t_lo = std::min(t_lo, m.times(p, c));
      t_hi = std::max(t_hi, m.times(p, c));
    }
  if (!std::isfinite(t_lo)) t_lo = t_hi = 1.0;
  m.tau_relative = log_grid(1.0, max_ratio, samples);
  m.tau_absolute = log_grid(t_lo, t_hi, samples);
  m.relative_profile.resize(static_cast<Eigen::Index>(m.tau_relative.size()), nc);
  m.absolute_profile.resize(static_cast<Eigen::Index>(m.tau_absolute.size()), nc);
  for (Eigen::Index c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < m.tau_relative.size(); ++i)
      m.relative_profile(static_cast<Eigen::Index>(i), c) = relative_profile(m, static_cast<int>(c), m.tau_relative[i]);
    for (std::size_t i = 0; i < m.tau_absolute.size(); ++i)
      m.absolute_profile(static_cast<Eigen::Index>(i), c) = absolute_profile(m, static_cast<int>(c), m.tau_absolute[i]);
  }
  return m;
}

std::string metrics_json(const Metrics& m, int indent) {
  using nlohmann::json;
  json configs = json::array();
  json rel = {{"tau", m.tau_relative}};
  json abs = {{"tau", m.tau_absolute}};
  json ratios = json::object();
  for (std::size_t c = 0; c < m.configs.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const int solved = static_cast<int>(m.solved.col(ci).count());
    configs.push_back({{"label", m.configs[c]},
                       {"shifted_geomean", m.geomean[c]},
                       {"normalized", m.normalized[c]},
                       {"solved", solved},
                       {"failed", static_cast<int>(m.problems.size()) - solved}});
    const Eigen::VectorXd r = m.relative_profile.col(ci);
    const Eigen::VectorXd a = m.absolute_profile.col(ci);
    rel[m.configs[c]] = std::vector<double>(r.data(), r.data() + r.size());
    abs[m.configs[c]] = std::vector<double>(a.data(), a.data() + a.size());
  }
  for (std::size_t p = 0; p < m.problems.size(); ++p) {
    json row = json::object();
    for (std::size_t c = 0; c < m.configs.size(); ++c)
      row[m.configs[c]] = m.ratios(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c));
    ratios[m.problems[p]] = std::move(row);
  }
  json doc{{"configs", std::move(configs)},
           {"ratios", std::move(ratios)},
           {"relative_profile", std::move(rel)},
           {"absolute_profile", std::move(abs)}};
  return doc.dump(indent);
}

}  // namespace conicip

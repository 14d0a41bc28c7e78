#include "conicip/problem_io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace conicip {

using nlohmann::json;

namespace {

constexpr std::int64_t kSizeWarning = 10'000'000;

std::string child(const std::string& ptr, std::string_view key) { return ptr + "/" + std::string(key); }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& field(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.is_object()) throw ParseError(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(child(ptr, key), "missing field");
  return *it;
}

int as_int(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) throw ParseError(ptr, "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < 0 || i > std::numeric_limits<int>::max()) throw ParseError(ptr, "integer out of range");
  return static_cast<int>(i);
}

double as_double(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw ParseError(ptr, "expected a number");
  return v.get<double>();
}

std::vector<int> int_array(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw ParseError(ptr, "expected an array");
  std::vector<int> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_int(v[i], child(ptr, i)));
  return out;
}

std::vector<double> double_array(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw ParseError(ptr, "expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], child(ptr, i)));
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

CsrMatrix parse_csr(const json& v, const std::string& ptr, int rows, int cols) {
  CsrMatrix m(rows, cols);
  m.rowptr = int_array(field(v, ptr, "rowptr"), child(ptr, "rowptr"));
  m.colidx = int_array(field(v, ptr, "colidx"), child(ptr, "colidx"));
  m.values = double_array(field(v, ptr, "values"), child(ptr, "values"));
  if (m.rowptr.size() != static_cast<std::size_t>(rows) + 1)
    throw ParseError(child(ptr, "rowptr"), "length must be rows + 1 = " + std::to_string(rows + 1));
  if (m.values.size() != m.colidx.size()) throw ParseError(child(ptr, "values"), "length differs from colidx");
  try {
    m.check_structure();
  } catch (const std::exception& e) {
    throw ParseError(ptr, e.what());
  }
  return m;
}

ConeKind cone_kind(const json& v, const std::string& ptr) {
  if (!v.is_string()) throw ParseError(ptr, "expected a string");
  const auto& s = v.get_ref<const std::string&>();
  for (ConeKind k : {ConeKind::Zero, ConeKind::Nonneg, ConeKind::SecondOrder, ConeKind::Exponential, ConeKind::Power,
                     ConeKind::PsdTriangle})
    if (s == to_string(k)) return k;
  throw ParseError(ptr, "unknown cone type '" + s + "'");
}

ConeSpec parse_cone(const json& v, const std::string& ptr) {
  ConeSpec c;
  c.kind = cone_kind(field(v, ptr, "type"), child(ptr, "type"));
  c.dim = as_int(field(v, ptr, "dim"), child(ptr, "dim"));
  if (c.kind == ConeKind::Power) c.alpha = as_double(field(v, ptr, "alpha"), child(ptr, "alpha"));
  if (c.kind == ConeKind::PsdTriangle && v.contains("side")) {
    const int side = as_int(v["side"], child(ptr, "side"));
    if (side * (side + 1) / 2 != c.dim) throw ParseError(child(ptr, "side"), "inconsistent with dim");
  }
  return c;
}

json csr_json(const CsrMatrix& m) {
  return json{{"rowptr", m.rowptr}, {"colidx", m.colidx}, {"values", m.values}};
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

ProblemFile parse_problem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("", e.what());
  }
  const std::string root;
  const int n = as_int(field(doc, root, "n"), "/n");
  const int m = as_int(field(doc, root, "m"), "/m");

  ProblemFile out;
  ProblemData& p = out.problem;
  p.P = parse_csr(field(doc, root, "P"), "/P", n, n);
  p.A = parse_csr(field(doc, root, "A"), "/A", m, n);
  if (p.P.nnz() + p.A.nnz() > kSizeWarning)
    std::cerr << "warning: problem has " << p.P.nnz() + p.A.nnz() << " nonzeros\n";
  p.q = to_vector(double_array(field(doc, root, "q"), "/q"));
  p.b = to_vector(double_array(field(doc, root, "b"), "/b"));
  if (p.q.size() != n) throw ParseError("/q", "length must be n = " + std::to_string(n));
  if (p.b.size() != m) throw ParseError("/b", "length must be m = " + std::to_string(m));

  const json& cones = field(doc, root, "cones");
  if (!cones.is_array()) throw ParseError("/cones", "expected an array");
  for (std::size_t i = 0; i < cones.size(); ++i) p.cones.push_back(parse_cone(cones[i], child("/cones", i)));

  if (doc.contains("meta")) {
    const json& meta = doc["meta"];
    if (!meta.is_object()) throw ParseError("/meta", "expected an object");
    if (meta.contains("name")) {
      if (!meta["name"].is_string()) throw ParseError("/meta/name", "expected a string");
      out.meta.name = meta["name"].get<std::string>();
    }
    if (meta.contains("seed")) {
      if (!meta["seed"].is_number_unsigned()) throw ParseError("/meta/seed", "expected a nonnegative integer");
      out.meta.seed = meta["seed"].get<std::uint64_t>();
    }
  }
  validate(p);
  return out;
}

ProblemFile read_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string emit_problem(const ProblemFile& file, int indent) {
  const ProblemData& p = file.problem;
  json cones = json::array();
  for (const ConeSpec& c : p.cones) {
    json e{{"type", to_string(c.kind)}, {"dim", c.dim}};
    if (c.kind == ConeKind::Power) e["alpha"] = c.alpha;
    if (c.kind == ConeKind::PsdTriangle) e["side"] = c.psd_side();
    cones.push_back(std::move(e));
  }
  json doc{{"n", p.n()},
           {"m", p.m()},
           {"P", csr_json(p.P)},
           {"A", csr_json(p.A)},
           {"q", vector_json(p.q)},
           {"b", vector_json(p.b)},
           {"cones", std::move(cones)},
           {"meta", {{"name", file.meta.name}, {"seed", file.meta.seed}}}};
  return doc.dump(indent);
}

void write_problem(const std::string& path, const ProblemFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << emit_problem(file) << '\n';
  if (!out) throw Error("write failed for " + path);
}

std::string result_to_json(const SolveResult& r, int indent) {
  // JSON has no infinities; non-finite scalars become null.
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json doc{{"status", to_string(r.status)},
           {"iterations", r.iterations},
           {"primal_objective", num(r.primal_objective)},
           {"dual_objective", num(r.dual_objective)},
           {"primal_residual", num(r.measures.primal)},
           {"dual_residual", num(r.measures.dual)},
           {"gap", num(r.measures.gap)},
           {"tau", num(r.tau)},
           {"kappa", num(r.kappa)},
           {"setup_seconds", r.setup_seconds},
           {"solve_seconds", r.solve_seconds},
           {"factor_work", r.factor_work},
           {"x", vector_json(r.x)},
           {"z", vector_json(r.z)},
           {"s", vector_json(r.s)}};
  if (r.certificate.size() > 0) doc["certificate"] = vector_json(r.certificate);
  if (!r.message.empty()) doc["message"] = r.message;
  return doc.dump(indent);
}

}  // namespace conicip

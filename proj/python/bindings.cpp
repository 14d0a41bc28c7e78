#include "conicip/bench.hpp"
#include "conicip/generators.hpp"
#include "conicip/problem_io.hpp"
#include "conicip/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace conicip;

namespace {

CsrMatrix make_csr(std::pair<int, int> shape, std::vector<int> indptr, std::vector<int> indices,
                   std::vector<double> data) {
  CsrMatrix m;
  m.nrows = shape.first;
  m.ncols = shape.second;
  m.rowptr = std::move(indptr);
  m.colidx = std::move(indices);
  m.values = std::move(data);
  m.check_structure();
  return m;
}

ProblemData make_problem(const CsrMatrix& P, const CsrMatrix& A, const Vector& q, const Vector& b,
                         const std::vector<ConeSpec>& cones) {
  ProblemData p{P, A, q, b, cones};
  validate(p);
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conic interior point solver";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<PatternMismatch>(m, "PatternMismatch", base.ptr());
  py::register_exception<InfeasibleBoxBudget>(m, "InfeasibleBoxBudget", base.ptr());

  py::enum_<Status>(m, "Status")
      .value("Unsolved", Status::Unsolved)
      .value("Optimal", Status::Optimal)
      .value("PrimalInfeasible", Status::PrimalInfeasible)
      .value("DualInfeasible", Status::DualInfeasible)
      .value("AlmostOptimal", Status::AlmostOptimal)
      .value("MaxIterations", Status::MaxIterations)
      .value("TimeLimit", Status::TimeLimit)
      .value("NumericalError", Status::NumericalError)
      .value("InsufficientProgress", Status::InsufficientProgress);

  py::enum_<Precision>(m, "Precision").value("Full", Precision::Full).value("Mixed", Precision::Mixed);

  py::enum_<ConeKind>(m, "ConeKind")
      .value("Zero", ConeKind::Zero)
      .value("Nonneg", ConeKind::Nonneg)
      .value("SecondOrder", ConeKind::SecondOrder)
      .value("Exponential", ConeKind::Exponential)
      .value("Power", ConeKind::Power)
      .value("PsdTriangle", ConeKind::PsdTriangle);

  py::class_<ConeSpec>(m, "Cone")
      .def_readonly("kind", &ConeSpec::kind)
      .def_readonly("dim", &ConeSpec::dim)
      .def_readonly("alpha", &ConeSpec::alpha)
      .def_static("zero", &ConeSpec::zero, py::arg("dim"))
      .def_static("nonneg", &ConeSpec::nonneg, py::arg("dim"))
      .def_static("soc", &ConeSpec::soc, py::arg("dim"))
      .def_static("exp", &ConeSpec::exp)
      .def_static("pow", &ConeSpec::pow, py::arg("alpha"))
      .def_static("psd", &ConeSpec::psd, py::arg("side"))
      .def("__eq__", [](const ConeSpec& a, const ConeSpec& b) { return a == b; })
      .def("__repr__", [](const ConeSpec& c) {
        std::string r = "Cone." + std::string(to_string(c.kind)) + "(" + std::to_string(c.dim);
        if (c.kind == ConeKind::Power) r += ", alpha=" + std::to_string(c.alpha);
        return r + ")";
      });

  py::class_<CsrMatrix>(m, "CsrMatrix")
      .def(py::init(&make_csr), py::arg("shape"), py::arg("indptr"), py::arg("indices"), py::arg("data"))
      .def_property_readonly("shape", [](const CsrMatrix& a) { return std::make_pair(a.nrows, a.ncols); })
      .def_property_readonly("indptr", [](const CsrMatrix& a) { return py::array_t<int>(a.rowptr.size(), a.rowptr.data()); })
      .def_property_readonly("indices", [](const CsrMatrix& a) { return py::array_t<int>(a.colidx.size(), a.colidx.data()); })
      .def_property_readonly("data", [](const CsrMatrix& a) { return py::array_t<double>(a.values.size(), a.values.data()); })
      .def_property_readonly("nnz", &CsrMatrix::nnz)
      .def("to_dense", &CsrMatrix::to_dense);

  py::class_<ProblemData>(m, "Problem")
      .def(py::init(&make_problem), py::arg("P"), py::arg("A"), py::arg("q"), py::arg("b"), py::arg("cones"))
      .def_readonly("P", &ProblemData::P)
      .def_readonly("A", &ProblemData::A)
      .def_readonly("q", &ProblemData::q)
      .def_readonly("b", &ProblemData::b)
      .def_readonly("cones", &ProblemData::cones)
      .def_property_readonly("n", &ProblemData::n)
      .def_property_readonly("m", &ProblemData::m)
      .def("__eq__", [](const ProblemData& a, const ProblemData& b) { return a == b; });

  py::class_<SolverSettings>(m, "Settings")
      .def(py::init<>())
      .def_readwrite("eps_feas", &SolverSettings::eps_feas)
      .def_readwrite("eps_inf", &SolverSettings::eps_inf)
      .def_readwrite("max_iter", &SolverSettings::max_iter)
      .def_readwrite("time_limit", &SolverSettings::time_limit)
      .def_readwrite("precision", &SolverSettings::precision)
      .def_readwrite("static_reg", &SolverSettings::static_reg)
      .def_readwrite("dynamic_reg", &SolverSettings::dynamic_reg)
      .def_readwrite("equilibrate", &SolverSettings::equilibrate)
      .def_readwrite("verbose", &SolverSettings::verbose)
      .def_readwrite("threads", &SolverSettings::threads);

  py::class_<SolveResult>(m, "Result")
      .def_readonly("status", &SolveResult::status)
      .def_readonly("x", &SolveResult::x)
      .def_readonly("z", &SolveResult::z)
      .def_readonly("s", &SolveResult::s)
      .def_readonly("certificate", &SolveResult::certificate)
      .def_readonly("primal_objective", &SolveResult::primal_objective)
      .def_readonly("dual_objective", &SolveResult::dual_objective)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("tau", &SolveResult::tau)
      .def_readonly("kappa", &SolveResult::kappa)
      .def_readonly("setup_seconds", &SolveResult::setup_seconds)
      .def_readonly("solve_seconds", &SolveResult::solve_seconds)
      .def_readonly("factor_work", &SolveResult::factor_work)
      .def_readonly("message", &SolveResult::message)
      .def_property_readonly("solved", [](const SolveResult& r) { return is_solved(r.status); })
      .def("to_json", &result_to_json, py::arg("indent") = 2);

  py::class_<Solver>(m, "Solver")
      .def(py::init<ProblemData, SolverSettings>(), py::arg("problem"), py::arg("settings") = SolverSettings{})
      .def("solve", &Solver::solve, py::call_guard<py::gil_scoped_release>())
      .def(
          "update",
          [](Solver& s, std::optional<CsrMatrix> P, std::optional<CsrMatrix> A, std::optional<Vector> q,
             std::optional<Vector> b) {
            s.update_data(P ? &*P : nullptr, A ? &*A : nullptr, q ? &*q : nullptr, b ? &*b : nullptr);
          },
          py::arg("P") = py::none(), py::arg("A") = py::none(), py::arg("q") = py::none(), py::arg("b") = py::none())
      .def_property_readonly("symbolic_factorizations", &Solver::symbolic_factorizations)
      .def_property_readonly("problem", &Solver::problem);

  m.def(
      "solve", [](const ProblemData& p, const SolverSettings& s) { return solve(p, s); }, py::arg("problem"),
      py::arg("settings") = SolverSettings{}, py::call_guard<py::gil_scoped_release>());

  m.def(
      "generate",
      [](const std::string& family, int n, std::uint64_t seed, int k, int T) {
        return generate({family_from_string(family), n, k, T, seed});
      },
      py::arg("family"), py::arg("n"), py::arg("seed") = 0, py::arg("k") = 2, py::arg("T") = 1);

  m.def("parse_problem", [](const std::string& text) { return parse_problem(text).problem; }, py::arg("text"));
  m.def("read_problem", [](const std::string& path) { return read_problem(path).problem; }, py::arg("path"));
  m.def(
      "emit_problem", [](const ProblemData& p, int indent) { return emit_problem({p, {}}, indent); },
      py::arg("problem"), py::arg("indent") = -1);

  m.def(
      "shifted_geomean", [](const std::vector<double>& t, double k) { return shifted_geomean(t, k); },
      py::arg("times"), py::arg("shift") = 1.0);
}

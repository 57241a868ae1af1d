// Python module _core. Rationals cross the boundary as "p/q" strings and
// structured results as JSON text; the package wrapper converts both.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flab/checks.hpp"
#include "flab/constraint.hpp"
#include "flab/error.hpp"
#include "flab/fuzz.hpp"
#include "flab/scenario.hpp"

namespace py = pybind11;
using namespace flab;

namespace {

using StrMatrix = std::vector<std::vector<std::string>>;

Vec to_vec(const std::vector<std::string>& xs) {
  Vec out;
  for (const auto& x : xs) out.push_back(parse_rational(x));
  return out;
}

std::vector<std::string> from_vec(const Vec& v) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(format_rational(x));
  return out;
}

Matrix to_matrix(const StrMatrix& rows) {
  std::vector<Vec> vs;
  for (const auto& r : rows) vs.push_back(to_vec(r));
  if (vs.empty()) throw Error(ErrorKind::DimensionMismatch, "empty matrix");
  return Matrix::from_rows(vs);
}

StrMatrix from_matrix(const Matrix& m) {
  StrMatrix out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(from_vec(m.row(i)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact filtration and martingale checks on finite event trees";
  static py::exception<Error> error(m, "FiltrationLabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("version", [] { return std::string(version()); });

  m.def(
      "run_scenario",
      [](const std::string& scenario, const std::vector<std::string>& checks) {
        return run_scenario(json::parse(scenario), checks).dump();
      },
      py::arg("scenario"), py::arg("checks") = std::vector<std::string>{});

  m.def("check_mrp", [](const std::string& scenario) { return check_mrp_report(parse_scenario(json::parse(scenario))).dump(); });

  m.def("explain", &explain);

  m.def(
      "random_tree",
      [](std::uint64_t seed, int horizon, int branching, int denominator) {
        RandomTreeParams p;
        p.horizon = horizon;
        p.max_branching = branching;
        p.denominator_bound = denominator;
        return tree_to_json(*random_tree(seed, p)).dump();
      },
      py::arg("seed"), py::arg("horizon") = 2, py::arg("branching") = 3, py::arg("denominator") = 6);

  m.def("solve_accessible_k", [](const StrMatrix& gamma, const std::vector<std::string>& p) {
    return from_matrix(solve_accessible_K(to_matrix(gamma), to_vec(p)));
  });

  m.def("solve_inaccessible_k", [](const StrMatrix& gamma) { return from_matrix(solve_inaccessible_K(to_matrix(gamma))); });

  m.def("conditional_expectation", [](const std::string& tree, int t, const std::vector<std::string>& x) {
    Scenario s = parse_scenario(json::parse(tree));
    Filtration f = base_filtration(s.tree);
    if (t < 0 || t > f.horizon()) throw Error(ErrorKind::TimeOutOfRange, "t=" + std::to_string(t));
    return from_vec(broadcast(f, t, conditional_expectation(f, t, to_vec(x))));
  });

  m.def(
      "fuzz",
      [](std::uint64_t first_seed, int count, int horizon, int branching, int deficit, int threads, bool inject_fault) {
        FuzzParams p;
        p.first_seed = first_seed;
        p.count = count;
        p.tree.horizon = horizon;
        p.tree.max_branching = branching;
        p.basis_deficit = deficit;
        p.threads = threads;
        p.inject_fault = inject_fault;
        py::gil_scoped_release release;
        return fuzz(p).dump();
      },
      py::arg("first_seed") = 0, py::arg("count") = 10, py::arg("horizon") = 2, py::arg("branching") = 3,
      py::arg("deficit") = 0, py::arg("threads") = 1, py::arg("inject_fault") = false);
}

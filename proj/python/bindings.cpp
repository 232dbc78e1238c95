#include <limits>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ewire/driver.hpp"
#include "ewire/parser.hpp"
#include "ewire/serialize.hpp"

namespace py = pybind11;
using namespace ewire;

namespace {

EvalOptions options(const std::string& mode, std::int64_t fuel) {
  if (mode != "cpu" && mode != "cpsu") throw py::value_error("mode must be 'cpu' or 'cpsu'");
  EvalOptions o;
  o.mode = mode == "cpsu" ? Mode::CPSU : Mode::CPU;
  o.fuel = fuel;
  return o;
}

// Evaluation may unfold deep fixpoints; run it on a large stack without the GIL.
template <class F>
auto guarded(F&& f) {
  std::optional<decltype(f())> out;
  {
    py::gil_scoped_release nogil;
    run_with_stack([&] { out.emplace(f()); });
  }
  return std::move(*out);
}

struct PySuperOp {
  SuperOp op;
};

}  // namespace

PYBIND11_MODULE(_ewire, m) {
  m.doc() = "EWire: typecheck, denote, normalize and run quantum circuit programs";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<TypeError>(m, "TypeError", base.ptr());
  py::register_exception<EvalError>(m, "EvalError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());

  py::class_<PySuperOp>(m, "SuperOp")
      .def_property_readonly("source_blocks", [](const PySuperOp& s) { return s.op.source.blocks(); })
      .def_property_readonly("target_blocks", [](const PySuperOp& s) { return s.op.target.blocks(); })
      .def_property_readonly("matrix", [](const PySuperOp& s) { return Eigen::MatrixXcd(s.op.matrix); })
      .def("is_cp", [](const PySuperOp& s, double tol) { return is_cp(s.op, tol); }, py::arg("tol") = 1e-9)
      .def("is_unital", [](const PySuperOp& s, double tol) { return is_unital(s.op, tol); }, py::arg("tol") = 1e-9)
      .def("is_subunital", [](const PySuperOp& s, double tol) { return is_subunital(s.op, tol); },
           py::arg("tol") = 1e-9)
      .def("to_json", [](const PySuperOp& s) { return superop_to_json(s.op).dump(); })
      .def("__repr__", [](const PySuperOp& s) {
        return "<SuperOp " + std::to_string(s.op.matrix.rows()) + "x" + std::to_string(s.op.matrix.cols()) + ">";
      });

  m.def("max_dim", &max_element_dim, "Cap on the element dimension of any algebra.");
  m.def("set_max_dim", &set_max_element_dim, py::arg("dim"));

  m.def(
      "check",
      [](const std::string& source) {
        Typechecker tc(parse_program(source));
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [name, type] : tc.declaration_types()) out.emplace_back(name, pretty_print(type));
        return out;
      },
      py::arg("source"), "Declaration names and types, in program order.");

  m.def(
      "run",
      [](const std::string& source, std::optional<std::string> entry, const std::string& mode, std::int64_t fuel,
         std::int64_t shots, std::uint64_t seed) {
        Typechecker tc(parse_program(source));
        const std::string e = resolve_entry(tc.elaborated(), entry);
        const EvalOptions o = options(mode, fuel);
        Distribution d = guarded([&] { return run_entry(tc, e, o); });
        if (shots <= 0) return distribution_to_json(d).dump();
        auto counts = sample(d, seed, shots);
        return distribution_to_json(d, &counts).dump();
      },
      py::arg("source"), py::arg("entry") = py::none(), py::arg("mode") = "cpu", py::arg("fuel") = 10000,
      py::arg("shots") = 0, py::arg("seed") = 0, "Exact output distribution as a JSON string.");

  m.def(
      "denote",
      [](const std::string& source, std::optional<std::string> entry, const std::string& mode, std::int64_t fuel,
         std::optional<int> qlist_size) {
        Typechecker tc(parse_program(source));
        const std::string e = resolve_entry(tc.elaborated(), entry);
        const EvalOptions o = options(mode, fuel);
        return PySuperOp{guarded([&] { return denote_entry(tc, e, o, qlist_size); })};
      },
      py::arg("source"), py::arg("entry") = py::none(), py::arg("mode") = "cpu", py::arg("fuel") = 10000,
      py::arg("qlist_size") = py::none());

  m.def(
      "normalize",
      [](const std::string& source, std::optional<std::string> entry, bool copower_rules, int max_steps) {
        Typechecker tc(parse_program(source));
        NormalizeOptions o;
        o.copower_rules = copower_rules;
        o.max_steps = max_steps;
        EntryNormalization n = normalize_entry(tc, resolve_entry(tc.elaborated(), entry), o);
        std::vector<std::string> rules;
        for (const auto& t : n.trace) rules.emplace_back(to_string(t.rule));
        return py::make_tuple(n.text, rules, n.step_limit);
      },
      py::arg("source"), py::arg("entry") = py::none(), py::arg("copower_rules") = false,
      py::arg("max_steps") = 10000, "(normal form text, rule trace, hit step limit)");

  m.def(
      "equiv",
      [](const std::string& source, const std::string& e1, const std::string& e2, const std::string& mode,
         std::int64_t fuel, std::optional<int> qlist_size, double tol) -> std::pair<bool, double> {
        Typechecker tc(parse_program(source));
        const EvalOptions o = options(mode, fuel);
        SuperOp f = guarded([&] { return denote_entry(tc, e1, o, qlist_size); });
        SuperOp g = guarded([&] { return denote_entry(tc, e2, o, qlist_size); });
        if (!(f.source == g.source) || !(f.target == g.target))
          return {false, std::numeric_limits<double>::infinity()};
        const double d = frobenius_distance(f, g);
        return {d <= tol, d};
      },
      py::arg("source"), py::arg("e1"), py::arg("e2"), py::arg("mode") = "cpu", py::arg("fuel") = 10000,
      py::arg("qlist_size") = py::none(), py::arg("tol") = 1e-9, "(equivalent, Frobenius distance)");
}

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <map>
#include <string>

#include "bdlab/app.hpp"
#include "bdlab/besseldelta.hpp"
#include "bdlab/error.hpp"
#include "bdlab/forms.hpp"
#include "bdlab/lfunc.hpp"
#include "bdlab/pipeline.hpp"
#include "bdlab/special.hpp"

namespace py = pybind11;
using namespace bdlab;

namespace {

forms::CoefficientTable table_for(const std::string& label, long n_max, double eta) {
    auto t = forms::coefficients_by_label(label, n_max);
    return eta == 0.0 ? t : t.with_eta(eta);
}

}  // namespace

PYBIND11_MODULE(_bdlab, m) {
    m.doc() = "Numerical checks for GL(2) exponential sums and L-values";

    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CacheError>(m, "CacheError", PyExc_IOError);

    m.def("coefficients",
          [](const std::string& label, long n_max) { return forms::coefficients_by_label(label, n_max).lambdas(); },
          py::arg("label"), py::arg("n_max"), "normalized lambda(0..n_max) for 'delta' or '11a'");
    m.def("bessel_j", &special::bessel_j, py::arg("order"), py::arg("x"));
    m.def("log_gamma", &special::log_gamma, py::arg("s"));
    m.def("kloosterman", &pipeline::kloosterman, py::arg("n"), py::arg("r"), py::arg("p"));
    m.def("analytic_conductor",
          [](const std::string& label, double t) {
              return lfunc::analytic_conductor(forms::coefficients_by_label(label, 2).descriptor(), t);
          },
          py::arg("label"), py::arg("t"));
    m.def("weber_identity",
          [](double a, double b, double X, int k) {
              auto r = besseldelta::weber_identity_check(a, b, X, k);
              return py::dict(py::arg("lhs") = r.lhs, py::arg("rhs") = r.rhs, py::arg("rel_diff") = r.rel_diff);
          },
          py::arg("a"), py::arg("b"), py::arg("X"), py::arg("k"));
    m.def("calibrate_eta",
          [](const std::string& label, long c, double Y, long n_max) {
              py::gil_scoped_release nogil;
              auto e = pipeline::calibrate_eta(forms::coefficients_by_label(label, n_max), c, Y);
              py::gil_scoped_acquire gil;
              return py::dict(py::arg("eta") = e.eta, py::arg("winner") = e.winner_residual,
                              py::arg("loser") = e.loser_residual);
          },
          py::arg("label"), py::arg("c"), py::arg("Y") = 1000.0, py::arg("n_max") = 40000);
    m.def("voronoi_check",
          [](const std::string& label, long a, long c, double Y, double eta, long n_max) {
              py::gil_scoped_release nogil;
              auto r = pipeline::voronoi_check(forms::coefficients_by_label(label, n_max), a, c, Y, eta);
              py::gil_scoped_acquire gil;
              return py::dict(py::arg("lhs") = r.lhs, py::arg("rhs") = r.rhs, py::arg("rel_diff") = r.rel_diff,
                              py::arg("dual_terms") = r.dual_terms, py::arg("truncated") = r.truncated);
          },
          py::arg("label"), py::arg("a"), py::arg("c"), py::arg("Y") = 1000.0, py::arg("eta") = 1.0,
          py::arg("n_max") = 40000);
    m.def("lvalue",
          [](const std::string& label, double t, double eta, long n_max, const std::string& cutoff) {
              lfunc::Cutoff F = cutoff == "f1"        ? lfunc::cutoff_f1()
                                : cutoff == "f2"      ? lfunc::cutoff_f2()
                                : cutoff == "literal" ? lfunc::cutoff_literal()
                                                      : throw PreconditionError("cutoff must be f1, f2 or literal");
              auto p = lfunc::afe_lvalue(table_for(label, n_max, eta), t, F);
              return py::dict(py::arg("t") = p.t, py::arg("value") = p.value, py::arg("conductor") = p.conductor,
                              py::arg("cutoff") = p.cutoff_id, py::arg("truncation_n") = p.truncation_n);
          },
          py::arg("label"), py::arg("t"), py::arg("eta"), py::arg("n_max") = 60000, py::arg("cutoff") = "f1",
          "L(1/2 + it); eta is the calibrated Voronoi constant (+1 for delta, -1 for 11a)");
    m.def("run",
          [](const std::map<std::string, std::string>& settings) {
              app::RunConfig cfg;
              for (const auto& [k, v] : settings) cfg.set(k, v);
              py::gil_scoped_release nogil;
              return app::run(cfg, std::cerr);
          },
          py::arg("settings"), "runs suites from key=value settings; returns the exit status");
}

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "edgelab/cli.hpp"
#include "edgelab/deformation.hpp"
#include "edgelab/dirac.hpp"
#include "edgelab/nash_moser.hpp"
#include "edgelab/spectral.hpp"

namespace py = pybind11;
using namespace edgelab;
using spectral::FourierSeries;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

// Coefficients are passed as arrays of length 2N+1 ordered l = -N..N.
FourierSeries to_series(const CArray& a) {
    if (a.ndim() != 1 || a.shape(0) % 2 == 0)
        throw py::value_error("expected a 1-d array of odd length 2N+1 (modes -N..N)");
    const int N = int(a.shape(0) / 2);
    FourierSeries s(N);
    auto r = a.unchecked<1>();
    for (int l = -N; l <= N; ++l) s[l] = r(l + N);
    return s;
}

py::array_t<Complex> to_array(const FourierSeries& s) {
    const int N = s.order();
    py::array_t<Complex> out(2 * N + 1);
    auto w = out.mutable_unchecked<1>();
    for (int l = -N; l <= N; ++l) w(l + N) = s[l];
    return out;
}

dirac::LeadingData leading(const CArray& c, const CArray& d) { return {to_series(c), to_series(d)}; }

py::dict trace_dict(const nm::SolveResult& r) {
    py::dict out;
    out["status"] = nm::to_string(r.status);
    out["converged"] = r.converged();
    out["iterations"] = r.iterations();
    out["final_residual"] = r.final_residual();
    std::vector<double> res;
    for (const auto& row : r.trace.rows) res.push_back(row.res_m0);
    out["residuals"] = res;
    out["solution"] = to_array(r.x.series);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Flat-model spectral toolkit for harmonic spinors along an edge";

    m.def("hilbert_transform", [](const CArray& u) { return to_array(spectral::hilbert_transform(to_series(u))); },
          py::arg("coeffs"));
    m.def("fractional_resolvent",
          [](const CArray& u, double s) { return to_array(spectral::fractional_resolvent(to_series(u), s)); },
          py::arg("coeffs"), py::arg("s"), "Multiplier (1 + l^2)^{-s}.");
    m.def("graded_norm", [](const CArray& u, double mm) { return spectral::graded_norm(to_series(u), mm); },
          py::arg("coeffs"), py::arg("m"));
    m.def("smooth", [](const CArray& u, double eps) { return to_array(spectral::SmoothingFamily{}.apply(to_series(u), eps)); },
          py::arg("coeffs"), py::arg("eps"));
    m.def("multiply",
          [](const CArray& a, const CArray& b) { return to_array(spectral::multiply(to_series(a), to_series(b))); },
          py::arg("a"), py::arg("b"));

    m.def("L_op", [](const CArray& xi, const CArray& c, const CArray& d) {
              return to_array(deform::L_op(to_series(xi), leading(c, d)));
          },
          py::arg("xi"), py::arg("c"), py::arg("d"));
    m.def("T_op", [](const CArray& eta, const CArray& c, const CArray& d, double z0_length) {
              return to_array(deform::T_op(to_series(eta), leading(c, d), z0_length));
          },
          py::arg("eta"), py::arg("c"), py::arg("d"), py::arg("z0_length") = kTwoPi);
    m.def("min_modulus_sq", [](const CArray& c, const CArray& d) { return leading(c, d).min_modulus_sq(); },
          py::arg("c"), py::arg("d"));

    m.def("euclidean_obstruction_mode",
          [](double l, double R, int points) {
              const auto g = radial::RadialGrid::geometric(R, points);
              const auto mode = dirac::euclidean_obstruction_mode(l, g);
              return py::make_tuple(mode.r, mode.plus, mode.minus);
          },
          py::arg("l"), py::arg("R") = 8.0, py::arg("points") = 400, "Returns (r, psi_plus, psi_minus).");
    m.def("solve_mode_ode",
          [](int k, double l, double R, int points) {
              const auto g = radial::RadialGrid::geometric(R, points);
              const auto sol = dirac::solve_mode_ode(k, l, dirac::BoundaryData::decaying(), g);
              py::dict out;
              out["r"] = sol.mode.r;
              out["plus"] = sol.mode.plus;
              out["minus"] = sol.mode.minus;
              out["residual"] = sol.residual;
              out["exponential_growth"] = sol.exponential_growth;
              return out;
          },
          py::arg("k"), py::arg("l"), py::arg("R") = 8.0, py::arg("points") = 900, "Decaying branch of one mode.");

    m.def("rough_data", [](int order, double decay, double amplitude, unsigned long long seed) {
              return to_array(nm::rough_data(order, decay, amplitude, seed));
          },
          py::arg("order"), py::arg("decay"), py::arg("amplitude"), py::arg("seed"));
    m.def("toy_solve",
          [](const CArray& f, double eps0, bool smoothed, double theta, double tol, int max_iter) {
              const auto s = to_series(f);
              const auto p = nm::toy_problem(eps0, s.order());
              nm::Settings set;
              set.theta = theta;
              set.tol = tol;
              set.max_iter = max_iter;
              const nm::Element e{s, 0.0};
              return trace_dict(smoothed ? nm::nash_moser_solve(*p, e, set) : nm::plain_newton_solve(*p, e, set));
          },
          py::arg("f"), py::arg("eps0") = 0.1, py::arg("smoothed") = true, py::arg("theta") = 1.3,
          py::arg("tol") = 1e-8, py::arg("max_iter") = 30,
          "Solves u + eps0 (u^2)' = f from zero; returns status, residuals and the solution.");

    m.def("commands", &cli::commands);
    m.def("config_keys", &cli::config_keys);
    m.def("_run_experiment_json",
          [](const std::string& experiment, const std::map<std::string, std::string>& overrides) {
              std::ostringstream text;
              for (const auto& [k, v] : overrides) text << k << " = " << v << "\n";
              cli::ExperimentConfig cfg;
              try {
                  cfg = cli::parse_config(text.str(), experiment);
              } catch (const cli::ConfigError& e) {
                  throw py::value_error(e.what());
              }
              py::gil_scoped_release release;
              return cli::run_experiment(cfg).summary(cfg).dump();
          },
          py::arg("experiment"), py::arg("overrides"));

    py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
}

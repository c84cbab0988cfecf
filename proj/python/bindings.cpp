#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smallgain/cli.hpp"
#include "smallgain/cone_analysis.hpp"
#include "smallgain/discrete_sim.hpp"
#include "smallgain/error.hpp"
#include "smallgain/gain_operator.hpp"
#include "smallgain/ode_sim.hpp"

namespace py = pybind11;
using namespace smallgain;

namespace {

using Matrix = std::vector<std::vector<double>>;

GainOperator linear_operator(const Matrix& a, const std::string& mode) {
  const std::size_t n = a.size();
  FiniteGains g(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw Error(ErrorKind::invalid_input, "matrix must be square");
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j] != 0.0) g.set(i, j, ComparisonFunction::linear(a[i][j]));
  }
  return GainOperator(GainFamily(std::move(g), aggregation_from_string(mode)));
}

NetworkKind ode_kind(const std::string& kind, double a, double b) {
  if (kind == "linear_invariant") return LinearInvariant{a, b};
  if (kind == "cubic_max") return CubicMax{a, b};
  throw Error(ErrorKind::invalid_input, "kind must be linear_invariant or cubic_max");
}

}  // namespace

PYBIND11_MODULE(_smallgain, m) {
  m.doc() = "Small-gain analysis of monotone gain networks";
  m.attr("__version__") = cli::kVersion;
  py::register_exception<Error>(m, "SmallGainError", PyExc_ValueError);

  m.def(
      "run_config",
      [](const std::string& config, std::optional<std::uint64_t> seed, const std::string& command) {
        const auto out = cli::execute_text(config, seed, cli::Format::Json, command);
        return py::make_tuple(out.exit_code, out.output, out.diagnostics);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("command") = "",
      "Runs one CLI command from a JSON string; returns (exit_code, report, diagnostics).");

  m.def(
      "spectral_radius",
      [](const Matrix& a, const std::string& mode) {
        const auto est = spectral_radius(linear_operator(a, mode));
        py::dict d;
        d["value"] = est.value;
        d["method"] = est.method;
        d["iterations"] = est.iterations;
        d["converged"] = est.converged;
        return d;
      },
      py::arg("matrix"), py::arg("mode") = "max");

  m.def(
      "apply",
      [](const Matrix& a, const std::vector<double>& s, const std::string& mode) {
        return linear_operator(a, mode).apply_raw(s);
      },
      py::arg("matrix"), py::arg("s"), py::arg("mode") = "max");

  m.def(
      "kleene_star",
      [](const Matrix& a, const std::vector<double>& s) {
        const auto op = linear_operator(a, "max");
        const auto k = kleene_star(op, op.make(s));
        return py::make_tuple(k.closure.values(), std::string(to_string(k.status)), k.iterations);
      },
      py::arg("matrix"), py::arg("s"));

  m.def(
      "strict_decay_point",
      [](const Matrix& a, double eps) {
        const auto c = strict_decay_point(linear_operator(a, "max"), eps);
        return py::make_tuple(c.s0.values(), c.lambda, c.residual);
      },
      py::arg("matrix"), py::arg("epsilon"));

  m.def(
      "estimate_eta",
      [](const Matrix& a, const std::vector<double>& radii, std::size_t samples, std::uint64_t seed,
         const std::string& mode) {
        const auto e = estimate_eta(linear_operator(a, mode), radii, samples, seed);
        return py::make_tuple(e.eta_values, e.eta_monotone);
      },
      py::arg("matrix"), py::arg("radii"), py::arg("samples"), py::arg("seed"), py::arg("mode") = "max");

  m.def(
      "iterate",
      [](const Matrix& a, const std::vector<double>& x0, const std::vector<double>& u, std::size_t K) {
        const auto map = MonotoneMap::matrix(a);
        const auto t = iterate(map, map.make(x0), DiscreteInput::constant_input(map.make(u)), K);
        std::vector<std::vector<double>> states;
        for (const auto& s : t.states) states.push_back(s.values());
        return states;
      },
      py::arg("matrix"), py::arg("x0"), py::arg("u"), py::arg("K"));

  m.def(
      "simulate_ode",
      [](const std::string& kind, double a, double b, std::size_t N, double x0, double u, double dt, double T) {
        OdeRun run;
        run.kind = ode_kind(kind, a, b);
        run.N = N;
        run.x0 = constant_profile(N, x0);
        run.u = InputSignal::constant(u);
        run.dt = dt;
        run.T = T;
        const auto traj = simulate(run);
        return py::make_tuple(traj.times, traj.sup_norms, traj.blew_up);
      },
      py::arg("kind"), py::arg("a"), py::arg("b"), py::arg("N") = 64, py::arg("x0") = 1.0, py::arg("u") = 0.0,
      py::arg("dt") = 1e-3, py::arg("T") = 10.0);

  m.def(
      "reference_profile",
      [](const std::string& kind, double a, double b, double x_star, double t) {
        return reference_profile(ode_kind(kind, a, b), x_star, t);
      },
      py::arg("kind"), py::arg("a"), py::arg("b"), py::arg("x_star"), py::arg("t"));
}

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nefk/errors.hpp"
#include "nefk/io.hpp"
#include "nefk/pipeline.hpp"

namespace py = pybind11;
using namespace nefk;

namespace {

RunConfig parse(const std::string& config_json, const std::vector<std::string>& overrides) {
  RunConfig c = config_json.empty() ? RunConfig{} : config_from_json(config_json);
  for (const auto& o : overrides) apply_override(c, o);
  c.validate();
  return c;
}

py::dict components(const ContourKernel& k) {
  const ComponentSet cs = extract_components(k);
  py::dict d;
  d["lesser"] = cs.lesser;
  d["greater"] = cs.greater;
  d["retarded"] = cs.retarded;
  d["matsubara"] = cs.matsubara;
  d["mixed_right"] = cs.mixed_right;
  return d;
}

py::dict trajectory(const Trajectory& t) {
  py::dict d;
  d["t"] = t.times;
  d["values"] = t.values;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nefk, m) {
  m.doc() = "Transient DMFT for the field-driven Falicov-Kimball model";
  m.attr("__version__") = NEFK_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<PatchError>(m, "PatchError", PyExc_RuntimeError);
  py::register_exception<SingularKernel>(m, "SingularKernel", PyExc_ArithmeticError);

  m.def(
      "resolve_config",
      [](const std::string& config_json, const std::vector<std::string>& overrides) {
        return config_to_json(parse(config_json, overrides));
      },
      py::arg("config_json") = "", py::arg("overrides") = std::vector<std::string>{},
      "Validated configuration (JSON text) after applying section.name=value overrides.");

  m.def("faddeeva", &faddeeva, py::arg("z"));
  m.def("hilbert_gaussian", &hilbert_gaussian, py::arg("z"), py::arg("scale") = 1.0);

  m.def(
      "gauss_hermite_joint",
      [](int order, double prune) {
        const QuadratureGrid q = gauss_hermite_joint(order, prune);
        return py::make_tuple(q.eps, q.epsb, q.weight);
      },
      py::arg("order"), py::arg("prune") = 0.0, "Joint (eps, eps_bar, weight) nodes of the Gaussian lattice sum.");

  m.def(
      "equilibrium",
      [](double U, double T, const RVector& omega, double w1) {
        const EqSolution s = eq_scf(EqParams{U, T, U * w1, w1, 1.0}, omega);
        py::dict d;
        d["omega"] = s.omega;
        d["sigma_r"] = s.sigma_r;
        d["g_r"] = s.g_r;
        d["dos"] = s.dos;
        return d;
      },
      py::arg("U"), py::arg("T"), py::arg("omega"), py::arg("w1") = 0.5,
      "Real-frequency equilibrium solution at half filling.");

  m.def(
      "equilibrium_energy",
      [](double U, double T, double w1) { return equilibrium_energy(EqParams{U, T, U * w1, w1, 1.0}, T); },
      py::arg("U"), py::arg("T"), py::arg("w1") = 0.5);

  m.def(
      "fit_beta",
      [](const RVector& t, const RVector& beta, double t_fit_start, const std::string& family) {
        Trajectory tr;
        tr.times = t;
        tr.values = beta;
        const BetaFit f = fit_beta(tr, t_fit_start, 0.05, family);
        py::dict d;
        d["family"] = f.family;
        d["beta0"] = f.beta0;
        d["gamma"] = f.gamma;
        d["beta1"] = f.beta1;
        d["gamma1"] = f.gamma1;
        d["t_ref"] = f.t_ref;
        d["rms_rel"] = f.rms_rel;
        return d;
      },
      py::arg("t"), py::arg("beta"), py::arg("t_fit_start"), py::arg("family") = "auto");

  m.def(
      "solve",
      [](const std::string& config_json, const std::vector<std::string>& overrides, int index) {
        const RunConfig c = parse(config_json, overrides);
        if (index < 0 || index > 2) throw ConfigError("solve: index must be 0, 1 or 2");
        std::shared_ptr<TransientSolution> s;
        RunReport r;
        {
          py::gil_scoped_release release;
          s = solve_run(c, index, &r);
        }
        py::dict d;
        d["dt"] = s->grid->dt;
        d["t"] = RVector::LinSpaced(s->grid->n_t, s->grid->t_min, s->grid->t_max);
        d["iterations"] = s->iterations;
        d["residuals"] = s->residual_history;
        d["seconds"] = r.seconds;
        d["current"] = trajectory(current(*s));
        d["sigma"] = components(s->sigma);
        d["g_loc"] = components(s->g_loc);
        return d;
      },
      py::arg("config_json") = "", py::arg("overrides") = std::vector<std::string>{}, py::arg("index") = 0,
      "Converged transient run at dt[index]; checkpoints go to output.dir.");

  m.def(
      "run",
      [](const std::string& command, const std::string& config_json, const std::vector<std::string>& overrides) {
        const RunConfig c = parse(config_json, overrides);
        py::gil_scoped_release release;
        if (command == "equilibrium") return cmd_equilibrium(c).files;
        if (command == "transient") return cmd_transient(c).files;
        if (command == "bridge") {
          auto base = solve_run(c, c.bridge_run);
          return cmd_bridge(c, *base, calibrate(c)).files;
        }
        throw ConfigError("run: command must be equilibrium, transient or bridge");
      },
      py::arg("command"), py::arg("config_json") = "", py::arg("overrides") = std::vector<std::string>{},
      "Runs a pipeline stage and returns the written files.");
}

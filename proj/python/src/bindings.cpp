// Python bindings: configuration, band geometry, disorder sampling, the
// effective theory and the ensemble/command drivers. Arrays come back as numpy.

#include "flatband/commands.hpp"
#include "flatband/config.hpp"
#include "flatband/disorder.hpp"
#include "flatband/effective.hpp"
#include "flatband/errors.hpp"
#include "flatband/lattice.hpp"
#include "flatband/propagator.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

namespace py = pybind11;
using namespace flatband;

namespace {

py::dict ensemble_dict(const EnsembleResult& r) {
  py::dict d;
  d["times"] = r.times;
  d["momenta"] = r.momenta;
  d["realizations"] = r.realizations;
  d["pop_full"] = r.pop_full;
  d["pop_full_se"] = r.pop_full_se;
  d["pop_partial"] = r.pop_partial;
  d["pop_partial_se"] = r.pop_partial_se;
  d["mom_variance"] = r.mom_variance;
  d["mom_variance_se"] = r.mom_variance_se;
  d["xdist"] = r.xdist;
  d["pdist_f"] = r.pdist_f;
  d["pdist_d"] = r.pdist_d;
  d["max_norm_drift"] = r.max_norm_drift;
  d["max_energy_drift"] = r.max_energy_drift;
  return d;
}

py::dict trajectory_dict(const MomentumTrajectory& t) {
  Eigen::MatrixXd rho(static_cast<Eigen::Index>(t.states.size()), static_cast<Eigen::Index>(t.momenta.size()));
  std::vector<double> times, totals;
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    for (std::size_t n = 0; n < t.momenta.size(); ++n) rho(k, n) = t.states[k].values[n];
    times.push_back(t.states[k].time);
    totals.push_back(t.states[k].total());
  }
  py::dict d;
  d["times"] = times;
  d["momenta"] = t.momenta;
  d["density"] = rho;
  d["survival"] = totals;
  d["dt"] = t.dt;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Disordered cross-stitch flatband: exact ensembles and effective theory";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<StatisticsError>(m, "StatisticsError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<JoinError>(m, "JoinError", base.ptr());

  py::class_<LatticeParams>(m, "LatticeParams")
      .def(py::init([](double t_ab, int N, double J, double a) {
             LatticeParams p;
             p.t_ab = t_ab, p.N = N, p.J = J, p.a = a;
             p.validate();
             return p;
           }),
           py::arg("t_ab"), py::arg("N") = 100, py::arg("J") = 1.0, py::arg("a") = 1.0)
      .def_readwrite("t_ab", &LatticeParams::t_ab)
      .def_readwrite("N", &LatticeParams::N)
      .def_readwrite("J", &LatticeParams::J)
      .def_readwrite("a", &LatticeParams::a)
      .def("__repr__", [](const LatticeParams& p) {
        return "LatticeParams(t_ab=" + std::to_string(p.t_ab) + ", N=" + std::to_string(p.N) + ")";
      });

  py::class_<Intersection>(m, "Intersection")
      .def_readonly("index", &Intersection::index)
      .def_readonly("momentum", &Intersection::momentum)
      .def_readonly("velocity", &Intersection::velocity);

  m.def("find_intersections", &find_intersections, py::arg("lattice"));
  m.def("momentum_grid", &momentum_grid, py::arg("lattice"));
  m.def("build_clean_hamiltonian", &build_clean_hamiltonian, py::arg("lattice"));

  py::enum_<DisorderKind>(m, "DisorderKind")
      .value("gaussian", DisorderKind::gaussian)
      .value("white_noise", DisorderKind::white_noise);

  py::class_<DisorderSpec>(m, "DisorderSpec")
      .def(py::init([](double C0, double ell, double delta, std::uint64_t seed, DisorderKind kind) {
             DisorderSpec s;
             s.C0 = C0, s.ell = ell, s.delta = delta, s.master_seed = seed, s.kind = kind;
             s.validate();
             return s;
           }),
           py::arg("C0"), py::arg("ell"), py::arg("delta") = 0.0, py::arg("seed") = 1,
           py::arg("kind") = DisorderKind::gaussian)
      .def_static("from_amplitude", &DisorderSpec::from_amplitude, py::arg("W"), py::arg("ell"),
                  py::arg("delta") = 0.0, py::arg("seed") = 1, py::arg("kind") = DisorderKind::gaussian)
      .def_readwrite("C0", &DisorderSpec::C0)
      .def_readwrite("ell", &DisorderSpec::ell)
      .def_readwrite("delta", &DisorderSpec::delta)
      .def_readwrite("seed", &DisorderSpec::master_seed)
      .def_readwrite("kind", &DisorderSpec::kind);

  m.def("correlation_C", &correlation_C, py::arg("spec"), py::arg("x"), py::arg("a") = 1.0);
  m.def("spectral_G0", &spectral_G0, py::arg("spec"), py::arg("q"));
  m.def(
      "sample_realization",
      [](const DisorderSpec& spec, const LatticeParams& lat, std::uint64_t index) {
        const auto r = sample_realization(spec, lat, index);
        return py::make_tuple(r.Va, r.Vb);
      },
      py::arg("spec"), py::arg("lattice"), py::arg("index"), "Returns (V_a, V_b) for one realization.");

  py::class_<EffectiveModel>(m, "EffectiveModel")
      .def(py::init<const LatticeParams&, const DisorderSpec&>(), py::arg("lattice"), py::arg("disorder"))
      .def_property_readonly("intersections", &EffectiveModel::intersections)
      .def_property_readonly("q_max", &EffectiveModel::q_max)
      .def("decay_rate", &EffectiveModel::decay_rate, py::arg("dp"), py::arg("t"), py::arg("velocity"))
      .def("decay_exposure", &EffectiveModel::decay_exposure, py::arg("dp"), py::arg("t"), py::arg("velocity"))
      .def("decay_exposure_asymptotic", &EffectiveModel::decay_exposure_asymptotic, py::arg("dp"), py::arg("t"),
           py::arg("velocity"))
      .def("dephasing_exponent", &EffectiveModel::dephasing_exponent, py::arg("x"), py::arg("t"))
      .def("dephasing_exponent_closed", &EffectiveModel::dephasing_exponent_closed, py::arg("x"), py::arg("t"))
      .def("variance_prediction", &EffectiveModel::variance_prediction, py::arg("t"), py::arg("initial_variance"))
      .def("lifetime", [](const EffectiveModel& model, double p0) { return lifetime_estimate(p0, model).tau; },
           py::arg("p0"));

  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("preset", &RunConfig::preset)
      .def_readonly("lattice", &RunConfig::lattice)
      .def_readonly("disorder", &RunConfig::disorder)
      .def_readonly("p0", &RunConfig::p0)
      .def_readonly("x0", &RunConfig::x0)
      .def_readonly("sigma_x2", &RunConfig::sigma_x2)
      .def_readonly("K", &RunConfig::K)
      .def_readonly("t_max", &RunConfig::t_max)
      .def_readonly("n_times", &RunConfig::n_times)
      .def("echo", &RunConfig::echo)
      .def("__eq__", &RunConfig::operator==);

  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def("preset_config", [](const std::string& name) { return preset_config(name); }, py::arg("name"));
  m.def("preset_names", &preset_names);

  m.def(
      "run_ensemble",
      [](const RunConfig& cfg) {
        EnsembleResult r;
        {
          py::gil_scoped_release release;
          r = run_config_ensemble(cfg);
        }
        return ensemble_dict(r);
      },
      py::arg("config"), "Exact disorder ensemble for a configuration; dict of numpy arrays.");
  m.def(
      "run_prediction",
      [](const RunConfig& cfg) {
        Prediction p;
        {
          py::gil_scoped_release release;
          p = run_config_prediction(cfg);
        }
        py::dict d;
        d["exact_rates"] = trajectory_dict(p.exact_rates);
        d["asymptotic_rates"] = trajectory_dict(p.asymptotic_rates);
        return d;
      },
      py::arg("config"), "Momentum master-equation prediction with exact and asymptotic rates.");

  auto command = [&m](const char* name, CommandResult (*fn)(const RunConfig&, const fs::path&)) {
    m.def(
        name,
        [fn](const RunConfig& cfg, const fs::path& out) {
          const auto res = fn(cfg, out);
          return py::make_tuple(res.files, res.report);
        },
        py::arg("config"), py::arg("out"));
  };
  command("cmd_bands", &cmd_bands);
  command("cmd_sample", &cmd_sample);
  command("cmd_evolve", &cmd_evolve);
  command("cmd_predict", &cmd_predict);
  command("cmd_lifetime", &cmd_lifetime);
  m.def(
      "cmd_compare",
      [](const fs::path& exact, const fs::path& pred, const fs::path& out) {
        const auto rep = cmd_compare(exact, pred, out);
        return py::make_tuple(rep.max_abs_diff, rep.file);
      },
      py::arg("exact_dir"), py::arg("pred_dir"), py::arg("out"));
}

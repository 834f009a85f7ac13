#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "memcap/capacity.hpp"
#include "memcap/dynamics.hpp"
#include "memcap/errors.hpp"
#include "memcap/experiment.hpp"

namespace py = pybind11;
using namespace memcap;

namespace {

SweepConfig config_from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_sweep_config(in);
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Echo state network dynamics and memory capacity estimation.";
  m.attr("__version__") = MEMCAP_VERSION;

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<Activation>(m, "Activation")
      .def(py::init(&Activation::parse), py::arg("text"))
      .def("__call__", [](const Activation& a, double x) { return a(x); })
      .def("__call__", [](const Activation& a, const Vector& v) { return apply_vector(a, v); })
      .def("__repr__", [](const Activation& a) { return "Activation('" + to_string(a) + "')"; })
      .def("__str__", [](const Activation& a) { return to_string(a); })
      .def("__eq__", &Activation::operator==)
      .def_property_readonly("is_saturating", [](const Activation& a) { return is_saturating(a); })
      .def_property_readonly("linear_radius", [](const Activation& a) { return linear_radius(a); });

  py::class_<ReservoirSpec>(m, "ReservoirSpec")
      .def_readonly("n", &ReservoirSpec::n)
      .def_readonly("connectivity", &ReservoirSpec::connectivity)
      .def_readonly("input_mask", &ReservoirSpec::input_mask)
      .def_readonly("input_shift", &ReservoirSpec::input_shift)
      .def_readonly("target_spectral_norm", &ReservoirSpec::target_spectral_norm)
      .def_readonly("seed", &ReservoirSpec::seed)
      .def_property_readonly("ensemble", [](const ReservoirSpec& s) { return to_string(s.ensemble); })
      .def("to_json", &serialize_reservoir)
      .def_static("from_json", &deserialize_reservoir, py::arg("text"));

  m.def(
      "sample_reservoir",
      [](int n, const std::string& ensemble, double spectral_norm, std::uint64_t seed) {
        return sample_reservoir(n, parse_ensemble(ensemble), spectral_norm, seed);
      },
      py::arg("n"), py::arg("ensemble") = "orthogonal", py::arg("spectral_norm") = 0.95, py::arg("seed") = 0);
  m.def("spectral_norm", &spectral_norm, py::arg("m"));

  py::class_<RegimeThresholds>(m, "RegimeThresholds")
      .def_readonly("sigma_upper", &RegimeThresholds::sigma_upper)
      .def_readonly("sigma_lower", &RegimeThresholds::sigma_lower)
      .def_readonly("sigma_upper_loose_entrywise", &RegimeThresholds::sigma_upper_loose_entrywise)
      .def_readonly("sigma_upper_loose_rowsum", &RegimeThresholds::sigma_upper_loose_rowsum)
      .def_readonly("sigma_lower_loose", &RegimeThresholds::sigma_lower_loose);
  m.def("compute_thresholds", py::overload_cast<const ReservoirSpec&, const Activation&>(&compute_thresholds),
        py::arg("spec"), py::arg("activation"));
  m.def("compute_thresholds", py::overload_cast<const ReservoirSpec&, double, double>(&compute_thresholds),
        py::arg("spec"), py::arg("delta"), py::arg("d"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("inputs", &Trajectory::inputs)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("warm_state", &Trajectory::warm_state);

  m.def(
      "run",
      [](const ReservoirSpec& spec, const Activation& act, double sigma, int length, std::optional<int> washout,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return run(spec, act, {sigma, length, washout.value_or(default_washout(spec.n)), seed},
                   Vector::Zero(spec.n));
      },
      py::arg("spec"), py::arg("activation"), py::arg("sigma"), py::arg("length") = 100000,
      py::arg("washout") = py::none(), py::arg("seed") = 0);

  m.def(
      "classify_regime",
      [](const Trajectory& t, const ReservoirSpec& s, const Activation& a, double sigma) {
        return std::string(to_string(classify_regime(t, s, a, sigma)));
      },
      py::arg("trajectory"), py::arg("spec"), py::arg("activation"), py::arg("sigma"));

  py::class_<CapacityProfile>(m, "CapacityProfile")
      .def_readonly("per_lag", &CapacityProfile::per_lag)
      .def_readonly("total", &CapacityProfile::total)
      .def_readonly("tau_max", &CapacityProfile::tau_max)
      .def_readonly("ridge", &CapacityProfile::ridge)
      .def_readonly("sigma", &CapacityProfile::sigma)
      .def_property_readonly("clip_count", [](const CapacityProfile& p) { return p.diagnostics.clip_count; })
      .def_property_readonly("condition_estimate",
                             [](const CapacityProfile& p) { return p.diagnostics.condition_estimate; })
      .def_property_readonly("early_stopped", [](const CapacityProfile& p) { return p.diagnostics.early_stopped; })
      .def("record", &format_profile_record);

  m.def("estimate_mc_tau", &estimate_mc_tau, py::arg("trajectory"), py::arg("tau"), py::arg("ridge") = py::none());
  m.def(
      "estimate_total_mc",
      [](const Trajectory& t, int tau_max, std::optional<double> ridge, bool early_stop) {
        py::gil_scoped_release release;
        return estimate_total_mc(t, {tau_max, ridge, early_stop});
      },
      py::arg("trajectory"), py::arg("tau_max") = 0, py::arg("ridge") = py::none(), py::arg("early_stop") = true);
  m.def("linear_mc_oracle", &linear_mc_oracle, py::arg("spec"), py::arg("tau_max"));
  m.def("solve_lyapunov", &solve_lyapunov, py::arg("a"), py::arg("q"));

  py::class_<SigmaRow>(m, "SigmaRow")
      .def_readonly("sigma", &SigmaRow::sigma)
      .def_readonly("mc_mean", &SigmaRow::mc_mean)
      .def_readonly("mc_sd", &SigmaRow::mc_sd)
      .def_readonly("n_ok", &SigmaRow::n_ok)
      .def_readonly("n_failed", &SigmaRow::n_failed)
      .def_readonly("regime_saturated", &SigmaRow::regime_saturated)
      .def_readonly("regime_linear", &SigmaRow::regime_linear)
      .def_readonly("regime_intermediate", &SigmaRow::regime_intermediate)
      .def_readonly("mean_profile", &SigmaRow::mean_profile);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("rows", &SweepResult::rows)
      .def_readonly("grid_lower", &SweepResult::grid_lower)
      .def_readonly("grid_upper", &SweepResult::grid_upper)
      .def("to_csv", &sweep_csv)
      .def("to_json", &to_json)
      .def("to_svg", [](const SweepResult& r) {
        std::ostringstream out;
        write_plot_svg(out, r);
        return out.str();
      });

  m.def(
      "run_sweep",
      [](const std::string& config, int jobs) {
        const SweepConfig cfg = config_from_text(config);
        py::gil_scoped_release release;
        return run_sweep(cfg, jobs);
      },
      py::arg("config"), py::arg("jobs") = 1,
      "Runs a sweep described by config text in the same key = value format as the CLI.");
}

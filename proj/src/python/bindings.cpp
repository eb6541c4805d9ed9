#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "leocell/dataset.hpp"
#include "leocell/error.hpp"
#include "leocell/metrics.hpp"
#include "leocell/mlp.hpp"
#include "leocell/model_io.hpp"
#include "leocell/regress.hpp"
#include "leocell/simulate.hpp"

namespace py = pybind11;
using namespace leocell;

namespace {

PairedSeries make_series(const std::vector<std::pair<double, double>>& pairs) {
  PairedSeries s;
  s.pairs = pairs;
  return s;
}

py::dict report_dict(const TrainingReport& r) {
  py::dict d;
  d["epochs_run"] = r.epochs_run;
  d["final_train_mape_pct"] = r.final_train_mape_pct;
  d["error_history"] = r.error_history;
  d["converged"] = r.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_leocell, m) {
  m.doc() = "Li-ion LEO cycling models: simulation, regression, MLP, metrics";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<RankDeficientError>(m, "RankDeficientError", numeric.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", numeric.ptr());

  py::enum_<Target>(m, "Target").value("RC", Target::RC).value("EODV", Target::EODV);
  m.def("parse_target", &parse_target);

  py::class_<CyclingRecord>(m, "CyclingRecord")
      .def(py::init<>())
      .def(py::init([](double t, double dod, std::int64_t c, std::optional<double> rc,
                       std::optional<double> eodv) {
             return CyclingRecord{t, dod, c, rc, eodv};
           }),
           py::arg("temperature_c"), py::arg("dod_pct"), py::arg("cycle"),
           py::arg("rc_pct") = py::none(), py::arg("eodv_v") = py::none())
      .def_readwrite("temperature_c", &CyclingRecord::temperature_c)
      .def_readwrite("dod_pct", &CyclingRecord::dod_pct)
      .def_readwrite("cycle", &CyclingRecord::cycle)
      .def_readwrite("rc_pct", &CyclingRecord::rc_pct)
      .def_readwrite("eodv_v", &CyclingRecord::eodv_v)
      .def("__repr__", [](const CyclingRecord& r) {
        return "CyclingRecord(" + std::to_string(r.temperature_c) + ", " +
               std::to_string(r.dod_pct) + ", " + std::to_string(r.cycle) + ")";
      });

  py::class_<CyclingDataset>(m, "CyclingDataset")
      .def(py::init([](std::vector<CyclingRecord> records) {
        return CyclingDataset(std::move(records));
      }))
      .def_property_readonly("records",
                             [](const CyclingDataset& d) {
                               return std::vector<CyclingRecord>(d.records().begin(),
                                                                 d.records().end());
                             })
      .def_property_readonly("source", &CyclingDataset::source)
      .def("has_target", &CyclingDataset::has_target)
      .def("with_target", &CyclingDataset::with_target)
      .def("__len__", &CyclingDataset::size)
      .def(py::self == py::self);
  m.def("read_csv", py::overload_cast<const std::filesystem::path&>(&read_csv));
  m.def("write_csv",
        py::overload_cast<const CyclingDataset&, const std::filesystem::path&>(&write_csv));
  m.def("split_even_odd", &split_even_odd);

  py::class_<KneeMode>(m, "KneeMode")
      .def(py::init<>())
      .def_readwrite("knee_cycle", &KneeMode::knee_cycle)
      .def_readwrite("pre_knee_multiplier", &KneeMode::pre_knee_multiplier);

  py::class_<DegradationModelParams>(m, "DegradationModelParams")
      .def(py::init<>())
      .def_readwrite("rc_intercept", &DegradationModelParams::rc_intercept)
      .def_readwrite("rc_coeff_t", &DegradationModelParams::rc_coeff_t)
      .def_readwrite("rc_coeff_dod", &DegradationModelParams::rc_coeff_dod)
      .def_readwrite("rc_coeff_cycle", &DegradationModelParams::rc_coeff_cycle)
      .def_readwrite("eodv_intercept", &DegradationModelParams::eodv_intercept)
      .def_readwrite("eodv_coeff_t", &DegradationModelParams::eodv_coeff_t)
      .def_readwrite("eodv_coeff_dod", &DegradationModelParams::eodv_coeff_dod)
      .def_readwrite("eodv_coeff_cycle", &DegradationModelParams::eodv_coeff_cycle)
      .def_readwrite("knee", &DegradationModelParams::knee);

  py::class_<SimulationPlan>(m, "SimulationPlan")
      .def(py::init<>())
      .def_readwrite("settings", &SimulationPlan::settings)
      .def_readwrite("cycle_start", &SimulationPlan::cycle_start)
      .def_readwrite("cycle_end", &SimulationPlan::cycle_end)
      .def_readwrite("cycle_step", &SimulationPlan::cycle_step)
      .def_readwrite("noise_sd_rc", &SimulationPlan::noise_sd_rc)
      .def_readwrite("noise_sd_eodv", &SimulationPlan::noise_sd_eodv)
      .def_readwrite("seed", &SimulationPlan::seed);

  py::class_<Setting>(m, "Setting")
      .def(py::init([](double t, double dod) { return Setting{t, dod}; }))
      .def_readwrite("temperature_c", &Setting::temperature_c)
      .def_readwrite("dod_pct", &Setting::dod_pct);

  m.def("generate", &generate, py::arg("plan") = SimulationPlan{},
        py::arg("params") = DegradationModelParams{});
  m.def("eval_rc", &eval_rc);
  m.def("eval_eodv", &eval_eodv);
  m.def(
      "cycle_life",
      [](const DegradationModelParams& p, double t, double dod, double rc_floor,
         double eodv_floor, std::int64_t horizon) -> std::optional<std::pair<std::int64_t, std::string>> {
        auto life = cycle_life(p, t, dod, rc_floor, eodv_floor, horizon);
        if (!life) return std::nullopt;
        return std::pair{life->cycle, std::string(to_string(life->criterion))};
      },
      py::arg("params"), py::arg("temperature_c"), py::arg("dod_pct"),
      py::arg("rc_floor") = kRcFailurePct, py::arg("eodv_floor") = kEodvFailureV,
      py::arg("horizon") = 1'000'000);

  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init<>())
      .def_readwrite("intercept", &LinearModel::intercept)
      .def_readwrite("coeff_t", &LinearModel::coeff_t)
      .def_readwrite("coeff_dod", &LinearModel::coeff_dod)
      .def_readwrite("coeff_cycle", &LinearModel::coeff_cycle)
      .def_readwrite("target", &LinearModel::target)
      .def("__call__", [](const LinearModel& lm, double t, double dod, double c) {
        return predict_linear(lm, t, dod, c);
      });
  m.def("fit_ols", &fit_ols);
  m.def("format_equation", &format_equation);
  m.def("save_linear", &save_linear);
  m.def("load_linear", &load_linear);

  py::class_<NetworkTopology>(m, "NetworkTopology")
      .def(py::init<>())
      .def_readwrite("layer_sizes", &NetworkTopology::layer_sizes)
      .def("parameter_count", &NetworkTopology::parameter_count);

  py::class_<MlpModel>(m, "MlpModel")
      .def_readonly("topology", &MlpModel::topology)
      .def_readonly("target", &MlpModel::target)
      .def_readonly("epochs_trained", &MlpModel::epochs_trained)
      .def_readonly("seed", &MlpModel::seed)
      .def("__call__", [](const MlpModel& model, double t, double dod, double c) {
        return predict(model, t, dod, c);
      })
      .def(py::self == py::self);

  py::class_<TrainingConfig>(m, "TrainingConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainingConfig::learning_rate)
      .def_readwrite("momentum", &TrainingConfig::momentum)
      .def_readwrite("error_target_pct", &TrainingConfig::error_target_pct)
      .def_readwrite("max_epochs", &TrainingConfig::max_epochs)
      .def_readwrite("seed", &TrainingConfig::seed)
      .def_readwrite("shuffle_each_epoch", &TrainingConfig::shuffle_each_epoch)
      .def_readwrite("eval_every", &TrainingConfig::eval_every);

  m.def(
      "init_network",
      [](const CyclingDataset& data, Target target, std::uint64_t seed,
         const NetworkTopology& topology) {
        return init_network(topology, seed, fit_normalization(data, target), target);
      },
      py::arg("dataset"), py::arg("target"), py::arg("seed") = 1,
      py::arg("topology") = NetworkTopology{},
      "Random weights with normalization fitted on the dataset.");
  m.def("train", [](const MlpModel& model, const CyclingDataset& data, const TrainingConfig& cfg) {
    TrainingResult r = train(model, data, cfg);
    return py::make_tuple(r.model, report_dict(r.report));
  });
  m.def("gradient_check", &gradient_check, py::arg("model"), py::arg("record"),
        py::arg("epsilon") = 1e-5);
  m.def("save_model", &save_model);
  m.def("load_model", &load_model);
  m.def(
      "predict_file",
      [](const std::filesystem::path& path, double t, double dod, double c) {
        return predict_any(load_any_model(path), t, dod, c);
      },
      "Predict with a model file of either kind.");

  m.def("aape", [](const std::vector<std::pair<double, double>>& p) {
    return aape(make_series(p));
  });
  m.def("pearson", [](const std::vector<std::pair<double, double>>& p) {
    const Correlation c = pearson(make_series(p));
    return py::make_tuple(c.r, c.r_squared);
  });
  m.def("coefficient_of_variation", [](const std::vector<std::pair<double, double>>& p) {
    return coefficient_of_variation(make_series(p));
  });
  m.def(
      "comparison_report_json",
      [](const std::vector<std::pair<double, double>>& p, const std::string& mode) {
        return to_json(comparison_report(make_series(p), parse_bland_altman_mode(mode))).dump();
      },
      py::arg("pairs"), py::arg("ba_mode") = "absolute");
}

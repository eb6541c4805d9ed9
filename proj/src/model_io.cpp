#include "leocell/model_io.hpp"

#include "leocell/error.hpp"
#include "leocell/keyvalue.hpp"

namespace leocell {

void save_linear(const LinearModel& model, const std::filesystem::path& path) {
  model.validate();
  KeyValueFile kv;
  linear_to_config(model, kv);
  kv.save(path);
}

LinearModel load_linear(const std::filesystem::path& path) {
  return linear_from_config(KeyValueFile::load(path));
}

AnyModel load_any_model(const std::filesystem::path& path) {
  const auto kind = KeyValueFile::load(path).require("kind");
  if (kind == "linear") return load_linear(path);
  if (kind == "mlp") return load_model(path);
  throw ValidationError(path.string() + ": unknown model kind '" + kind + "'");
}

Target target_of(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.target; }, model);
}

double predict_any(const AnyModel& model, double t, double dod, double cycle) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    return predict_linear(*lin, t, dod, cycle);
  }
  return predict(std::get<MlpModel>(model), t, dod, cycle);
}

std::optional<Variable> extrapolated_variable(const AnyModel& model, double t,
                                              double dod, double cycle) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    if (!lin->ranges) return std::nullopt;
    if (!lin->ranges->temperature_c.contains(t)) return Variable::Temperature;
    if (!lin->ranges->dod_pct.contains(dod)) return Variable::Dod;
    if (!lin->ranges->cycle.contains(cycle)) return Variable::Cycle;
    return std::nullopt;
  }
  return std::get<MlpModel>(model).normalization.first_out_of_range(t, dod, cycle);
}

}  // namespace leocell

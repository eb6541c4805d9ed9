#pragma once

#include <filesystem>
#include <optional>
#include <variant>

#include "leocell/mlp.hpp"
#include "leocell/regress.hpp"

namespace leocell {

/// Either kind of model file; the `kind` header key decides which.
using AnyModel = std::variant<LinearModel, MlpModel>;

void save_linear(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_linear(const std::filesystem::path& path);

AnyModel load_any_model(const std::filesystem::path& path);

Target target_of(const AnyModel& model);
double predict_any(const AnyModel& model, double temperature_c, double dod_pct,
                   double cycle);

/// First input outside the range the model was fitted on. Linear models
/// without stored ranges never report extrapolation.
std::optional<Variable> extrapolated_variable(const AnyModel& model,
                                              double temperature_c,
                                              double dod_pct, double cycle);

}  // namespace leocell

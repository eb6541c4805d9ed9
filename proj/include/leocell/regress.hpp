#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "leocell/dataset.hpp"
#include "leocell/keyvalue.hpp"
#include "leocell/simulate.hpp"

namespace leocell {

struct ResidualStats {
  double rmse = 0.0;
  double max_abs_residual = 0.0;
  std::size_t n = 0;

  bool operator==(const ResidualStats&) const = default;
};

/// Input ranges a model was fitted on; used for extrapolation checks and
/// for range-scaled effect sizes.
struct InputRanges {
  Range temperature_c;
  Range dod_pct;
  Range cycle;

  bool operator==(const InputRanges&) const = default;
};

/// y = intercept + coeff_t*T + coeff_dod*DOD + coeff_cycle*C, with signed
/// coefficients (a capacity-fading fit has negative slopes).
struct LinearModel {
  double intercept = 0.0;
  double coeff_t = 0.0;
  double coeff_dod = 0.0;
  double coeff_cycle = 0.0;
  Target target = Target::RC;
  ResidualStats residual_stats;
  std::optional<InputRanges> ranges;

  void validate() const;
  bool operator==(const LinearModel&) const = default;
};

/// Least squares on the design [1, T, DOD, C] by Householder QR.
/// A column whose norm after orthogonalization against the previous columns
/// drops below 1e-10 of its original norm raises RankDeficientError naming
/// it ("intercept", "temperature_c", "dod_pct", "cycle").
LinearModel fit_ols(const CyclingDataset& dataset, Target target);

double predict_linear(const LinearModel& model, double temperature_c,
                      double dod_pct, double cycle);

/// Signed linear form of one half of a degradation parameter set.
LinearModel linear_from_params(const DegradationModelParams& params,
                               Target target);

InputRanges input_ranges(const CyclingDataset& dataset);

struct Effect {
  Variable variable = Variable::Temperature;
  double magnitude = 0.0;
};

/// |coefficient| * (max - min) per input, sorted by descending magnitude
/// (ties keep T, DOD, C order).
std::vector<Effect> effect_ranking(const LinearModel& model,
                                   const InputRanges& ranges);

/// "RC = 110.2900 - 0.7551*T - 0.2977*DOD - 0.0014*C". Coefficients smaller
/// than 1e-3 in magnitude use scientific notation (e.g. 7.1705E-06).
std::string format_equation(const LinearModel& model);

void linear_to_config(const LinearModel& model, KeyValueFile& kv);
LinearModel linear_from_config(const KeyValueFile& kv);

}  // namespace leocell

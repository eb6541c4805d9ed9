#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leocell/dataset.hpp"
#include "leocell/keyvalue.hpp"

namespace leocell {

/// Faster capacity loss before a knee cycle: below `knee_cycle` the RC cycle
/// slope is scaled by `pre_knee_multiplier`. Affects RC only.
struct KneeMode {
  std::int64_t knee_cycle = 5000;
  double pre_knee_multiplier = 1.0;

  bool operator==(const KneeMode&) const = default;
};

/// Additive degradation model
///   RC   = rc_intercept   - rc_coeff_t*T   - rc_coeff_dod*DOD   - rc_coeff_cycle*C
///   EODV = eodv_intercept - eodv_coeff_t*T - eodv_coeff_dod*DOD - eodv_coeff_cycle*C
/// Coefficients are stored as the magnitudes that are subtracted. Defaults
/// are the published estimated models for 4.1 V charge-limited LEO cycling.
struct DegradationModelParams {
  double rc_intercept = 110.29;
  double rc_coeff_t = 0.7551;
  double rc_coeff_dod = 0.2977;
  double rc_coeff_cycle = 0.0014;
  double eodv_intercept = 4.3156;
  double eodv_coeff_t = 0.1297;
  double eodv_coeff_dod = 0.0093;
  double eodv_coeff_cycle = 7.1705e-06;
  std::optional<KneeMode> knee;

  void validate() const;
  bool operator==(const DegradationModelParams&) const = default;
};

double eval_rc(const DegradationModelParams& params, double temperature_c,
               double dod_pct, std::int64_t cycle);
double eval_eodv(const DegradationModelParams& params, double temperature_c,
                 double dod_pct, std::int64_t cycle);

/// The six (T, DOD) conditions of the reference test matrix.
std::vector<Setting> reference_settings();

struct SimulationPlan {
  std::vector<Setting> settings = reference_settings();
  std::int64_t cycle_start = 0;
  std::int64_t cycle_end = 25000;
  std::int64_t cycle_step = 1000;
  double noise_sd_rc = 0.0;
  double noise_sd_eodv = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const SimulationPlan&) const = default;
};

/// One record per (setting, cycle) with model values plus independent
/// Gaussian noise. Setting i draws from Xoshiro256::substream(seed, i); every
/// record consumes one RC draw then one EODV draw, whatever the SDs are.
/// Values outside the record domain (RC outside [0, 120] %, EODV <= 0 V) are
/// stored as absent; see `count_absent`.
CyclingDataset generate(const SimulationPlan& plan,
                        const DegradationModelParams& params);

/// Number of target values a generated dataset is missing.
std::size_t count_absent(const CyclingDataset& dataset, Target target);

enum class FailureCriterion { RC, EODV, Both };
std::string_view to_string(FailureCriterion criterion);

struct CycleLife {
  std::int64_t cycle = 0;
  FailureCriterion criterion = FailureCriterion::RC;

  bool operator==(const CycleLife&) const = default;
};

/// Smallest cycle in [0, horizon] with RC < rc_floor or EODV < eodv_floor,
/// solved in closed form on the (piecewise) affine model. nullopt means no
/// failure within the horizon.
std::optional<CycleLife> cycle_life(const DegradationModelParams& params,
                                    double temperature_c, double dod_pct,
                                    double rc_floor = kRcFailurePct,
                                    double eodv_floor = kEodvFailureV,
                                    std::int64_t horizon = 1'000'000);

/// First integer cycle in [0, horizon] where f(c) = value0 - slope*c drops
/// below `floor`. `eval` is the exact model function used to settle the
/// boundary after the closed-form estimate.
template <typename Eval>
std::optional<std::int64_t> first_cycle_below(Eval eval, double value0,
                                              double slope, double floor,
                                              std::int64_t lo,
                                              std::int64_t hi);

// Plain-text config (see docs/formats.md).
DegradationModelParams params_from_config(const KeyValueFile& kv,
                                          DegradationModelParams base = {});
SimulationPlan plan_from_config(const KeyValueFile& kv, SimulationPlan base = {});
void params_to_config(const DegradationModelParams& params, KeyValueFile& kv);
void plan_to_config(const SimulationPlan& plan, KeyValueFile& kv);

/// "10:10,20:30" style list of T:DOD pairs.
std::vector<Setting> parse_settings(std::string_view text);
std::string format_settings(const std::vector<Setting>& settings);

}  // namespace leocell

#include "leocell/detail/simulate_impl.hpp"

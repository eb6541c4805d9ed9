#include "leocell/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "leocell/error.hpp"
#include "leocell/numfmt.hpp"
#include "leocell/rng.hpp"

namespace leocell {

void DegradationModelParams::validate() const {
  for (double v : {rc_intercept, rc_coeff_t, rc_coeff_dod, rc_coeff_cycle,
                   eodv_intercept, eodv_coeff_t, eodv_coeff_dod,
                   eodv_coeff_cycle}) {
    if (!std::isfinite(v)) {
      throw ValidationError("degradation model coefficients must be finite");
    }
  }
  if (knee) {
    if (knee->knee_cycle < 0) throw ValidationError("knee_cycle must be >= 0");
    if (!std::isfinite(knee->pre_knee_multiplier) ||
        knee->pre_knee_multiplier < 0.0) {
      throw ValidationError("knee_slope_multiplier must be finite and >= 0");
    }
  }
}

namespace {

// Cycle count seen by the RC cycle term once the knee is applied.
double effective_rc_cycles(const DegradationModelParams& p, std::int64_t cycle) {
  const auto c = static_cast<double>(cycle);
  if (!p.knee) return c;
  const auto knee = static_cast<double>(p.knee->knee_cycle);
  if (c <= knee) return p.knee->pre_knee_multiplier * c;
  return p.knee->pre_knee_multiplier * knee + (c - knee);
}

}  // namespace

double eval_rc(const DegradationModelParams& p, double temperature_c,
               double dod_pct, std::int64_t cycle) {
  return p.rc_intercept - p.rc_coeff_t * temperature_c -
         p.rc_coeff_dod * dod_pct - p.rc_coeff_cycle * effective_rc_cycles(p, cycle);
}

double eval_eodv(const DegradationModelParams& p, double temperature_c,
                 double dod_pct, std::int64_t cycle) {
  return p.eodv_intercept - p.eodv_coeff_t * temperature_c -
         p.eodv_coeff_dod * dod_pct -
         p.eodv_coeff_cycle * static_cast<double>(cycle);
}

std::vector<Setting> reference_settings() {
  return {{10, 10}, {10, 20}, {20, 20}, {10, 30}, {20, 30}, {30, 30}};
}

void SimulationPlan::validate() const {
  if (settings.empty()) throw ValidationError("plan has no settings");
  if (cycle_step <= 0) throw ValidationError("cycle_step must be > 0");
  if (cycle_start < 0) throw ValidationError("cycle_start must be >= 0");
  if (cycle_end < cycle_start) {
    throw ValidationError("cycle_end must be >= cycle_start");
  }
  if (!(noise_sd_rc >= 0.0) || !(noise_sd_eodv >= 0.0) ||
      !std::isfinite(noise_sd_rc) || !std::isfinite(noise_sd_eodv)) {
    throw ValidationError("noise standard deviations must be finite and >= 0");
  }
  auto sorted = settings;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("plan lists a setting twice");
  }
}

CyclingDataset generate(const SimulationPlan& plan,
                        const DegradationModelParams& params) {
  plan.validate();
  params.validate();
  std::vector<CyclingRecord> records;
  for (std::size_t i = 0; i < plan.settings.size(); ++i) {
    const Setting& s = plan.settings[i];
    GaussianSampler noise(Xoshiro256::substream(plan.seed, i));
    for (std::int64_t c = plan.cycle_start; c <= plan.cycle_end;
         c += plan.cycle_step) {
      const double rc =
          eval_rc(params, s.temperature_c, s.dod_pct, c) + plan.noise_sd_rc * noise.standard();
      const double eodv = eval_eodv(params, s.temperature_c, s.dod_pct, c) +
                          plan.noise_sd_eodv * noise.standard();
      CyclingRecord r{s.temperature_c, s.dod_pct, c, std::nullopt, std::nullopt};
      if (rc >= 0.0 && rc <= kRcMaxPct) r.rc_pct = rc;
      if (eodv > 0.0 && std::isfinite(eodv)) r.eodv_v = eodv;
      records.push_back(r);
      if (plan.cycle_end - c < plan.cycle_step) break;
    }
  }
  return CyclingDataset(std::move(records), "simulated(seed=" +
                                                std::to_string(plan.seed) + ")");
}

std::size_t count_absent(const CyclingDataset& dataset, Target target) {
  return static_cast<std::size_t>(std::count_if(
      dataset.records().begin(), dataset.records().end(),
      [&](const auto& r) { return !r.target(target).has_value(); }));
}

std::string_view to_string(FailureCriterion criterion) {
  switch (criterion) {
    case FailureCriterion::RC: return "RC";
    case FailureCriterion::EODV: return "EODV";
    case FailureCriterion::Both: return "RC+EODV";
  }
  return "?";
}

std::optional<CycleLife> cycle_life(const DegradationModelParams& params,
                                    double t, double dod, double rc_floor,
                                    double eodv_floor, std::int64_t horizon) {
  params.validate();
  if (!std::isfinite(rc_floor) || !std::isfinite(eodv_floor)) {
    throw ValidationError("failure floors must be finite");
  }
  if (horizon < 0) throw ValidationError("horizon must be >= 0");

  auto rc = [&](std::int64_t c) { return eval_rc(params, t, dod, c); };
  auto eodv = [&](std::int64_t c) { return eval_eodv(params, t, dod, c); };

  const double rc_static =
      params.rc_intercept - params.rc_coeff_t * t - params.rc_coeff_dod * dod;
  std::optional<std::int64_t> rc_fail;
  if (params.knee && params.knee->knee_cycle > 0) {
    const std::int64_t knee = params.knee->knee_cycle;
    const double pre_slope = params.rc_coeff_cycle * params.knee->pre_knee_multiplier;
    rc_fail = first_cycle_below(rc, rc_static, pre_slope, rc_floor, 0,
                                std::min(knee, horizon));
    if (!rc_fail) {
      // Past the knee: RC = rc_static - pre_slope*knee - slope*(c - knee).
      const double value0 = rc_static - pre_slope * static_cast<double>(knee) +
                            params.rc_coeff_cycle * static_cast<double>(knee);
      rc_fail = first_cycle_below(rc, value0, params.rc_coeff_cycle, rc_floor,
                                  knee + 1, horizon);
    }
  } else {
    rc_fail = first_cycle_below(rc, rc_static, params.rc_coeff_cycle, rc_floor,
                                0, horizon);
  }

  const double eodv_static = params.eodv_intercept - params.eodv_coeff_t * t -
                             params.eodv_coeff_dod * dod;
  auto eodv_fail = first_cycle_below(eodv, eodv_static, params.eodv_coeff_cycle,
                                     eodv_floor, 0, horizon);

  if (!rc_fail && !eodv_fail) return std::nullopt;
  if (rc_fail && eodv_fail && *rc_fail == *eodv_fail) {
    return CycleLife{*rc_fail, FailureCriterion::Both};
  }
  if (rc_fail && (!eodv_fail || *rc_fail < *eodv_fail)) {
    return CycleLife{*rc_fail, FailureCriterion::RC};
  }
  return CycleLife{*eodv_fail, FailureCriterion::EODV};
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

std::vector<Setting> parse_settings(std::string_view text) {
  std::vector<Setting> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    auto item = trim(text.substr(pos, comma == std::string_view::npos
                                          ? std::string_view::npos
                                          : comma - pos));
    if (!item.empty()) {
      auto colon = item.find(':');
      if (colon == std::string_view::npos) {
        throw ValidationError("setting '" + std::string(item) +
                              "' must be T:DOD");
      }
      out.push_back({parse_double(item.substr(0, colon), "setting temperature"),
                     parse_double(item.substr(colon + 1), "setting DOD")});
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ValidationError("empty settings list");
  return out;
}

std::string format_settings(const std::vector<Setting>& settings) {
  std::string out;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (i) out += ',';
    out += format_double(settings[i].temperature_c) + ':' +
           format_double(settings[i].dod_pct);
  }
  return out;
}

DegradationModelParams params_from_config(const KeyValueFile& kv,
                                          DegradationModelParams p) {
  auto take = [&](const char* key, double& field) {
    if (auto v = kv.get_double(key)) field = *v;
  };
  take("rc_intercept", p.rc_intercept);
  take("rc_coeff_t", p.rc_coeff_t);
  take("rc_coeff_dod", p.rc_coeff_dod);
  take("rc_coeff_cycle", p.rc_coeff_cycle);
  take("eodv_intercept", p.eodv_intercept);
  take("eodv_coeff_t", p.eodv_coeff_t);
  take("eodv_coeff_dod", p.eodv_coeff_dod);
  take("eodv_coeff_cycle", p.eodv_coeff_cycle);
  auto knee_cycle = kv.get_int("knee_cycle");
  auto knee_mult = kv.get_double("knee_slope_multiplier");
  if (knee_cycle || knee_mult) {
    KneeMode knee = p.knee.value_or(KneeMode{});
    if (knee_cycle) knee.knee_cycle = *knee_cycle;
    if (knee_mult) knee.pre_knee_multiplier = *knee_mult;
    p.knee = knee;
  }
  p.validate();
  return p;
}

SimulationPlan plan_from_config(const KeyValueFile& kv, SimulationPlan plan) {
  if (auto v = kv.get("settings")) plan.settings = parse_settings(*v);
  if (auto v = kv.get_int("cycle_start")) plan.cycle_start = *v;
  if (auto v = kv.get_int("cycle_end")) plan.cycle_end = *v;
  if (auto v = kv.get_int("cycle_step")) plan.cycle_step = *v;
  if (auto v = kv.get_double("noise_sd_rc")) plan.noise_sd_rc = *v;
  if (auto v = kv.get_double("noise_sd_eodv")) plan.noise_sd_eodv = *v;
  if (auto v = kv.get("seed")) plan.seed = parse_uint64(*v, "seed");
  plan.validate();
  return plan;
}

void params_to_config(const DegradationModelParams& p, KeyValueFile& kv) {
  kv.set("rc_intercept", format_double(p.rc_intercept));
  kv.set("rc_coeff_t", format_double(p.rc_coeff_t));
  kv.set("rc_coeff_dod", format_double(p.rc_coeff_dod));
  kv.set("rc_coeff_cycle", format_double(p.rc_coeff_cycle));
  kv.set("eodv_intercept", format_double(p.eodv_intercept));
  kv.set("eodv_coeff_t", format_double(p.eodv_coeff_t));
  kv.set("eodv_coeff_dod", format_double(p.eodv_coeff_dod));
  kv.set("eodv_coeff_cycle", format_double(p.eodv_coeff_cycle));
  if (p.knee) {
    kv.set("knee_cycle", std::to_string(p.knee->knee_cycle));
    kv.set("knee_slope_multiplier", format_double(p.knee->pre_knee_multiplier));
  }
}

void plan_to_config(const SimulationPlan& plan, KeyValueFile& kv) {
  kv.set("settings", format_settings(plan.settings));
  kv.set("cycle_start", std::to_string(plan.cycle_start));
  kv.set("cycle_end", std::to_string(plan.cycle_end));
  kv.set("cycle_step", std::to_string(plan.cycle_step));
  kv.set("noise_sd_rc", format_double(plan.noise_sd_rc));
  kv.set("noise_sd_eodv", format_double(plan.noise_sd_eodv));
  kv.set("seed", std::to_string(plan.seed));
}

}  // namespace leocell

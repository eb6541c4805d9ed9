// leocell: simulate, fit, train, predict, evaluate and cycle-life front end.
//
// Exit codes: 0 success, 1 usage or validation error, 2 numeric failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "leocell/dataset.hpp"
#include "leocell/error.hpp"
#include "leocell/keyvalue.hpp"
#include "leocell/metrics.hpp"
#include "leocell/mlp.hpp"
#include "leocell/model_io.hpp"
#include "leocell/numfmt.hpp"
#include "leocell/regress.hpp"
#include "leocell/simulate.hpp"

#ifndef LEOCELL_VERSION
#define LEOCELL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace leocell;

namespace {

struct Globals {
  std::optional<fs::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out_dir;
  bool quiet = false;
};

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void write_json(const json& j, const fs::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw ValidationError("failed writing " + path.string());
}

/// Collects everything needed to replay a run and writes manifest.json.
class Manifest {
 public:
  Manifest(std::string subcommand, const Globals& g)
      : subcommand_(std::move(subcommand)), globals_(g) {}

  KeyValueFile& config() { return config_; }
  void input(const std::string& role, const fs::path& p) { inputs_[role] = p.string(); }
  void output(const std::string& role, const fs::path& p) { outputs_[role] = p.string(); }
  void seed(std::uint64_t s) { seed_ = s; }

  void write() const {
    if (!globals_.out_dir) return;
    json cfg = json::object();
    for (const auto& [k, v] : config_.entries()) cfg[k] = v;
    json j;
    j["subcommand"] = subcommand_;
    j["config"] = cfg;
    j["config_file"] = globals_.config_path ? json(globals_.config_path->string()) : json(nullptr);
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["seed"] = seed_ ? json(std::to_string(*seed_)) : json(nullptr);
    j["version"] = LEOCELL_VERSION;
    j["timestamp"] = utc_timestamp();
    write_json(j, *globals_.out_dir / "manifest.json");
  }

 private:
  std::string subcommand_;
  const Globals& globals_;
  KeyValueFile config_;
  json inputs_ = json::object();
  json outputs_ = json::object();
  std::optional<std::uint64_t> seed_;
};

KeyValueFile load_config(const Globals& g) {
  if (!g.config_path) return {};
  return KeyValueFile::load(*g.config_path);
}

fs::path require_out(const Globals& g, const char* what) {
  if (!g.out_dir) throw ValidationError(std::string(what) + " needs --out <dir>");
  fs::create_directories(*g.out_dir);
  return *g.out_dir;
}

template <typename T>
T pick(const std::optional<T>& flag, std::optional<T> from_config, T fallback) {
  if (flag) return *flag;
  if (from_config) return *from_config;
  return fallback;
}

std::optional<std::string> config_string(const KeyValueFile& kv, const char* key) {
  return kv.get(key);
}

std::optional<bool> config_bool(const KeyValueFile& kv, const char* key) {
  auto v = kv.get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ValidationError(kv.source() + ": " + key + " must be true or false");
}

std::optional<std::uint64_t> config_seed(const KeyValueFile& kv) {
  if (auto v = kv.get("seed")) return parse_uint64(*v, "seed");
  return std::nullopt;
}

CyclingDataset load_dataset(const fs::path& path, Manifest& manifest) {
  manifest.input("dataset", path);
  return read_csv(path);
}

/// Records carrying the target; errors when none do.
CyclingDataset usable_records(const CyclingDataset& data, Target target,
                              bool quiet) {
  CyclingDataset kept = data.with_target(target);
  if (kept.empty()) {
    throw ValidationError("dataset " + data.source() + " has no " +
                          std::string(to_string(target)) + " values");
  }
  if (kept.size() != data.size() && !quiet) {
    std::cout << "note: skipped " << data.size() - kept.size()
              << " record(s) without " << to_string(target) << " values\n";
  }
  return kept;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::size_t> parse_layers(const std::string& text) {
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<std::size_t> sizes;
  std::string tok;
  while (in >> tok) {
    const std::int64_t v = parse_int64(tok, "layers");
    if (v <= 0) throw ValidationError("layer sizes must be positive");
    sizes.push_back(static_cast<std::size_t>(v));
  }
  return sizes;
}

std::string format_layers(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sizes[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  bool default_grid = false;
  std::optional<std::string> settings;
  std::optional<std::int64_t> cycle_start, cycle_end, cycle_step;
  std::optional<double> noise, noise_rc, noise_eodv;
  std::optional<std::int64_t> knee_cycle;
  std::optional<double> knee_multiplier;
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  const KeyValueFile kv = load_config(g);
  SimulationPlan plan = a.default_grid ? SimulationPlan{} : plan_from_config(kv);
  DegradationModelParams params = params_from_config(kv);
  if (a.default_grid) plan.seed = config_seed(kv).value_or(plan.seed);
  if (a.settings) plan.settings = parse_settings(*a.settings);
  if (a.cycle_start) plan.cycle_start = *a.cycle_start;
  if (a.cycle_end) plan.cycle_end = *a.cycle_end;
  if (a.cycle_step) plan.cycle_step = *a.cycle_step;
  if (a.noise) plan.noise_sd_rc = plan.noise_sd_eodv = *a.noise;
  if (a.noise_rc) plan.noise_sd_rc = *a.noise_rc;
  if (a.noise_eodv) plan.noise_sd_eodv = *a.noise_eodv;
  if (g.seed) plan.seed = *g.seed;
  if (a.knee_cycle || a.knee_multiplier) {
    KneeMode knee = params.knee.value_or(KneeMode{});
    if (a.knee_cycle) knee.knee_cycle = *a.knee_cycle;
    if (a.knee_multiplier) knee.pre_knee_multiplier = *a.knee_multiplier;
    params.knee = knee;
  }
  plan.validate();
  params.validate();

  const fs::path out = require_out(g, "simulate");
  const CyclingDataset data = generate(plan, params);
  const fs::path csv = out / "dataset.csv";
  write_csv(data, csv);

  Manifest m("simulate", g);
  plan_to_config(plan, m.config());
  params_to_config(params, m.config());
  m.seed(plan.seed);
  m.output("dataset", csv);
  m.write();

  if (!g.quiet) {
    std::cout << "records: " << data.size() << '\n'
              << "settings: " << format_settings(plan.settings) << '\n'
              << "absent RC: " << count_absent(data, Target::RC)
              << ", absent EODV: " << count_absent(data, Target::EODV) << '\n'
              << "wrote " << csv.string() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fit-ols

struct FitArgs {
  fs::path data;
  std::optional<std::string> target;
};

int run_fit_ols(const Globals& g, const FitArgs& a) {
  const KeyValueFile kv = load_config(g);
  const Target target =
      parse_target(pick(a.target, config_string(kv, "target"), std::string("rc")));
  Manifest m("fit-ols", g);
  const CyclingDataset data = load_dataset(a.data, m);
  if (data.with_target(target).empty()) {
    throw ValidationError("dataset " + data.source() + " has no " +
                          std::string(to_string(target)) + " values");
  }
  const LinearModel model = fit_ols(data, target);

  if (!g.quiet) {
    std::cout << format_equation(model) << '\n'
              << "n = " << model.residual_stats.n
              << ", rmse = " << format_double(model.residual_stats.rmse)
              << ", max |residual| = "
              << format_double(model.residual_stats.max_abs_residual) << '\n';
    if (model.ranges) {
      std::cout << "effect over fitted range:";
      for (const Effect& e : effect_ranking(model, *model.ranges)) {
        std::cout << ' ' << to_string(e.variable) << '=' << fixed(e.magnitude, 4);
      }
      std::cout << '\n';
    }
  }

  m.config().set("target", std::string(to_string(target)));
  if (g.out_dir) {
    const fs::path out = require_out(g, "fit-ols");
    const fs::path model_path = out / "model.txt";
    save_linear(model, model_path);
    m.output("model", model_path);
    m.write();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  fs::path data;
  std::optional<std::string> target;
  std::optional<std::string> layers;
  std::optional<double> learning_rate, momentum, error_target;
  std::optional<std::int64_t> max_epochs, eval_every;
  bool shuffle = false;
  std::optional<std::string> split;
  std::optional<fs::path> resume;
};

bool parse_split(const std::string& text) {
  if (text == "none") return false;
  if (text == "even-odd") return true;
  throw ValidationError("unknown split '" + text + "' (expected even-odd or none)");
}

int run_train(const Globals& g, const TrainArgs& a) {
  const KeyValueFile kv = load_config(g);
  Manifest m("train", g);

  std::optional<MlpModel> resumed;
  if (a.resume) {
    resumed = load_model(*a.resume);
    m.input("resume_model", *a.resume);
  }
  const std::string default_target =
      resumed ? std::string(to_string(resumed->target)) : std::string("rc");
  const Target target =
      parse_target(pick(a.target, config_string(kv, "target"), default_target));
  if (resumed && resumed->target != target) {
    throw ValidationError("resume model " + a.resume->string() + " predicts " +
                          std::string(to_string(resumed->target)) +
                          ", requested target is " + std::string(to_string(target)));
  }

  TrainingConfig cfg;
  cfg.learning_rate = pick(a.learning_rate, kv.get_double("learning_rate"), cfg.learning_rate);
  cfg.momentum = pick(a.momentum, kv.get_double("momentum"), cfg.momentum);
  cfg.error_target_pct = pick(a.error_target, kv.get_double("error_target_pct"),
                              target == Target::RC ? 0.7 : 0.2);
  cfg.max_epochs = pick(a.max_epochs, kv.get_int("max_epochs"), cfg.max_epochs);
  cfg.eval_every = pick(a.eval_every, kv.get_int("eval_every"), cfg.eval_every);
  cfg.shuffle_each_epoch = a.shuffle || config_bool(kv, "shuffle").value_or(false);
  cfg.seed = pick(g.seed, config_seed(kv), cfg.seed);
  cfg.validate();
  const bool even_odd = parse_split(pick(a.split, config_string(kv, "split"), std::string("none")));

  NetworkTopology topology;
  if (resumed) {
    topology = resumed->topology;
    if (a.layers && parse_layers(*a.layers) != topology.layer_sizes) {
      throw ValidationError("--layers does not match the resumed model (" +
                            format_layers(topology.layer_sizes) + ")");
    }
  } else if (auto text = a.layers ? a.layers : config_string(kv, "layer_sizes")) {
    topology.layer_sizes = parse_layers(*text);
  }
  topology.validate();

  CyclingDataset data = usable_records(load_dataset(a.data, m), target, g.quiet);
  if (even_odd) data = split_even_odd(data).first;

  TrainingResult result;
  if (resumed) {
    result = resume_train(*a.resume, data, cfg);
  } else {
    MlpModel init = init_network(topology, cfg.seed,
                                 fit_normalization(data, target), target);
    result = train(std::move(init), data, cfg);
  }
  const TrainingReport& rep = result.report;

  m.config().set("target", std::string(to_string(target)));
  m.config().set("layer_sizes", format_layers(topology.layer_sizes));
  m.config().set("activation", std::string(to_string(topology.activation)));
  m.config().set("learning_rate", format_double(cfg.learning_rate));
  m.config().set("momentum", format_double(cfg.momentum));
  m.config().set("error_target_pct", format_double(cfg.error_target_pct));
  m.config().set("error_metric", "mape");
  m.config().set("max_epochs", std::to_string(cfg.max_epochs));
  m.config().set("eval_every", std::to_string(cfg.eval_every));
  m.config().set("shuffle", cfg.shuffle_each_epoch ? "true" : "false");
  m.config().set("split", even_odd ? "even-odd" : "none");
  m.config().set("seed", std::to_string(cfg.seed));
  m.seed(cfg.seed);

  if (!g.quiet) {
    std::cout << "target            " << to_string(target) << '\n'
              << "layers            " << format_layers(topology.layer_sizes) << '\n'
              << "patterns          " << data.size() << '\n'
              << "epochs run        " << rep.epochs_run << '\n'
              << "epochs trained    " << result.model.epochs_trained << '\n'
              << "training MAPE %   " << fixed(rep.final_train_mape_pct, 4) << '\n'
              << "error target %    " << fixed(cfg.error_target_pct, 4) << '\n'
              << "converged         " << (rep.converged ? "yes" : "no") << '\n';
  }

  if (g.out_dir) {
    const fs::path out = require_out(g, "train");
    const fs::path model_path = out / "model.txt";
    save_model(result.model, model_path);
    json history = json::array();
    for (const auto& [epoch, mape] : rep.error_history) history.push_back({epoch, mape});
    json j;
    j["target"] = to_string(target);
    j["epochs_run"] = rep.epochs_run;
    j["epochs_trained"] = result.model.epochs_trained;
    j["final_train_mape_pct"] = rep.final_train_mape_pct;
    j["error_target_pct"] = cfg.error_target_pct;
    j["converged"] = rep.converged;
    j["patterns"] = data.size();
    j["error_history"] = history;
    const fs::path report_path = out / "training_report.json";
    write_json(j, report_path);
    const fs::path hist_path = out / "error_history.csv";
    {
      auto f = open_output(hist_path);
      f << "epoch,train_mape_pct\n";
      for (const auto& [epoch, mape] : rep.error_history) {
        f << epoch << ',' << format_double(mape) << '\n';
      }
    }
    m.output("model", model_path);
    m.output("training_report", report_path);
    m.output("error_history", hist_path);
    m.write();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  fs::path model;
  std::optional<double> t, dod;
  std::optional<std::int64_t> cycle;
  bool sweep = false;
  std::optional<std::string> settings;
  std::optional<std::int64_t> cycle_start, cycle_end, cycle_step;
  bool allow_extrapolation = false;
};

void check_query(const AnyModel& model, double t, double dod, double cycle,
                 bool allow) {
  if (allow) return;
  if (auto v = extrapolated_variable(model, t, dod, cycle)) {
    throw ValidationError("query is outside the model's fitted range for " +
                          std::string(to_string(*v)) +
                          " (pass --allow-extrapolation to predict anyway)");
  }
}

std::string setting_file_name(const Setting& s) {
  return "sweep_T" + format_double(s.temperature_c) + "_DOD" +
         format_double(s.dod_pct) + ".csv";
}

int run_predict(const Globals& g, const PredictArgs& a) {
  const KeyValueFile kv = load_config(g);
  Manifest m("predict", g);
  m.input("model", a.model);
  const AnyModel model = load_any_model(a.model);
  const Target target = target_of(model);
  const std::string column = target == Target::RC ? "rc_pct" : "eodv_v";
  m.config().set("target", std::string(to_string(target)));
  m.config().set("allow_extrapolation", a.allow_extrapolation ? "true" : "false");

  if (!a.sweep) {
    if (!a.t || !a.dod || !a.cycle) {
      throw ValidationError("predict needs --t, --dod and --cycle (or --sweep)");
    }
    check_query(model, *a.t, *a.dod, static_cast<double>(*a.cycle), a.allow_extrapolation);
    const double y = predict_any(model, *a.t, *a.dod, static_cast<double>(*a.cycle));
    if (!g.quiet) {
      std::cout << "temperature_c,dod_pct,cycle," << column << '\n'
                << format_double(*a.t) << ',' << format_double(*a.dod) << ','
                << *a.cycle << ',' << format_double(y) << '\n';
    } else {
      std::cout << format_double(y) << '\n';
    }
    m.config().set("temperature_c", format_double(*a.t));
    m.config().set("dod_pct", format_double(*a.dod));
    m.config().set("cycle", std::to_string(*a.cycle));
    m.write();
    return 0;
  }

  SimulationPlan plan = plan_from_config(kv);
  if (a.settings) plan.settings = parse_settings(*a.settings);
  if (a.cycle_start) plan.cycle_start = *a.cycle_start;
  if (a.cycle_end) plan.cycle_end = *a.cycle_end;
  if (a.cycle_step) plan.cycle_step = *a.cycle_step;
  plan.validate();

  for (const Setting& s : plan.settings) {
    for (std::int64_t c = plan.cycle_start; c <= plan.cycle_end; c += plan.cycle_step) {
      check_query(model, s.temperature_c, s.dod_pct, static_cast<double>(c),
                  a.allow_extrapolation);
    }
  }

  const fs::path out = require_out(g, "predict --sweep");
  const std::string header = "temperature_c,dod_pct,cycle," + column + "\n";
  const fs::path combined_path = out / "sweep.csv";
  auto combined = open_output(combined_path);
  combined << header;
  for (const Setting& s : plan.settings) {
    const fs::path path = out / setting_file_name(s);
    auto f = open_output(path);
    f << header;
    for (std::int64_t c = plan.cycle_start; c <= plan.cycle_end; c += plan.cycle_step) {
      const std::string row = format_double(s.temperature_c) + ',' +
                              format_double(s.dod_pct) + ',' + std::to_string(c) +
                              ',' +
                              format_double(predict_any(model, s.temperature_c, s.dod_pct,
                                                        static_cast<double>(c))) +
                              '\n';
      f << row;
      combined << row;
    }
    m.output("sweep " + format_double(s.temperature_c) + ":" + format_double(s.dod_pct), path);
  }
  combined.close();
  m.output("sweep", combined_path);
  m.config().set("settings", format_settings(plan.settings));
  m.config().set("cycle_start", std::to_string(plan.cycle_start));
  m.config().set("cycle_end", std::to_string(plan.cycle_end));
  m.config().set("cycle_step", std::to_string(plan.cycle_step));
  m.write();
  if (!g.quiet) {
    std::cout << "wrote " << plan.settings.size() << " setting curves and "
              << combined_path.string() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  fs::path model;
  fs::path data;
  std::optional<std::string> ba_mode;
  std::optional<std::string> split;
};

void print_stat(const std::string& name, const Stat<double>& s, int digits) {
  std::cout << name;
  if (s.value) {
    std::cout << fixed(*s.value, digits) << '\n';
  } else {
    std::cout << "unavailable (" << s.reason << ")\n";
  }
}

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
  const KeyValueFile kv = load_config(g);
  Manifest m("evaluate", g);
  m.input("model", a.model);
  const AnyModel model = load_any_model(a.model);
  const Target target = target_of(model);
  const BlandAltmanMode mode = parse_bland_altman_mode(
      pick(a.ba_mode, config_string(kv, "ba_mode"), std::string("absolute")));
  const bool even_odd =
      parse_split(pick(a.split, config_string(kv, "split"), std::string("none")));

  CyclingDataset data = usable_records(load_dataset(a.data, m), target, g.quiet);
  if (even_odd) data = split_even_odd(data).second;

  PairedSeries series;
  series.label = std::string(to_string(target));
  series.units = target == Target::RC ? "%" : "V";
  series.pairs.reserve(data.size());
  for (const auto& r : data.records()) {
    series.pairs.emplace_back(*r.target(target),
                              predict_any(model, r.temperature_c, r.dod_pct,
                                          static_cast<double>(r.cycle)));
  }
  const ComparisonReport report = comparison_report(series, mode);

  m.config().set("target", std::string(to_string(target)));
  m.config().set("ba_mode", std::string(to_string(mode)));
  m.config().set("split", even_odd ? "even-odd" : "none");

  if (!g.quiet) {
    std::cout << "target            " << report.label << " (" << report.units << ")\n"
              << "pairs             " << report.n << '\n';
    print_stat("AAPE %            ", report.aape_pct, 4);
    if (report.correlation.value) {
      std::cout << "r                 " << fixed(report.correlation.value->r, 6) << '\n'
                << "r^2               " << fixed(report.correlation.value->r_squared, 6)
                << '\n';
    } else {
      std::cout << "r                 unavailable (" << report.correlation.reason << ")\n";
    }
    print_stat("CV                ", report.cv, 6);
    if (report.bland_altman.value) {
      const auto& ba = *report.bland_altman.value;
      std::cout << "bias (pred-obs)   " << format_double(ba.bias) << '\n'
                << "limits of agr.    " << format_double(ba.loa_low) << " .. "
                << format_double(ba.loa_high) << '\n';
    } else {
      std::cout << "Bland-Altman      unavailable (" << report.bland_altman.reason << ")\n";
    }
  }

  if (g.out_dir) {
    const fs::path out = require_out(g, "evaluate");
    const fs::path report_path = out / "report.json";
    write_json(to_json(report), report_path);
    const fs::path one_path = out / "one_to_one.csv";
    {
      auto f = open_output(one_path);
      write_one_to_one_csv(one_to_one_export(series), f);
    }
    m.output("report", report_path);
    m.output("one_to_one", one_path);
    if (report.bland_altman.value) {
      const fs::path ba_path = out / "bland_altman.csv";
      auto f = open_output(ba_path);
      write_bland_altman_csv(*report.bland_altman.value, f);
      m.output("bland_altman", ba_path);
    }
    m.write();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// cycle-life

struct CycleLifeArgs {
  std::vector<fs::path> models;
  std::optional<double> t, dod;
  std::optional<double> rc_floor, eodv_floor;
  std::optional<std::int64_t> horizon;
};

std::optional<CycleLife> scan_cycle_life(const AnyModel& rc, const AnyModel& eodv,
                                         double t, double dod, double rc_floor,
                                         double eodv_floor, std::int64_t horizon) {
  for (std::int64_t c = 0; c <= horizon; ++c) {
    const double x = static_cast<double>(c);
    const bool rc_low = predict_any(rc, t, dod, x) < rc_floor;
    const bool eodv_low = predict_any(eodv, t, dod, x) < eodv_floor;
    if (rc_low && eodv_low) return CycleLife{c, FailureCriterion::Both};
    if (rc_low) return CycleLife{c, FailureCriterion::RC};
    if (eodv_low) return CycleLife{c, FailureCriterion::EODV};
  }
  return std::nullopt;
}

int run_cycle_life(const Globals& g, const CycleLifeArgs& a) {
  const KeyValueFile kv = load_config(g);
  Manifest m("cycle-life", g);
  if (!a.t || !a.dod) throw ValidationError("cycle-life needs --t and --dod");
  const double rc_floor = pick(a.rc_floor, kv.get_double("rc_floor"), kRcFailurePct);
  const double eodv_floor = pick(a.eodv_floor, kv.get_double("eodv_floor"), kEodvFailureV);
  const std::int64_t horizon =
      pick(a.horizon, kv.get_int("horizon"), std::int64_t{1'000'000});
  if (horizon < 0) throw ValidationError("--horizon must be >= 0");

  std::optional<CycleLife> life;
  std::string method;
  if (a.models.empty()) {
    const DegradationModelParams params = params_from_config(kv);
    life = cycle_life(params, *a.t, *a.dod, rc_floor, eodv_floor, horizon);
    params_to_config(params, m.config());
    method = "closed-form";
  } else {
    if (a.models.size() != 2) {
      throw ValidationError("cycle-life needs one RC and one EODV model file");
    }
    std::optional<AnyModel> rc, eodv;
    for (const fs::path& p : a.models) {
      AnyModel model = load_any_model(p);
      auto& slot = target_of(model) == Target::RC ? rc : eodv;
      if (slot) throw ValidationError("both model files predict " +
                                      std::string(to_string(target_of(model))));
      slot = std::move(model);
      m.input(target_of(*slot) == Target::RC ? "rc_model" : "eodv_model", p);
    }
    const auto* rc_lin = std::get_if<LinearModel>(&*rc);
    const auto* eodv_lin = std::get_if<LinearModel>(&*eodv);
    if (rc_lin && eodv_lin) {
      DegradationModelParams p;
      p.rc_intercept = rc_lin->intercept;
      p.rc_coeff_t = -rc_lin->coeff_t;
      p.rc_coeff_dod = -rc_lin->coeff_dod;
      p.rc_coeff_cycle = -rc_lin->coeff_cycle;
      p.eodv_intercept = eodv_lin->intercept;
      p.eodv_coeff_t = -eodv_lin->coeff_t;
      p.eodv_coeff_dod = -eodv_lin->coeff_dod;
      p.eodv_coeff_cycle = -eodv_lin->coeff_cycle;
      life = cycle_life(p, *a.t, *a.dod, rc_floor, eodv_floor, horizon);
      method = "closed-form";
    } else {
      life = scan_cycle_life(*rc, *eodv, *a.t, *a.dod, rc_floor, eodv_floor, horizon);
      method = "scan";
    }
  }

  m.config().set("temperature_c", format_double(*a.t));
  m.config().set("dod_pct", format_double(*a.dod));
  m.config().set("rc_floor", format_double(rc_floor));
  m.config().set("eodv_floor", format_double(eodv_floor));
  m.config().set("horizon", std::to_string(horizon));
  m.config().set("method", method);

  if (life) {
    std::cout << "failure at cycle " << life->cycle << " (" << to_string(life->criterion)
              << ")\n";
  } else {
    std::cout << "no failure within " << horizon << " cycles\n";
  }

  if (g.out_dir) {
    const fs::path out = require_out(g, "cycle-life");
    json j;
    j["temperature_c"] = *a.t;
    j["dod_pct"] = *a.dod;
    j["rc_floor"] = rc_floor;
    j["eodv_floor"] = eodv_floor;
    j["horizon"] = horizon;
    j["method"] = method;
    j["failed"] = life.has_value();
    j["cycle"] = life ? json(life->cycle) : json(nullptr);
    j["criterion"] = life ? json(std::string(to_string(life->criterion))) : json(nullptr);
    const fs::path path = out / "cycle_life.json";
    write_json(j, path);
    m.output("cycle_life", path);
    m.write();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Li-ion LEO cycling: retained capacity and end-of-discharge voltage models"};
  app.set_version_flag("--version", LEOCELL_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "PRNG seed");
  app.add_option("--out", g.out_dir, "output directory for machine artifacts");
  app.add_flag("--quiet", g.quiet, "suppress human-readable tables");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic cycling dataset");
  sim_cmd->add_flag("--default-grid", sim.default_grid, "reference settings, cycles 0..25000 step 1000");
  sim_cmd->add_option("--settings", sim.settings, "T:DOD list, e.g. 10:10,20:30");
  sim_cmd->add_option("--cycle-start", sim.cycle_start);
  sim_cmd->add_option("--cycle-end", sim.cycle_end);
  sim_cmd->add_option("--cycle-step", sim.cycle_step);
  sim_cmd->add_option("--noise", sim.noise, "noise SD for both RC (%) and EODV (V)");
  sim_cmd->add_option("--noise-rc", sim.noise_rc, "RC noise SD, percent");
  sim_cmd->add_option("--noise-eodv", sim.noise_eodv, "EODV noise SD, volts");
  sim_cmd->add_option("--knee-cycle", sim.knee_cycle);
  sim_cmd->add_option("--knee-slope-multiplier", sim.knee_multiplier);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-ols", "least-squares linear model");
  fit_cmd->add_option("dataset", fit.data, "dataset CSV")->required();
  fit_cmd->add_option("--target", fit.target, "rc or eodv");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a feedforward network");
  train_cmd->add_option("dataset", tr.data, "dataset CSV")->required();
  train_cmd->add_option("--target", tr.target, "rc or eodv");
  train_cmd->add_option("--layers", tr.layers, "layer sizes, e.g. 3,9,9,1");
  train_cmd->add_option("--learning-rate", tr.learning_rate);
  train_cmd->add_option("--momentum", tr.momentum);
  train_cmd->add_option("--error-target", tr.error_target, "training MAPE target, percent");
  train_cmd->add_option("--max-epochs", tr.max_epochs);
  train_cmd->add_option("--eval-every", tr.eval_every);
  train_cmd->add_flag("--shuffle", tr.shuffle, "seeded shuffle every epoch");
  train_cmd->add_option("--split", tr.split, "even-odd: train on even-rank records only");
  train_cmd->add_option("--resume", tr.resume, "continue training a saved model");

  PredictArgs pr;
  auto* pred_cmd = app.add_subcommand("predict", "evaluate a model file");
  pred_cmd->add_option("model", pr.model, "model file")->required();
  pred_cmd->add_option("--t", pr.t, "temperature, C");
  pred_cmd->add_option("--dod", pr.dod, "depth of discharge, percent");
  pred_cmd->add_option("--cycle", pr.cycle);
  pred_cmd->add_flag("--sweep", pr.sweep, "curves over settings and cycles");
  pred_cmd->add_option("--settings", pr.settings, "T:DOD list for --sweep");
  pred_cmd->add_option("--cycle-start", pr.cycle_start);
  pred_cmd->add_option("--cycle-end", pr.cycle_end);
  pred_cmd->add_option("--cycle-step", pr.cycle_step);
  pred_cmd->add_flag("--allow-extrapolation", pr.allow_extrapolation);

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "compare model predictions with a dataset");
  eval_cmd->add_option("model", ev.model, "model file")->required();
  eval_cmd->add_option("dataset", ev.data, "dataset CSV")->required();
  eval_cmd->add_option("--ba-mode", ev.ba_mode, "absolute or percent");
  eval_cmd->add_option("--split", ev.split, "even-odd: evaluate on odd-rank records only");

  CycleLifeArgs cl;
  auto* cl_cmd = app.add_subcommand("cycle-life", "first cycle below a failure floor");
  cl_cmd->add_option("--model", cl.models, "RC and EODV model files (default: config params)");
  cl_cmd->add_option("--t", cl.t, "temperature, C");
  cl_cmd->add_option("--dod", cl.dod, "depth of discharge, percent");
  cl_cmd->add_option("--rc-floor", cl.rc_floor, "percent, default 40");
  cl_cmd->add_option("--eodv-floor", cl.eodv_floor, "volts, default 2.5");
  cl_cmd->add_option("--horizon", cl.horizon, "last cycle searched, default 1000000");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim_cmd) return run_simulate(g, sim);
    if (*fit_cmd) return run_fit_ols(g, fit);
    if (*train_cmd) return run_train(g, tr);
    if (*pred_cmd) return run_predict(g, pr);
    if (*eval_cmd) return run_evaluate(g, ev);
    if (*cl_cmd) return run_cycle_life(g, cl);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

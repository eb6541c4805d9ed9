#include "leocell/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "leocell/error.hpp"
#include "leocell/keyvalue.hpp"
#include "leocell/numfmt.hpp"
#include "leocell/rng.hpp"

namespace leocell {

std::string_view to_string(Activation) { return "sigmoid"; }

Activation parse_activation(std::string_view text) {
  if (trim(text) == "sigmoid") return Activation::Sigmoid;
  throw ValidationError("unknown activation '" + std::string(text) + "'");
}

void NetworkTopology::validate() const {
  if (layer_sizes.size() < 3) {
    throw ValidationError("topology needs at least one hidden layer");
  }
  if (layer_sizes.front() != 3) {
    throw ValidationError("topology input layer must have 3 neurons (T, DOD, cycle)");
  }
  if (layer_sizes.back() != 1) {
    throw ValidationError("topology output layer must have 1 neuron");
  }
  for (auto s : layer_sizes) {
    if (s == 0) throw ValidationError("topology layer sizes must be positive");
  }
}

std::size_t NetworkTopology::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t i = 1; i < layer_sizes.size(); ++i) {
    count += layer_sizes[i] * layer_sizes[i - 1] + layer_sizes[i];
  }
  return count;
}

void MlpModel::validate() const {
  topology.validate();
  normalization.validate();
  if (layers.size() != topology.layer_sizes.size() - 1) {
    throw ValidationError("model has " + std::to_string(layers.size()) +
                          " layers, topology implies " +
                          std::to_string(topology.layer_sizes.size() - 1));
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    const std::size_t in = topology.layer_sizes[k];
    const std::size_t out = topology.layer_sizes[k + 1];
    if (l.inputs != in || l.outputs != out || l.weights.size() != in * out ||
        l.biases.size() != out) {
      throw ValidationError("layer " + std::to_string(k) + ": shape does not match topology (" +
                            std::to_string(out) + "x" + std::to_string(in) + ")");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
        !std::all_of(l.biases.begin(), l.biases.end(), finite)) {
      throw ValidationError("layer " + std::to_string(k) + ": non-finite parameter");
    }
  }
}

MlpModel init_network(const NetworkTopology& topology, std::uint64_t seed,
                      const NormalizationSpec& normalization, Target target) {
  topology.validate();
  MlpModel m;
  m.topology = topology;
  m.normalization = normalization;
  m.target = target;
  m.seed = seed;
  Xoshiro256 rng(seed);
  for (std::size_t k = 1; k < topology.layer_sizes.size(); ++k) {
    DenseLayer l;
    l.inputs = topology.layer_sizes[k - 1];
    l.outputs = topology.layer_sizes[k];
    l.weights.resize(l.inputs * l.outputs);
    l.biases.resize(l.outputs);
    for (auto& w : l.weights) w = rng.uniform(-0.5, 0.5);
    for (auto& b : l.biases) b = rng.uniform(-0.5, 0.5);
    m.layers.push_back(std::move(l));
  }
  m.validate();
  return m;
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Scratch buffers for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> act;    // act[0] = inputs
  std::vector<std::vector<double>> delta;  // delta[k] for layer k (0-based)

  explicit Workspace(const MlpModel& m) {
    act.resize(m.layers.size() + 1);
    delta.resize(m.layers.size());
    act[0].resize(3);
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
      act[k + 1].resize(m.layers[k].outputs);
      delta[k].resize(m.layers[k].outputs);
    }
  }
};

void load_inputs(const MlpModel& m, double t, double dod, double cycle,
                 std::vector<double>& in) {
  in[0] = m.normalization.normalize(Variable::Temperature, t);
  in[1] = m.normalization.normalize(Variable::Dod, dod);
  in[2] = m.normalization.normalize(Variable::Cycle, cycle);
}

/// Returns the normalized network output.
double forward_pass(const MlpModel& m, Workspace& ws) {
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    const DenseLayer& l = m.layers[k];
    const double* a = ws.act[k].data();
    double* out = ws.act[k + 1].data();
    for (std::size_t j = 0; j < l.outputs; ++j) {
      const double* row = l.weights.data() + j * l.inputs;
      double z = l.biases[j];
      for (std::size_t i = 0; i < l.inputs; ++i) z += row[i] * a[i];
      out[j] = sigmoid(z);
    }
  }
  return ws.act.back()[0];
}

/// Fills ws.delta with dL/dz per layer for L = 0.5*(target - out)^2.
void backward_pass(const MlpModel& m, Workspace& ws, double target_scaled) {
  const std::size_t last = m.layers.size() - 1;
  {
    const double o = ws.act.back()[0];
    ws.delta[last][0] = (o - target_scaled) * o * (1.0 - o);
  }
  for (std::size_t k = last; k-- > 0;) {
    const DenseLayer& next = m.layers[k + 1];
    const auto& a = ws.act[k + 1];
    for (std::size_t i = 0; i < next.inputs; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < next.outputs; ++j) {
        s += next.weights[j * next.inputs + i] * ws.delta[k + 1][j];
      }
      ws.delta[k][i] = s * a[i] * (1.0 - a[i]);
    }
  }
}

double scaled_target(const MlpModel& m, const CyclingRecord& r) {
  auto y = r.target(m.target);
  if (!y) {
    throw ValidationError("record at cycle " + std::to_string(r.cycle) +
                          " has no " + std::string(to_string(m.target)) + " value");
  }
  return m.normalization.normalize(Variable::Target, *y);
}

double loss_with(const MlpModel& m, Workspace& ws, const CyclingRecord& r) {
  load_inputs(m, r.temperature_c, r.dod_pct, static_cast<double>(r.cycle), ws.act[0]);
  const double o = forward_pass(m, ws);
  const double e = scaled_target(m, r) - o;
  return 0.5 * e * e;
}

bool all_finite(const MlpModel& m) {
  for (const auto& l : m.layers) {
    for (double w : l.weights) if (!std::isfinite(w)) return false;
    for (double b : l.biases) if (!std::isfinite(b)) return false;
  }
  return true;
}

}  // namespace

ForwardResult forward(const MlpModel& m, double t, double dod, double cycle) {
  Workspace ws(m);
  load_inputs(m, t, dod, cycle, ws.act[0]);
  const double o = forward_pass(m, ws);
  return {m.normalization.denormalize(Variable::Target, o), std::move(ws.act)};
}

double predict(const MlpModel& m, double t, double dod, double cycle) {
  Workspace ws(m);
  load_inputs(m, t, dod, cycle, ws.act[0]);
  return m.normalization.denormalize(Variable::Target, forward_pass(m, ws));
}

Range prediction_bounds(const MlpModel& m) {
  const double a = m.normalization.denormalize(Variable::Target, 0.0);
  const double b = m.normalization.denormalize(Variable::Target, 1.0);
  return {std::min(a, b), std::max(a, b)};
}

double pattern_loss(const MlpModel& m, const CyclingRecord& r) {
  Workspace ws(m);
  return loss_with(m, ws, r);
}

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
  auto out = layers;
  for (auto& l : out) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
  return out;
}

std::vector<DenseLayer> backprop(const MlpModel& m, const CyclingRecord& r) {
  Workspace ws(m);
  loss_with(m, ws, r);
  backward_pass(m, ws, scaled_target(m, r));
  auto grad = zero_like(m.layers);
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    auto& g = grad[k];
    for (std::size_t j = 0; j < g.outputs; ++j) {
      const double d = ws.delta[k][j];
      for (std::size_t i = 0; i < g.inputs; ++i) g.weight(j, i) = d * ws.act[k][i];
      g.biases[j] = d;
    }
  }
  return grad;
}

namespace {

double online_step_ws(MlpModel& m, Workspace& ws, const CyclingRecord& r,
                      double target_scaled, double lr, double momentum,
                      std::vector<DenseLayer>* velocity) {
  load_inputs(m, r.temperature_c, r.dod_pct, static_cast<double>(r.cycle), ws.act[0]);
  const double o = forward_pass(m, ws);
  const double e = target_scaled - o;
  backward_pass(m, ws, target_scaled);
  // All deltas come from the pre-update weights; now apply the step.
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    DenseLayer& l = m.layers[k];
    const double* a = ws.act[k].data();
    for (std::size_t j = 0; j < l.outputs; ++j) {
      const double d = ws.delta[k][j];
      double* row = l.weights.data() + j * l.inputs;
      if (velocity) {
        DenseLayer& v = (*velocity)[k];
        double* vrow = v.weights.data() + j * l.inputs;
        for (std::size_t i = 0; i < l.inputs; ++i) {
          vrow[i] = momentum * vrow[i] - lr * (d * a[i]);
          row[i] += vrow[i];
        }
        v.biases[j] = momentum * v.biases[j] - lr * d;
        l.biases[j] += v.biases[j];
      } else {
        for (std::size_t i = 0; i < l.inputs; ++i) row[i] -= lr * (d * a[i]);
        l.biases[j] -= lr * d;
      }
    }
  }
  return 0.5 * e * e;
}

}  // namespace

double online_step(MlpModel& m, const CyclingRecord& r, double lr,
                   double momentum, std::vector<DenseLayer>& velocity) {
  Workspace ws(m);
  return online_step_ws(m, ws, r, scaled_target(m, r), lr, momentum,
                        momentum != 0.0 ? &velocity : nullptr);
}

double gradient_check(const MlpModel& model, const CyclingRecord& record,
                      double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2)) {
    throw ValidationError("gradient_check epsilon must lie in (0, 1e-2]");
  }
  const auto analytic = backprop(model, record);
  MlpModel probe = model;
  Workspace ws(probe);
  double worst = 0.0;
  auto check = [&](double& param, double a) {
    const double saved = param;
    param = saved + epsilon;
    const double up = loss_with(probe, ws, record);
    param = saved - epsilon;
    const double down = loss_with(probe, ws, record);
    param = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    worst = std::max(worst, std::abs(a - numeric) /
                                std::max(std::abs(a) + std::abs(numeric), 1e-12));
  };
  for (std::size_t k = 0; k < probe.layers.size(); ++k) {
    for (std::size_t p = 0; p < probe.layers[k].weights.size(); ++p) {
      check(probe.layers[k].weights[p], analytic[k].weights[p]);
    }
    for (std::size_t p = 0; p < probe.layers[k].biases.size(); ++p) {
      check(probe.layers[k].biases[p], analytic[k].biases[p]);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ValidationError("momentum must lie in [0, 1)");
  }
  if (!(error_target_pct > 0.0)) throw ValidationError("error target must be > 0");
  if (max_epochs <= 0) throw ValidationError("max_epochs must be > 0");
  if (eval_every <= 0) throw ValidationError("eval_every must be > 0");
}

double training_mape(const MlpModel& m, const CyclingDataset& dataset) {
  if (dataset.empty()) throw ValidationError("MAPE over an empty dataset");
  Workspace ws(m);
  double sum = 0.0;
  for (const auto& r : dataset.records()) {
    auto y = r.target(m.target);
    if (!y) throw ValidationError("dataset lacks " + std::string(to_string(m.target)) + " values");
    if (*y == 0.0) {
      throw ValidationError("observed value 0 at cycle " + std::to_string(r.cycle) +
                            " makes MAPE undefined; use data bounded away from 0");
    }
    load_inputs(m, r.temperature_c, r.dod_pct, static_cast<double>(r.cycle), ws.act[0]);
    const double pred =
        m.normalization.denormalize(Variable::Target, forward_pass(m, ws));
    sum += std::abs(*y - pred) / std::abs(*y);
  }
  return sum / static_cast<double>(dataset.size()) * 100.0;
}

namespace {

void check_compatible(const MlpModel& m, const CyclingDataset& dataset) {
  if (dataset.empty()) throw ValidationError("training dataset is empty");
  if (!dataset.has_target(m.target)) {
    throw ValidationError("target mismatch: model predicts " +
                          std::string(to_string(m.target)) +
                          " but the dataset has records without that value");
  }
  const auto& n = m.normalization;
  for (const auto& r : dataset.records()) {
    auto bad = n.first_out_of_range(r.temperature_c, r.dod_pct,
                                    static_cast<double>(r.cycle));
    if (!bad && !n.target.contains(*r.target(m.target))) bad = Variable::Target;
    if (bad) {
      throw ValidationError("normalization mismatch: " + std::string(to_string(*bad)) +
                            " of record at cycle " + std::to_string(r.cycle) +
                            " lies outside the model's normalization range");
    }
    if (*r.target(m.target) == 0.0) {
      throw ValidationError("observed value 0 at cycle " + std::to_string(r.cycle) +
                            " makes MAPE undefined; use data bounded away from 0");
    }
  }
}

}  // namespace

TrainingResult train(MlpModel model, const CyclingDataset& dataset,
                     const TrainingConfig& config) {
  config.validate();
  model.validate();
  check_compatible(model, dataset);

  const auto records = dataset.records();
  std::vector<double> targets(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    targets[i] = scaled_target(model, records[i]);
  }
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Xoshiro256 shuffle_rng(config.seed);

  std::vector<DenseLayer> velocity = zero_like(model.layers);
  auto* vel = config.momentum != 0.0 ? &velocity : nullptr;
  Workspace ws(model);

  TrainingReport report;
  model.learning_rate = config.learning_rate;
  double mape = training_mape(model, dataset);
  report.error_history.emplace_back(model.epochs_trained, mape);
  report.converged = mape <= config.error_target_pct;

  while (!report.converged && report.epochs_run < config.max_epochs) {
    if (config.shuffle_each_epoch) {
      // Fisher-Yates with j = floor(uniform01 * (i + 1)).
      for (std::size_t i = order.size(); i-- > 1;) {
        auto j = static_cast<std::size_t>(shuffle_rng.uniform01() * static_cast<double>(i + 1));
        std::swap(order[i], order[j]);
      }
    }
    double loss = 0.0;
    for (std::size_t idx : order) {
      loss += online_step_ws(model, ws, records[idx], targets[idx],
                             config.learning_rate, config.momentum, vel);
    }
    ++report.epochs_run;
    ++model.epochs_trained;
    if (!std::isfinite(loss) || !all_finite(model)) {
      throw DivergenceError(model.epochs_trained,
                            "training diverged at epoch " +
                                std::to_string(model.epochs_trained) +
                                " (non-finite loss or parameter)");
    }
    if (report.epochs_run % config.eval_every == 0 ||
        report.epochs_run == config.max_epochs) {
      mape = training_mape(model, dataset);
      report.error_history.emplace_back(model.epochs_trained, mape);
      report.converged = mape <= config.error_target_pct;
    }
  }
  report.final_train_mape_pct = mape;
  return {std::move(model), std::move(report)};
}

TrainingResult resume_train(const std::filesystem::path& model_path,
                            const CyclingDataset& dataset,
                            const TrainingConfig& config) {
  return train(load_model(model_path), dataset, config);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_model(const MlpModel& m, const std::filesystem::path& path) {
  m.validate();
  KeyValueFile kv;
  kv.set("kind", "mlp");
  kv.set("schema_version", "1");
  kv.set("target", std::string(to_string(m.target)));
  std::string sizes;
  for (std::size_t i = 0; i < m.topology.layer_sizes.size(); ++i) {
    if (i) sizes += ' ';
    sizes += std::to_string(m.topology.layer_sizes[i]);
  }
  kv.set("layer_sizes", sizes);
  kv.set("activation", std::string(to_string(m.topology.activation)));
  kv.set("learning_rate", format_double(m.learning_rate));
  kv.set("epochs_trained", std::to_string(m.epochs_trained));
  kv.set("seed", std::to_string(m.seed));
  const auto& n = m.normalization;
  for (auto v : {Variable::Temperature, Variable::Dod, Variable::Cycle, Variable::Target}) {
    const std::string base = "norm." + std::string(to_string(v));
    kv.set(base + ".min", format_double(n.range(v).min));
    kv.set(base + ".max", format_double(n.range(v).max));
  }
  kv.set("norm.output_low", format_double(n.output_low));
  kv.set("norm.output_high", format_double(n.output_high));
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    kv.set("weights." + std::to_string(k), format_list(m.layers[k].weights));
    kv.set("biases." + std::to_string(k), format_list(m.layers[k].biases));
  }
  kv.save(path);
}

MlpModel load_model(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  const std::string src = path.string();
  if (kv.require("kind") != "mlp") throw ValidationError(src + ": not an MLP model file");
  if (kv.require("schema_version") != "1") {
    throw ValidationError(src + ": unsupported schema_version " +
                          kv.require("schema_version") + " (expected 1)");
  }
  MlpModel m;
  m.target = parse_target(kv.require("target"));
  m.topology.layer_sizes.clear();
  for (double s : parse_list(kv.require("layer_sizes"), "layer_sizes")) {
    if (!(s >= 1.0) || s != std::floor(s)) {
      throw ValidationError(src + ": layer_sizes must be positive integers");
    }
    m.topology.layer_sizes.push_back(static_cast<std::size_t>(s));
  }
  m.topology.activation = parse_activation(kv.require("activation"));
  m.topology.validate();
  m.learning_rate = parse_double(kv.require("learning_rate"), "learning_rate");
  m.epochs_trained = parse_int64(kv.require("epochs_trained"), "epochs_trained");
  m.seed = parse_uint64(kv.require("seed"), "seed");
  auto& n = m.normalization;
  auto read_range = [&](Variable v) {
    const std::string base = "norm." + std::string(to_string(v));
    return Range{parse_double(kv.require(base + ".min"), base + ".min"),
                 parse_double(kv.require(base + ".max"), base + ".max")};
  };
  n.temperature_c = read_range(Variable::Temperature);
  n.dod_pct = read_range(Variable::Dod);
  n.cycle = read_range(Variable::Cycle);
  n.target = read_range(Variable::Target);
  n.output_low = parse_double(kv.require("norm.output_low"), "norm.output_low");
  n.output_high = parse_double(kv.require("norm.output_high"), "norm.output_high");

  const auto& sizes = m.topology.layer_sizes;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer l;
    l.inputs = sizes[k];
    l.outputs = sizes[k + 1];
    const std::string wkey = "weights." + std::to_string(k);
    const std::string bkey = "biases." + std::to_string(k);
    l.weights = parse_list(kv.require(wkey), wkey);
    l.biases = parse_list(kv.require(bkey), bkey);
    if (l.weights.size() != l.inputs * l.outputs) {
      throw ValidationError(src + ": layer " + std::to_string(k) + ": expected " +
                            std::to_string(l.inputs * l.outputs) + " weights, got " +
                            std::to_string(l.weights.size()));
    }
    if (l.biases.size() != l.outputs) {
      throw ValidationError(src + ": layer " + std::to_string(k) + ": expected " +
                            std::to_string(l.outputs) + " biases, got " +
                            std::to_string(l.biases.size()));
    }
    m.layers.push_back(std::move(l));
  }
  if (kv.contains("weights." + std::to_string(sizes.size() - 1))) {
    throw ValidationError(src + ": more weight lines than layer_sizes implies");
  }
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(src + ": " + e.what());
  }
  return m;
}

}  // namespace leocell

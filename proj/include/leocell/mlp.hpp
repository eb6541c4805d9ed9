#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leocell/dataset.hpp"

namespace leocell {

enum class Activation { Sigmoid };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view text);

/// Layer widths from input to output. Inputs are (T, DOD, cycle) and the
/// single output is the model's target.
struct NetworkTopology {
  std::vector<std::size_t> layer_sizes{3, 9, 9, 1};
  Activation activation = Activation::Sigmoid;

  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const NetworkTopology&) const = default;
};

/// Fully connected layer. `weights` is outputs x inputs, row-major.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& weight(std::size_t to, std::size_t from) { return weights[to * inputs + from]; }
  double weight(std::size_t to, std::size_t from) const { return weights[to * inputs + from]; }
  bool operator==(const DenseLayer&) const = default;
};

struct MlpModel {
  NetworkTopology topology;
  std::vector<DenseLayer> layers;
  NormalizationSpec normalization;
  Target target = Target::RC;
  std::int64_t epochs_trained = 0;
  std::uint64_t seed = 0;
  double learning_rate = 0.4;

  /// Shapes match the topology, all values finite, normalization valid.
  void validate() const;
  bool operator==(const MlpModel&) const = default;
};

/// Weights and biases uniform in [-0.5, 0.5) from Xoshiro256(seed). Draw
/// order: layer by layer, all weights row-major, then that layer's biases.
MlpModel init_network(const NetworkTopology& topology, std::uint64_t seed,
                      const NormalizationSpec& normalization = {},
                      Target target = Target::RC);

struct ForwardResult {
  double prediction = 0.0;  ///< denormalized, in target units
  /// activations[0] holds the normalized inputs, activations[k] the sigmoid
  /// outputs of layer k.
  std::vector<std::vector<double>> activations;
};

ForwardResult forward(const MlpModel& model, double temperature_c,
                      double dod_pct, double cycle);
double predict(const MlpModel& model, double temperature_c, double dod_pct,
               double cycle);

/// Open interval every prediction falls into: the denormalized images of
/// sigmoid outputs 0 and 1.
Range prediction_bounds(const MlpModel& model);

/// Per-pattern loss 0.5*(target - output)^2 on normalized values.
double pattern_loss(const MlpModel& model, const CyclingRecord& record);

/// d(pattern_loss)/d(parameter), laid out exactly like model.layers.
std::vector<DenseLayer> backprop(const MlpModel& model,
                                 const CyclingRecord& record);

/// One online gradient step on a single pattern:
///   velocity = momentum*velocity - learning_rate*gradient; param += velocity.
/// `velocity` must be shaped like model.layers (see zero_like). Returns the
/// pattern loss before the update.
double online_step(MlpModel& model, const CyclingRecord& record,
                   double learning_rate, double momentum,
                   std::vector<DenseLayer>& velocity);

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers);

/// Worst relative disagreement, over every weight and bias, between backprop
/// and the central difference (L(p+eps) - L(p-eps)) / 2eps:
///   max_p |a - n| / max(|a| + |n|, 1e-12).
/// Requires 0 < epsilon <= 1e-2.
double gradient_check(const MlpModel& model, const CyclingRecord& record,
                      double epsilon = 1e-5);

struct TrainingConfig {
  double learning_rate = 0.4;
  double momentum = 0.0;
  double error_target_pct = 0.7;
  std::int64_t max_epochs = 200000;
  std::uint64_t seed = 1;
  bool shuffle_each_epoch = false;
  std::int64_t eval_every = 100;

  void validate() const;
};

struct TrainingReport {
  std::int64_t epochs_run = 0;
  double final_train_mape_pct = 0.0;
  /// (cumulative model epoch, training MAPE %) at every check, starting with
  /// the check before the first pass.
  std::vector<std::pair<std::int64_t, double>> error_history;
  bool converged = false;
};

struct TrainingResult {
  MlpModel model;
  TrainingReport report;
};

/// Mean of |observed - predicted| / |observed| * 100 over the dataset, in
/// target units.
double training_mape(const MlpModel& model, const CyclingDataset& dataset);

/// Online backpropagation in dataset order (or a seeded shuffle) until the
/// training MAPE reaches the error target or max_epochs passes are done.
/// Throws DivergenceError when the loss or a parameter goes non-finite.
TrainingResult train(MlpModel model, const CyclingDataset& dataset,
                     const TrainingConfig& config);

/// Loads a saved model and continues training it. epochs_trained
/// accumulates; momentum restarts from zero.
TrainingResult resume_train(const std::filesystem::path& model_path,
                            const CyclingDataset& dataset,
                            const TrainingConfig& config);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace leocell

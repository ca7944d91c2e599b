#pragma once

// Small fully connected regression network (sigmoid hidden layers, linear
// output) trained by plain gradient descent to map a degradation state to the
// optimal next inspection interval.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbm/model.hpp"
#include "cbm/optimizer.hpp"

namespace cbm {

enum class FeatureMode {
  UOnly,        // u_i / H_i
  UPlusParams,  // u_i / H_i followed by the process parameters of every component and lambda
};

std::string to_string(FeatureMode m);
FeatureMode parse_feature_mode(const std::string& s);

struct FeatureSpec {
  FeatureMode mode = FeatureMode::UOnly;

  std::size_t feature_count(std::size_t n_components) const;
  std::vector<double> build(const SystemModel& s, const DegradationState& u) const;
};

/// Per-feature affine map x -> (x - shift) / scale.
struct Scaler {
  std::vector<double> shift;
  std::vector<double> scale;

  static Scaler identity(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}; }
  /// Mean / population sd per column; zero-variance columns get scale 1.
  static Scaler fit(const std::vector<std::vector<double>>& rows);
  std::size_t size() const { return shift.size(); }
};

/// Weights are row-major [out x in].
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }
};

enum class TrainMode { PerSampleSGD, FullBatchGD };
std::string to_string(TrainMode m);
TrainMode parse_train_mode(const std::string& s);

struct TrainingMetadata {
  double learning_rate = 0.0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::PerSampleSGD;
  double final_train_mse = 0.0;
  double final_test_mse = 0.0;
};

struct MlpModel {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., 1
  std::vector<DenseLayer> layers;
  Scaler input_scaler;
  double output_shift = 0.0;
  double output_scale = 1.0;
  FeatureSpec features;
  double tau_min = 0.0;  // prediction clamp
  double tau_max = 0.0;
  std::uint64_t system_fingerprint = 0;
  std::uint64_t dataset_fingerprint = 0;
  TrainingMetadata training;

  /// Glorot-uniform weights, zero biases, identity scalers.
  static MlpModel create(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

  std::size_t input_size() const { return layer_sizes.front(); }
  void validate() const;
};

/// Gradients with the shapes of MlpModel::layers.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

double sigmoid(double z);

/// Scaled input -> sigmoid hidden layers -> linear output -> inverse output scaling.
double forward(const MlpModel& m, std::span<const double> features);

/// Squared error of one sample in the model's scaled output space:
/// ((forward(x) - target) / output_scale)^2. This is the loss the gradients refer to.
double sample_loss(const MlpModel& m, std::span<const double> features, double target);

Gradients backprop_gradients(const MlpModel& m, std::span<const double> features, double target);

double mse(std::span<const double> preds, std::span<const double> targets);
double r_squared(std::span<const double> preds, std::span<const double> targets);

struct TrainOptions {
  double learning_rate = 0.05;
  std::size_t epochs = 2000;
  TrainMode mode = TrainMode::PerSampleSGD;
  std::uint64_t seed = 0;
  bool update_biases = true;
  double divergence_mse = 1e12;
};

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history;  // training MSE (original units) after each epoch
};

/// Gradient descent on raw feature rows and targets with the model's current
/// scalers left untouched.
TrainResult train_on(MlpModel m, const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     const TrainOptions& opts);

/// Builds features for the training rows of d, fits input/output scalers
/// on them, trains, and records metadata and fingerprints. Uses every row
/// when d has no split.
TrainResult train(MlpModel m, const Dataset& d, const SystemModel& s, const FeatureSpec& spec,
                  const TrainOptions& opts);

/// Forward pass on the state's features, clamped to [tau_min, tau_max].
/// Throws FingerprintMismatch when the model was trained for another system.
double predict_next_inspection(const MlpModel& m, const SystemModel& s, const DegradationState& u);

/// Versioned JSON document; doubles are written in shortest round-trip form.
std::string model_to_json(const MlpModel& m, int indent = 2);
MlpModel model_from_json(const std::string& text);

std::string loss_history_to_csv(const std::vector<double>& history);

}  // namespace cbm

#include "cbm/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cbm/error.hpp"
#include "cbm/io.hpp"
#include "cbm/rng.hpp"

namespace cbm {

namespace {

using Json = nlohmann::json;

// Layer activations of one forward pass; acts[0] is the scaled input.
struct ForwardState {
  std::vector<std::vector<double>> acts;
  double output_scaled = 0.0;
};

ForwardState run_forward(const MlpModel& m, std::span<const double> features) {
  if (features.size() != m.input_size()) {
    throw DimensionError("model expects " + std::to_string(m.input_size()) + " features, got " +
                         std::to_string(features.size()));
  }
  ForwardState st;
  st.acts.reserve(m.layers.size());
  std::vector<double> a(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    a[i] = (features[i] - m.input_scaler.shift[i]) / m.input_scaler.scale[i];
  }
  st.acts.push_back(a);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const DenseLayer& layer = m.layers[l];
    const bool last = l + 1 == m.layers.size();
    std::vector<double> next(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double z = layer.bias[o];
      for (std::size_t i = 0; i < layer.in; ++i) z += layer.w(o, i) * st.acts.back()[i];
      next[o] = last ? z : sigmoid(z);
    }
    if (last) {
      st.output_scaled = next[0];
    } else {
      st.acts.push_back(std::move(next));
    }
  }
  return st;
}

Gradients zero_gradients(const MlpModel& m) {
  Gradients g;
  for (const DenseLayer& layer : m.layers) {
    g.weights.emplace_back(layer.weights.size(), 0.0);
    g.biases.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

// Adds scale * dL/dtheta for one sample into g.
void accumulate_gradients(const MlpModel& m, std::span<const double> features, double target, double scale,
                          Gradients& g) {
  const ForwardState st = run_forward(m, features);
  const double y_scaled = (target - m.output_shift) / m.output_scale;
  std::vector<double> delta{2.0 * (st.output_scaled - y_scaled)};
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    const DenseLayer& layer = m.layers[l];
    const std::vector<double>& input = st.acts[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      g.biases[l][o] += scale * delta[o];
      for (std::size_t i = 0; i < layer.in; ++i) g.weights[l][o * layer.in + i] += scale * delta[o] * input[i];
    }
    if (l == 0) break;
    // Back through the sigmoid that produced `input`.
    std::vector<double> prev(layer.in, 0.0);
    for (std::size_t i = 0; i < layer.in; ++i) {
      double s = 0.0;
      for (std::size_t o = 0; o < layer.out; ++o) s += layer.w(o, i) * delta[o];
      prev[i] = s * input[i] * (1.0 - input[i]);
    }
    delta = std::move(prev);
  }
}

void apply_update(MlpModel& m, const Gradients& g, double eta, bool update_biases) {
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    DenseLayer& layer = m.layers[l];
    for (std::size_t k = 0; k < layer.weights.size(); ++k) layer.weights[k] -= eta * g.weights[l][k];
    if (update_biases) {
      for (std::size_t k = 0; k < layer.bias.size(); ++k) layer.bias[k] -= eta * g.biases[l][k];
    }
  }
}

double dataset_mse(const MlpModel& m, const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  std::vector<double> preds(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) preds[r] = forward(m, x[r]);
  return mse(preds, y);
}

void zero(Gradients& g) {
  for (auto& w : g.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : g.biases) std::fill(b.begin(), b.end(), 0.0);
}

}  // namespace

std::string to_string(FeatureMode m) { return m == FeatureMode::UOnly ? "u_only" : "u_plus_params"; }

FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "u_only") return FeatureMode::UOnly;
  if (s == "u_plus_params") return FeatureMode::UPlusParams;
  throw ConfigError("unknown feature mode '" + s + "' (expected u_only|u_plus_params)");
}

std::string to_string(TrainMode m) { return m == TrainMode::PerSampleSGD ? "per_sample_sgd" : "full_batch_gd"; }

TrainMode parse_train_mode(const std::string& s) {
  if (s == "per_sample_sgd") return TrainMode::PerSampleSGD;
  if (s == "full_batch_gd") return TrainMode::FullBatchGD;
  throw ConfigError("unknown training mode '" + s + "' (expected per_sample_sgd|full_batch_gd)");
}

std::size_t FeatureSpec::feature_count(std::size_t n) const {
  return mode == FeatureMode::UOnly ? n : n + 8 * n + 1;
}

std::vector<double> FeatureSpec::build(const SystemModel& s, const DegradationState& u) const {
  if (u.size() != s.size()) throw DimensionError("degradation state does not match the system size");
  std::vector<double> f;
  f.reserve(feature_count(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) f.push_back(u[i] / s.components[i].soft_threshold);
  if (mode == FeatureMode::UPlusParams) {
    // Raw parameters; the input scaler standardises them.
    for (const ComponentParams& c : s.components) {
      f.insert(f.end(), {c.soft_threshold, c.hard_threshold, c.gamma_shape_rate, c.gamma_rate,
                         c.shock_magnitude_mean, c.shock_magnitude_sd, c.shock_damage_mean, c.shock_damage_sd});
    }
    f.push_back(s.shock_rate);
  }
  return f;
}

Scaler Scaler::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DimensionError("cannot fit a scaler on zero rows");
  const std::size_t p = rows.front().size();
  Scaler sc = identity(p);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[j];
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    var /= static_cast<double>(rows.size());
    sc.shift[j] = mean;
    sc.scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return sc;
}

MlpModel MlpModel::create(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw DimensionError("network needs at least input and output sizes");
  if (layer_sizes.back() != 1) throw DimensionError("network output size must be 1");
  for (std::size_t n : layer_sizes) {
    if (n == 0) throw DimensionError("layer sizes must be positive");
  }
  MlpModel m;
  m.layer_sizes = layer_sizes;
  auto gen = RngSeed{seed, 0x1417}.engine();
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = layer_sizes[l];
    layer.out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weights.resize(layer.in * layer.out);
    for (double& w : layer.weights) w = dist(gen);
    layer.bias.assign(layer.out, 0.0);
    m.layers.push_back(std::move(layer));
  }
  m.input_scaler = Scaler::identity(layer_sizes.front());
  return m;
}

void MlpModel::validate() const {
  if (layer_sizes.size() < 2 || layers.size() + 1 != layer_sizes.size()) {
    throw DimensionError("layer list does not match layer_sizes");
  }
  if (layer_sizes.back() != 1) throw DimensionError("network output size must be 1");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (layer.in != layer_sizes[l] || layer.out != layer_sizes[l + 1] ||
        layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw DimensionError("layer " + std::to_string(l) + " shapes do not chain");
    }
  }
  if (input_scaler.shift.size() != input_size() || input_scaler.scale.size() != input_size()) {
    throw DimensionError("input scaler size does not match the input layer");
  }
  for (double s : input_scaler.scale) {
    if (s == 0.0 || !std::isfinite(s)) throw DimensionError("input scaler has a zero scale");
  }
  if (output_scale == 0.0 || !std::isfinite(output_scale)) throw DimensionError("output scaler has a zero scale");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double forward(const MlpModel& m, std::span<const double> features) {
  return run_forward(m, features).output_scaled * m.output_scale + m.output_shift;
}

double sample_loss(const MlpModel& m, std::span<const double> features, double target) {
  const double r = (forward(m, features) - target) / m.output_scale;
  return r * r;
}

Gradients backprop_gradients(const MlpModel& m, std::span<const double> features, double target) {
  Gradients g = zero_gradients(m);
  accumulate_gradients(m, features, target, 1.0, g);
  return g;
}

double mse(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) throw DimensionError("mse: length mismatch");
  if (preds.empty()) throw DimensionError("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) acc += (targets[i] - preds[i]) * (targets[i] - preds[i]);
  return acc / static_cast<double>(preds.size());
}

double r_squared(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) throw DimensionError("r_squared: length mismatch");
  if (preds.size() < 2) throw DimensionError("r_squared needs at least two points");
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ss_res += (targets[i] - preds[i]) * (targets[i] - preds[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot == 0.0) throw DomainError("r_squared: targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

TrainResult train_on(MlpModel m, const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     const TrainOptions& opts) {
  if (!(opts.learning_rate >= 0.0) || !std::isfinite(opts.learning_rate)) {
    throw ConfigError("learning rate must be finite and >= 0");
  }
  if (opts.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (x.empty() || x.size() != y.size()) throw DimensionError("training needs matching, non-empty x and y");
  m.validate();

  TrainResult result;
  result.loss_history.reserve(opts.epochs);
  Gradients g = zero_gradients(m);
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto gen = RngSeed{opts.seed, 0x5eed}.engine();
  const double inv_n = 1.0 / static_cast<double>(x.size());

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    if (opts.mode == TrainMode::PerSampleSGD) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(gen() % i)]);
      }
      for (std::size_t r : order) {
        zero(g);
        accumulate_gradients(m, x[r], y[r], 1.0, g);
        apply_update(m, g, opts.learning_rate, opts.update_biases);
      }
    } else {
      zero(g);
      for (std::size_t r = 0; r < x.size(); ++r) accumulate_gradients(m, x[r], y[r], inv_n, g);
      apply_update(m, g, opts.learning_rate, opts.update_biases);
    }
    const double loss = dataset_mse(m, x, y);
    if (!std::isfinite(loss) || loss > opts.divergence_mse) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch + 1) + " (train mse " +
                         format_number(loss) + ", learning rate " + format_number(opts.learning_rate) + ")");
    }
    result.loss_history.push_back(loss);
  }
  m.training.learning_rate = opts.learning_rate;
  m.training.epochs = opts.epochs;
  m.training.seed = opts.seed;
  m.training.mode = opts.mode;
  m.training.final_train_mse = result.loss_history.back();
  result.model = std::move(m);
  return result;
}

TrainResult train(MlpModel m, const Dataset& d, const SystemModel& s, const FeatureSpec& spec,
                  const TrainOptions& opts) {
  if (d.n_components != s.size()) throw DimensionError("dataset and system disagree on component count");
  if (m.input_size() != spec.feature_count(s.size())) {
    throw DimensionError("model input size does not match the feature specification");
  }
  std::vector<std::size_t> rows = d.split.empty() ? std::vector<std::size_t>{} : d.indices(Split::Train);
  if (d.split.empty()) {
    rows.resize(d.rows.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  if (rows.empty()) throw ConfigError("dataset has no training rows");

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (std::size_t r : rows) {
    x.push_back(spec.build(s, d.rows[r].u));
    y.push_back(d.rows[r].tau_star);
  }
  m.features = spec;
  m.input_scaler = Scaler::fit(x);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  m.output_shift = mean;
  m.output_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  m.system_fingerprint = fingerprint(s);
  m.dataset_fingerprint = d.fingerprint;

  TrainResult result = train_on(std::move(m), x, y, opts);

  const auto test = d.indices(Split::Test);
  if (!test.empty()) {
    std::vector<std::vector<double>> xt;
    std::vector<double> yt;
    for (std::size_t r : test) {
      xt.push_back(spec.build(s, d.rows[r].u));
      yt.push_back(d.rows[r].tau_star);
    }
    result.model.training.final_test_mse = dataset_mse(result.model, xt, yt);
  }
  return result;
}

double predict_next_inspection(const MlpModel& m, const SystemModel& s, const DegradationState& u) {
  if (m.system_fingerprint != fingerprint(s)) {
    throw FingerprintMismatch("model was trained for system " + fingerprint_hex(m.system_fingerprint) +
                              ", not " + fingerprint_hex(fingerprint(s)));
  }
  const double raw = forward(m, m.features.build(s, u));
  if (std::isnan(raw)) throw NumericError("surrogate produced NaN");
  return std::clamp(raw, m.tau_min, m.tau_max);
}

std::string model_to_json(const MlpModel& m, int indent) {
  Json j;
  j["format"] = "cbm-mlp";
  j["version"] = 1;
  j["layer_sizes"] = m.layer_sizes;
  j["hidden_activation"] = "sigmoid";
  j["output_activation"] = "linear";
  Json layers = Json::array();
  for (const DenseLayer& l : m.layers) {
    layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  j["layers"] = layers;
  j["input_scaler"] = {{"shift", m.input_scaler.shift}, {"scale", m.input_scaler.scale}};
  j["output_scaler"] = {{"shift", m.output_shift}, {"scale", m.output_scale}};
  j["features"] = to_string(m.features.mode);
  j["clamp"] = {{"tau_min", m.tau_min}, {"tau_max", m.tau_max}};
  j["system_fingerprint"] = fingerprint_hex(m.system_fingerprint);
  j["dataset_fingerprint"] = fingerprint_hex(m.dataset_fingerprint);
  j["training"] = {{"learning_rate", m.training.learning_rate},
                   {"epochs", m.training.epochs},
                   {"seed", m.training.seed},
                   {"mode", to_string(m.training.mode)},
                   {"final_train_mse", m.training.final_train_mse},
                   {"final_test_mse", m.training.final_test_mse}};
  return j.dump(indent);
}

MlpModel model_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (j.value("format", "") != "cbm-mlp") throw ConfigError("not a cbm-mlp model document");
    if (j.at("version").get<int>() != 1) throw ConfigError("unsupported model version");
    MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    for (const auto& l : j.at("layers")) {
      DenseLayer layer;
      layer.in = l.at("in").get<std::size_t>();
      layer.out = l.at("out").get<std::size_t>();
      layer.weights = l.at("weights").get<std::vector<double>>();
      layer.bias = l.at("bias").get<std::vector<double>>();
      m.layers.push_back(std::move(layer));
    }
    m.input_scaler.shift = j.at("input_scaler").at("shift").get<std::vector<double>>();
    m.input_scaler.scale = j.at("input_scaler").at("scale").get<std::vector<double>>();
    m.output_shift = j.at("output_scaler").at("shift").get<double>();
    m.output_scale = j.at("output_scaler").at("scale").get<double>();
    m.features.mode = parse_feature_mode(j.at("features").get<std::string>());
    m.tau_min = j.at("clamp").at("tau_min").get<double>();
    m.tau_max = j.at("clamp").at("tau_max").get<double>();
    m.system_fingerprint = parse_fingerprint_hex(j.at("system_fingerprint").get<std::string>());
    m.dataset_fingerprint = parse_fingerprint_hex(j.at("dataset_fingerprint").get<std::string>());
    const Json& t = j.at("training");
    m.training.learning_rate = t.at("learning_rate").get<double>();
    m.training.epochs = t.at("epochs").get<std::size_t>();
    m.training.seed = t.at("seed").get<std::uint64_t>();
    m.training.mode = parse_train_mode(t.at("mode").get<std::string>());
    m.training.final_train_mse = t.at("final_train_mse").get<double>();
    m.training.final_test_mse = t.at("final_test_mse").get<double>();
    m.validate();
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed model JSON: ") + e.what());
  }
}

std::string loss_history_to_csv(const std::vector<double>& history) {
  std::ostringstream os;
  os << "epoch,train_mse\n";
  for (std::size_t k = 0; k < history.size(); ++k) os << k + 1 << ',' << format_number(history[k]) << '\n';
  return os.str();
}

}  // namespace cbm

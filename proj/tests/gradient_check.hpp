#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cbm/surrogate.hpp"

namespace cbm::test {

// Random network with non-trivial scalers, plus one input and target.
struct GradientCase {
  MlpModel model;
  std::vector<double> x;
  double target = 0.0;
};

inline GradientCase random_gradient_case(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> width(1, 6), depth(0, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> positive(0.5, 2.0);

  std::vector<std::size_t> sizes{width(gen)};
  for (std::size_t d = depth(gen); d > 0; --d) sizes.push_back(width(gen));
  sizes.push_back(1);
  GradientCase c;
  c.model = MlpModel::create(sizes, seed);
  for (auto& layer : c.model.layers) {
    for (double& w : layer.weights) w = normal(gen);
    for (double& b : layer.bias) b = 0.5 * normal(gen);
  }
  for (std::size_t i = 0; i < sizes.front(); ++i) {
    c.model.input_scaler.shift[i] = normal(gen);
    c.model.input_scaler.scale[i] = positive(gen);
    c.x.push_back(2.0 * normal(gen));
  }
  c.model.output_shift = normal(gen);
  c.model.output_scale = positive(gen);
  c.target = 3.0 * normal(gen);
  return c;
}

struct GradientCheck {
  double worst_relative = 0.0;
  std::size_t parameters = 0;
};

// Central differences with step h on every weight and bias. Relative error
// uses max(|analytic|, |numeric|, floor) so exact zeros do not divide by zero.
inline GradientCheck check_gradients(const GradientCase& c, double h = 1e-5, double floor = 1e-7) {
  const Gradients g = backprop_gradients(c.model, c.x, c.target);
  GradientCheck out;
  MlpModel m = c.model;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = sample_loss(m, c.x, c.target);
    param = saved - h;
    const double down = sample_loss(m, c.x, c.target);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    out.worst_relative = std::max(out.worst_relative, std::abs(analytic - numeric) / denom);
    ++out.parameters;
  };
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    for (std::size_t k = 0; k < m.layers[l].weights.size(); ++k) probe(m.layers[l].weights[k], g.weights[l][k]);
    for (std::size_t k = 0; k < m.layers[l].bias.size(); ++k) probe(m.layers[l].bias[k], g.biases[l][k]);
  }
  return out;
}

}  // namespace cbm::test

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cbm/model.hpp"
#include "cbm/optimizer.hpp"
#include "cbm/reliability.hpp"
#include "cbm/surrogate.hpp"

namespace cbm {

struct DatasetConfig {
  std::size_t n_scenarios = 60;
  USampler sampler;
  double train_fraction = 0.7;
};

struct SurrogateConfig {
  std::vector<std::size_t> hidden_layers{16, 16};
  FeatureSpec features;
  TrainOptions training;  // seed is overwritten from the experiment seed
};

struct SimulationConfig {
  double horizon = 20.0;
  std::size_t replications = 200;
  std::size_t subgrid_steps = 32;
};

/// Every input of an experiment. Stage seeds are derived from `seed`, so a
/// single number reproduces a whole run.
struct ExperimentConfig {
  int schema_version = 1;
  SystemModel system;
  CostParams costs;
  QuadratureSpec quadrature;
  SearchOptions solver;
  DatasetConfig dataset;
  SurrogateConfig surrogate;
  SimulationConfig simulation;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  /// Throws ConfigError on the first inconsistency.
  void validate() const;

  std::uint64_t stage_seed(const std::string& stage) const;
};

/// The reference three-component series system with the documented default
/// costs (C_I = 50, C_R = 200 each, C_D = 500).
ExperimentConfig default_config();

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace cbm

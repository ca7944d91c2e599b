#include "cbm/config.hpp"

#include <cmath>

#include <json.hpp>

#include "cbm/error.hpp"
#include "cbm/io.hpp"
#include "cbm/rng.hpp"

namespace cbm {

namespace {

using Json = nlohmann::json;

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ComponentParams component_from_json(const Json& j) {
  ComponentParams c;
  c.soft_threshold = j.at("soft_threshold").get<double>();
  c.hard_threshold = j.at("hard_threshold").get<double>();
  c.gamma_shape_rate = j.at("gamma_shape_rate").get<double>();
  c.gamma_rate = j.at("gamma_rate").get<double>();
  c.shock_magnitude_mean = j.at("shock_magnitude").at("mean").get<double>();
  c.shock_magnitude_sd = j.at("shock_magnitude").at("sd").get<double>();
  c.shock_damage_mean = j.at("shock_damage").at("mean").get<double>();
  c.shock_damage_sd = j.at("shock_damage").at("sd").get<double>();
  return c;
}

Json component_to_json(const ComponentParams& c) {
  return {{"soft_threshold", c.soft_threshold},
          {"hard_threshold", c.hard_threshold},
          {"gamma_shape_rate", c.gamma_shape_rate},
          {"gamma_rate", c.gamma_rate},
          {"shock_magnitude", {{"mean", c.shock_magnitude_mean}, {"sd", c.shock_magnitude_sd}}},
          {"shock_damage", {{"mean", c.shock_damage_mean}, {"sd", c.shock_damage_sd}}}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != 1) throw ConfigError("unsupported config schema_version " + std::to_string(schema_version));
  system.validate();
  costs.validate_for(system);
  quadrature.validate();
  solver.validate();
  dataset.sampler.validate();
  if (dataset.n_scenarios < 1) throw ConfigError("dataset.n_scenarios must be >= 1");
  if (!(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0)) {
    throw ConfigError("dataset.train_fraction must lie in (0, 1)");
  }
  for (std::size_t h : surrogate.hidden_layers) {
    if (h == 0) throw ConfigError("surrogate hidden layer sizes must be positive");
  }
  if (!(surrogate.training.learning_rate > 0.0)) throw ConfigError("surrogate.learning_rate must be > 0");
  if (surrogate.training.epochs < 1) throw ConfigError("surrogate.epochs must be >= 1");
  if (!(simulation.horizon > 0.0)) throw ConfigError("simulation.horizon must be > 0");
  if (simulation.replications < 1) throw ConfigError("simulation.replications must be >= 1");
  if (simulation.subgrid_steps < 1) throw ConfigError("simulation.subgrid_steps must be >= 1");
}

std::uint64_t ExperimentConfig::stage_seed(const std::string& stage) const {
  std::uint64_t h = splitmix64(seed);
  for (unsigned char ch : stage) h = splitmix64(h ^ ch);
  return h;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.system = reference_system();
  cfg.costs = CostParams::defaults(cfg.system.size());
  return cfg;
}

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig cfg = default_config();
  try {
    const Json j = Json::parse(text);
    read_opt(j, "schema_version", cfg.schema_version);
    if (j.contains("system")) {
      const Json& s = j.at("system");
      if (s.contains("topology")) cfg.system.topology = parse_topology(s.at("topology").get<std::string>());
      read_opt(s, "shock_rate", cfg.system.shock_rate);
      if (s.contains("components")) {
        cfg.system.components.clear();
        for (const auto& c : s.at("components")) cfg.system.components.push_back(component_from_json(c));
        if (!j.contains("costs") || !j.at("costs").contains("replacement")) {
          cfg.costs.replacement_costs.assign(cfg.system.size(), 200.0);
        }
      }
    }
    if (j.contains("costs")) {
      const Json& c = j.at("costs");
      read_opt(c, "inspection", cfg.costs.inspection_cost);
      read_opt(c, "replacement", cfg.costs.replacement_costs);
      read_opt(c, "downtime_rate", cfg.costs.downtime_rate);
    }
    if (j.contains("quadrature")) {
      const Json& q = j.at("quadrature");
      read_opt(q, "node_count", cfg.quadrature.node_count);
      read_opt(q, "tail_epsilon", cfg.quadrature.tail_epsilon);
      read_opt(q, "domain_sigmas", cfg.quadrature.domain_sigmas);
    }
    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      read_opt(s, "tau_min", cfg.solver.tau_min);
      read_opt(s, "tau_max", cfg.solver.tau_max);
      read_opt(s, "tol", cfg.solver.tol);
      read_opt(s, "grid_points", cfg.solver.grid_points);
      read_opt(s, "integral_nodes", cfg.solver.integral_nodes);
    }
    if (j.contains("dataset")) {
      const Json& d = j.at("dataset");
      read_opt(d, "n_scenarios", cfg.dataset.n_scenarios);
      read_opt(d, "u_lower_fraction", cfg.dataset.sampler.lower_fraction);
      read_opt(d, "u_upper_fraction", cfg.dataset.sampler.upper_fraction);
      read_opt(d, "train_fraction", cfg.dataset.train_fraction);
    }
    if (j.contains("surrogate")) {
      const Json& s = j.at("surrogate");
      read_opt(s, "hidden_layers", cfg.surrogate.hidden_layers);
      if (s.contains("features")) cfg.surrogate.features.mode = parse_feature_mode(s.at("features").get<std::string>());
      read_opt(s, "learning_rate", cfg.surrogate.training.learning_rate);
      read_opt(s, "epochs", cfg.surrogate.training.epochs);
      if (s.contains("mode")) cfg.surrogate.training.mode = parse_train_mode(s.at("mode").get<std::string>());
    }
    if (j.contains("simulation")) {
      const Json& s = j.at("simulation");
      read_opt(s, "horizon", cfg.simulation.horizon);
      read_opt(s, "replications", cfg.simulation.replications);
      read_opt(s, "subgrid_steps", cfg.simulation.subgrid_steps);
    }
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "output_dir", cfg.output_dir);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  Json comps = Json::array();
  for (const auto& c : cfg.system.components) comps.push_back(component_to_json(c));
  Json j;
  j["schema_version"] = cfg.schema_version;
  j["system"] = {{"topology", to_string(cfg.system.topology)}, {"shock_rate", cfg.system.shock_rate}, {"components", comps}};
  j["costs"] = {{"inspection", cfg.costs.inspection_cost},
                {"replacement", cfg.costs.replacement_costs},
                {"downtime_rate", cfg.costs.downtime_rate}};
  j["quadrature"] = {{"node_count", cfg.quadrature.node_count},
                     {"tail_epsilon", cfg.quadrature.tail_epsilon},
                     {"domain_sigmas", cfg.quadrature.domain_sigmas}};
  j["solver"] = {{"tau_min", cfg.solver.tau_min},
                 {"tau_max", cfg.solver.tau_max},
                 {"tol", cfg.solver.tol},
                 {"grid_points", cfg.solver.grid_points},
                 {"integral_nodes", cfg.solver.integral_nodes}};
  j["dataset"] = {{"n_scenarios", cfg.dataset.n_scenarios},
                  {"u_lower_fraction", cfg.dataset.sampler.lower_fraction},
                  {"u_upper_fraction", cfg.dataset.sampler.upper_fraction},
                  {"train_fraction", cfg.dataset.train_fraction}};
  j["surrogate"] = {{"hidden_layers", cfg.surrogate.hidden_layers},
                    {"features", to_string(cfg.surrogate.features.mode)},
                    {"learning_rate", cfg.surrogate.training.learning_rate},
                    {"epochs", cfg.surrogate.training.epochs},
                    {"mode", to_string(cfg.surrogate.training.mode)}};
  j["simulation"] = {{"horizon", cfg.simulation.horizon},
                     {"replications", cfg.simulation.replications},
                     {"subgrid_steps", cfg.simulation.subgrid_steps}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j.dump(indent);
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_file(path)); }

}  // namespace cbm

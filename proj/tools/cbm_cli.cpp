// cbm: reliability curves, inspection-interval optimization, surrogate
// training and plan simulation from one JSON config.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbm/config.hpp"
#include "cbm/error.hpp"
#include "cbm/experiment.hpp"
#include "cbm/io.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> quadrature_nodes;
};

cbm::ExperimentConfig resolve_config(const GlobalOptions& g) {
  cbm::ExperimentConfig cfg = g.config_path.empty() ? cbm::default_config() : cbm::load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.quadrature_nodes) cfg.quadrature.node_count = *g.quadrature_nodes;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : cbm::split_csv_line(text)) out.push_back(cbm::parse_double(item, what));
  return out;
}

// Explicit --u wins; otherwise every component starts at `fraction` of its threshold.
cbm::DegradationState resolve_state(const cbm::ExperimentConfig& cfg, const std::string& u_text, double fraction) {
  cbm::DegradationState u;
  if (!u_text.empty()) {
    u.u = parse_list(u_text, "u");
  } else {
    for (const auto& c : cfg.system.components) u.u.push_back(fraction * c.soft_threshold);
  }
  u.validate_for(cfg.system);
  return u;
}

cbm::Dataset load_dataset(const fs::path& path) {
  const std::string text = cbm::read_file(path);
  return path.extension() == ".csv" ? cbm::dataset_from_csv(text) : cbm::dataset_from_json(text);
}

void save(const fs::path& dir, const std::string& name, const std::string& contents) {
  cbm::write_file_atomic(dir / name, contents);
  std::cerr << "wrote " << (dir / name).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inspection planning for multi-component systems with competing failure processes"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override the experiment seed");
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--quadrature-nodes", g.quadrature_nodes, "Gauss-Legendre nodes for the shock-damage integral")
      ->check(CLI::PositiveNumber);

  // reliability
  auto* rel = app.add_subcommand("reliability", "Reliability curves R_i(t) and R_sys(t)");
  std::string rel_topology, rel_times, rel_u;
  double rel_t_max = 20.0, rel_fraction = 0.0;
  std::size_t rel_steps = 41;
  rel->add_option("--topology", rel_topology, "series or parallel (default: config)");
  rel->add_option("--times", rel_times, "Comma-separated time grid");
  rel->add_option("--t-max", rel_t_max, "Uniform grid end when --times is absent");
  rel->add_option("--steps", rel_steps, "Uniform grid point count")->check(CLI::Range(2, 100000));
  rel->add_option("--u", rel_u, "Comma-separated degradation levels");
  rel->add_option("--u-fraction", rel_fraction, "Every u_i = fraction * H_i");

  // optimize
  auto* opt = app.add_subcommand("optimize", "Cost-optimal next inspection interval");
  std::string opt_u;
  double opt_fraction = 0.0;
  opt->add_option("--u", opt_u, "Comma-separated degradation levels");
  opt->add_option("--u-fraction", opt_fraction, "Every u_i = fraction * H_i");

  auto* gen = app.add_subcommand("gen-data", "Solve sampled scenarios into a dataset");

  auto* spl = app.add_subcommand("split", "Assign train/test labels to a dataset");
  std::string split_in;
  spl->add_option("--dataset", split_in, "Dataset file (.json or .csv)")->required()->check(CLI::ExistingFile);

  auto* trn = app.add_subcommand("train", "Train the surrogate on a split dataset");
  std::string train_in;
  trn->add_option("--dataset", train_in, "Dataset file (.json or .csv)")->required()->check(CLI::ExistingFile);

  auto* evl = app.add_subcommand("evaluate", "Score a trained surrogate against a dataset");
  std::string eval_data, eval_model, eval_timings;
  evl->add_option("--dataset", eval_data, "Dataset file (.json or .csv)")->required()->check(CLI::ExistingFile);
  evl->add_option("--model", eval_model, "Model JSON")->required()->check(CLI::ExistingFile);
  evl->add_option("--timings", eval_timings, "timings.csv from gen-data")->check(CLI::ExistingFile);

  auto* pipe = app.add_subcommand("pipeline", "gen-data, split, train and evaluate in one run");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo simulation of an inspection plan");
  std::string sim_policy = "solver", sim_model;
  double sim_period = 0.0;
  std::optional<double> sim_horizon;
  std::optional<std::size_t> sim_reps;
  std::optional<std::uint64_t> sim_seed;
  bool sim_trace_csv = false;
  sim->add_option("--policy", sim_policy, "solver, surrogate or fixed")
      ->check(CLI::IsMember({"solver", "surrogate", "fixed"}));
  sim->add_option("--model", sim_model, "Model JSON for the surrogate policy");
  sim->add_option("--period", sim_period, "Interval for the fixed policy");
  sim->add_option("--horizon", sim_horizon, "Simulated time span (default: config)");
  sim->add_option("--replications", sim_reps, "Replication count (default: config)");
  sim->add_option("--sim-seed", sim_seed, "Replication seed (default: derived from --seed)");
  sim->add_flag("--trace-csv", sim_trace_csv, "Also write the flat per-inspection CSV");

  auto* show = app.add_subcommand("show-config", "Print the resolved config");

  CLI11_PARSE(app, argc, argv);

  try {
    const cbm::ExperimentConfig cfg = resolve_config(g);
    const fs::path out = cfg.output_dir;

    if (*rel) {
      const cbm::Topology topo = rel_topology.empty() ? cfg.system.topology : cbm::parse_topology(rel_topology);
      std::vector<double> times;
      if (!rel_times.empty()) {
        times = parse_list(rel_times, "times");
      } else {
        for (std::size_t k = 0; k < rel_steps; ++k) {
          times.push_back(rel_t_max * static_cast<double>(k) / static_cast<double>(rel_steps - 1));
        }
      }
      save(out, "reliability.csv",
           cbm::reliability_curve_csv(cfg, topo, times, resolve_state(cfg, rel_u, rel_fraction)));
    } else if (*opt) {
      const cbm::OptimizeReport r = cbm::run_optimize(cfg, resolve_state(cfg, opt_u, opt_fraction));
      const std::string json = cbm::optimize_report_json(r);
      std::cout << json << '\n';
      save(out, "optimize.json", json);
    } else if (*gen) {
      const cbm::Dataset d = cbm::run_generate(cfg);
      save(out, "dataset.csv", cbm::dataset_to_csv(d));
      save(out, "dataset.json", cbm::dataset_to_json(d));
      save(out, "timings.csv", cbm::timings_csv(d));
    } else if (*spl) {
      const cbm::Dataset d = cbm::run_split(cfg, load_dataset(split_in));
      save(out, "dataset.csv", cbm::dataset_to_csv(d));
      save(out, "dataset.json", cbm::dataset_to_json(d));
    } else if (*trn) {
      const cbm::TrainResult r = cbm::run_train(cfg, load_dataset(train_in));
      save(out, "model.json", cbm::model_to_json(r.model));
      save(out, "loss_history.csv", cbm::loss_history_to_csv(r.loss_history));
      std::printf("train MSE %.6g, test MSE %.6g\n", r.model.training.final_train_mse,
                  r.model.training.final_test_mse);
    } else if (*evl) {
      const cbm::Dataset d = load_dataset(eval_data);
      const cbm::MlpModel m = cbm::model_from_json(cbm::read_file(eval_model));
      std::vector<double> solve_ms;
      if (!eval_timings.empty()) {
        std::istringstream in(cbm::read_file(eval_timings));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          const auto cells = cbm::split_csv_line(line);
          if (cells.size() != 2) throw cbm::ConfigError("timings.csv: expected scenario_id,solve_ms");
          solve_ms.push_back(cbm::parse_double(cells[1], "solve_ms"));
        }
      }
      const cbm::EvaluationReport r = cbm::evaluate_model(m, d, cfg.system, solve_ms);
      const std::string metrics = cbm::metrics_json(r, m);
      std::cout << metrics << '\n';
      save(out, "metrics.json", metrics);
      save(out, "figure4.csv", cbm::figure4_csv(r));
    } else if (*pipe) {
      const cbm::PipelineResult r = cbm::run_pipeline(cfg, out);
      std::cout << cbm::metrics_json(r.report, r.trained.model) << '\n';
    } else if (*sim) {
      cbm::PolicySpec spec;
      if (sim_policy == "surrogate") {
        if (sim_model.empty()) throw cbm::PolicyError("--policy surrogate needs --model");
        spec.kind = cbm::PolicyKind::Surrogate;
        spec.model_path = sim_model;
      } else if (sim_policy == "fixed") {
        spec.kind = cbm::PolicyKind::FixedPeriod;
        spec.period = sim_period;
      }
      const cbm::SimulationSummary s =
          cbm::run_simulation(cfg, cbm::make_policy(cfg, spec), sim_horizon.value_or(cfg.simulation.horizon),
                              sim_reps.value_or(cfg.simulation.replications),
                              sim_seed.value_or(cfg.stage_seed("simulate")));
      const std::string summary = cbm::simulation_summary_csv(s);
      std::cout << summary;
      save(out, "simulation_summary.csv", summary);
      save(out, "simulation_traces.json", cbm::simulation_traces_json(s));
      if (sim_trace_csv) save(out, "simulation_traces.csv", cbm::simulation_traces_csv(s));
    } else if (*show) {
      std::cout << cbm::config_to_json(cfg) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

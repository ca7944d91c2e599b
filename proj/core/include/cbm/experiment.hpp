#pragma once

// The command layer: each function implements one CLI verb on top of the
// library and returns (or writes) the documented artifacts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cbm/config.hpp"
#include "cbm/montecarlo.hpp"
#include "cbm/surrogate.hpp"

namespace cbm {

/// CSV header t,R_1..R_n,R_system. `topology` overrides the config's.
std::string reliability_curve_csv(const ExperimentConfig& cfg, Topology topology, const std::vector<double>& times,
                                  const DegradationState& u);

struct OptimizeReport {
  DegradationState u;
  Optimum optimum;
  double solve_ms = 0.0;
};

OptimizeReport run_optimize(const ExperimentConfig& cfg, const DegradationState& u);
std::string optimize_report_json(const OptimizeReport& r);

Dataset run_generate(const ExperimentConfig& cfg);
Dataset run_split(const ExperimentConfig& cfg, Dataset d);
TrainResult run_train(const ExperimentConfig& cfg, const Dataset& d);

struct PredictionRow {
  std::size_t scenario_id = 0;
  Split split = Split::Unassigned;
  double tau_star = 0.0;
  double tau_pred = 0.0;
};

struct EvaluationReport {
  std::vector<PredictionRow> rows;  // train rows then test rows, each by scenario id
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::optional<double> train_r2;
  std::optional<double> test_r2;
  double mean_abs_error_test = 0.0;
  std::optional<double> mean_solve_ms;
  double mean_inference_ms = 0.0;
  std::size_t boundary_solutions = 0;
};

/// `solve_ms` holds per-row solver wall times when known.
EvaluationReport evaluate_model(const MlpModel& m, const Dataset& d, const SystemModel& s,
                                const std::vector<double>& solve_ms = {});
std::string metrics_json(const EvaluationReport& r, const MlpModel& m);
std::string figure4_csv(const EvaluationReport& r);
std::string timings_csv(const Dataset& d);

struct PipelineResult {
  Dataset dataset;
  TrainResult trained;
  EvaluationReport report;
};

/// gen-data -> split -> train -> evaluate. Writes dataset.csv, dataset.json,
/// model.json, loss_history.csv, timings.csv, metrics.json and figure4.csv
/// into out_dir.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

enum class PolicyKind { Solver, Surrogate, FixedPeriod };

struct PolicySpec {
  PolicyKind kind = PolicyKind::Solver;
  std::filesystem::path model_path;  // Surrogate
  double period = 0.0;               // FixedPeriod
};

/// Builds the next-interval function. Surrogate models are loaded from disk
/// and checked against the configured system.
InspectionPolicy make_policy(const ExperimentConfig& cfg, const PolicySpec& spec);
InspectionPolicy make_policy(const ExperimentConfig& cfg, const MlpModel& model);

struct SimulationSummary {
  std::vector<PlanTrace> traces;
  double mean_total_cost = 0.0, sd_total_cost = 0.0;
  double mean_cost_rate = 0.0, sd_cost_rate = 0.0;
  double mean_availability = 0.0, sd_availability = 0.0;
  double mean_inspections = 0.0;
};

/// Replication r uses RngSeed{seed, r}; summaries are order-independent sums.
SimulationSummary run_simulation(const ExperimentConfig& cfg, const InspectionPolicy& policy, double horizon,
                                 std::size_t replications, std::uint64_t seed);
std::string simulation_summary_csv(const SimulationSummary& s);
std::string simulation_traces_json(const SimulationSummary& s);
std::string simulation_traces_csv(const SimulationSummary& s);

}  // namespace cbm

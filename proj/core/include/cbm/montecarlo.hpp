#pragma once

// Direct simulation of the competing-failure model: one Poisson shock stream
// per system, per-component normal shock magnitudes and damages, gamma
// degradation increments. Used to cross-check the analytic engine and to
// replay the dynamic inspection loop with cost accounting.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cbm/model.hpp"
#include "cbm/optimizer.hpp"
#include "cbm/rng.hpp"

namespace cbm {

struct StateSample {
  std::vector<double> levels;      // u + pure degradation + clipped shock damages, mm
  std::vector<bool> hard_failed;   // some shock magnitude reached D_i
  unsigned shocks = 0;
};

StateSample sample_state_at(const SystemModel& s, double t, const DegradationState& u, std::mt19937_64& gen);
StateSample sample_state_at(const SystemModel& s, double t, const DegradationState& u, const RngSeed& seed);

bool component_survives(const ComponentParams& c, double level, bool hard_failed);
bool system_survives(const SystemModel& s, const StateSample& x);

struct ReliabilityEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::size_t n_samples = 0;
};

/// Fraction of n_samples independent replications in which the system
/// survives to t; std_err = sqrt(p(1-p)/n).
ReliabilityEstimate estimate_reliability(const SystemModel& s, double t, const DegradationState& u,
                                         std::size_t n_samples, const RngSeed& seed);

struct InspectionRecord {
  double time = 0.0;                 // inspection instant
  double interval = 0.0;             // tau chosen at the previous inspection
  std::vector<double> u_start;       // state the policy saw
  std::vector<double> observed;      // levels found at this inspection
  std::vector<double> failure_time;  // offset inside the interval, NaN if the component survived
  std::vector<std::size_t> replaced; // 0-based component indices
  double downtime = 0.0;             // system down time inside the interval
};

struct PlanTrace {
  std::vector<InspectionRecord> inspections;
  std::vector<std::size_t> replacements_per_component;
  double inspection_cost = 0.0;
  double replacement_cost = 0.0;
  double downtime_cost = 0.0;
  double total_downtime = 0.0;
  double horizon = 0.0;  // time of the last inspection

  double total_cost() const { return inspection_cost + replacement_cost + downtime_cost; }
  double cost_rate() const { return horizon > 0.0 ? total_cost() / horizon : 0.0; }
  double availability() const { return horizon > 0.0 ? 1.0 - total_downtime / horizon : 1.0; }
};

/// Maps the degradation state observed at an inspection to the next interval.
using InspectionPolicy = std::function<double(const DegradationState&)>;

struct SimulationOptions {
  std::size_t subgrid_steps = 32;  // gamma path resolution per interval
};

/// Dynamic inspection loop from a new system (u = 0) until the accumulated
/// inspection time reaches `horizon`. Failed components stay down until the
/// next inspection, where they are replaced as good as new; survivors carry
/// their degradation forward. Component failure times are resolved to the
/// subgrid (plus exact shock instants). Throws PolicyError if the policy
/// returns a non-positive or non-finite interval.
PlanTrace simulate_plan(const SystemModel& s, const CostParams& costs, const InspectionPolicy& policy,
                        double horizon, const RngSeed& seed, const SimulationOptions& opts = {});

/// One row per inspection: time, interval, u_start_i, observed_i, replaced_i, downtime.
std::string trace_to_csv(const PlanTrace& trace, std::size_t replication = 0, bool header = true);
std::string trace_to_json(const PlanTrace& trace, int indent = 2);

}  // namespace cbm

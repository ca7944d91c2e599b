#pragma once

// Cost-rate objective for the next inspection interval and its 1-D
// minimisation, plus generation of solved scenarios for surrogate training.
//
// Objective (renewal form, money per time unit):
//
//   CR(tau; u) = [ C_I + sum_i C_R,i (1 - R_i(tau; u_i))
//                  + C_D * integral_0^tau (1 - R_sys(t; u)) dt ] / tau
//
// R_i is the component's own reliability (a component is replaced only if it
// failed itself); R_sys follows the system topology. The integral uses a
// 32-point Gauss-Legendre rule on [0, tau].

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbm/model.hpp"
#include "cbm/reliability.hpp"

namespace cbm {

struct CostParams {
  double inspection_cost = 50.0;          // C_I, money per visit
  std::vector<double> replacement_costs;  // C_R,i, money per replacement
  double downtime_rate = 500.0;           // C_D, money per time unit of system downtime

  /// Defaults C_I = 50, C_R,i = 200, C_D = 500. C_D must exceed the cost rate
  /// of operating a degraded system or its optimum drifts to tau_max.
  static CostParams defaults(std::size_t n) { return {50.0, std::vector<double>(n, 200.0), 500.0}; }

  void validate_for(const SystemModel& s) const;
};

struct SearchOptions {
  double tau_min = 0.1;
  double tau_max = 50.0;
  double tol = 1e-4;             // final golden-section bracket width
  std::size_t grid_points = 200; // log-spaced coarse scan
  std::size_t integral_nodes = 32;

  void validate() const;
};

double cost_rate(const SystemModel& s, const CostParams& c, double tau, const DegradationState& u,
                 const QuadratureSpec& q = {}, std::size_t integral_nodes = 32);

struct Optimum {
  double tau_star = 0.0;
  double cost_rate_star = 0.0;
  bool at_boundary = false;  // coarse-scan minimum sat on tau_min or tau_max
  std::size_t evaluations = 0;
};

/// Log-spaced coarse scan to bracket the minimum, golden-section refinement
/// to width tol. Throws NumericError naming tau if the objective is
/// non-finite anywhere on the scan.
Optimum optimal_inspection_time(const SystemModel& s, const CostParams& c, const DegradationState& u,
                                const SearchOptions& opts = {}, const QuadratureSpec& q = {});

/// u_i ~ Uniform(lower_fraction * H_i, upper_fraction * H_i), independent.
struct USampler {
  double lower_fraction = 0.0;
  double upper_fraction = 0.8;

  void validate() const;
};

enum class Split { Unassigned, Train, Test };
std::string to_string(Split s);

struct Scenario {
  std::size_t id = 0;
  DegradationState u;
  double tau_star = 0.0;
  double cost_rate_star = 0.0;
  bool at_boundary = false;
  double solve_ms = 0.0;  // wall time; kept out of the serialized dataset
};

struct Dataset {
  std::uint64_t fingerprint = 0;
  std::size_t n_components = 0;
  std::vector<Scenario> rows;
  std::vector<Split> split;  // empty until split_dataset, then one entry per row

  std::vector<std::size_t> indices(Split which) const;
};

/// 64-bit FNV-1a over a canonical text rendering of the model (and costs).
std::uint64_t fingerprint(const SystemModel& s);
std::uint64_t fingerprint(const SystemModel& s, const CostParams& c);
std::string fingerprint_hex(std::uint64_t fp);
std::uint64_t parse_fingerprint_hex(const std::string& hex);

/// Scenario i draws its u from stream i of `seed`, so rows do not depend on
/// evaluation order.
Dataset generate_dataset(const SystemModel& s, const CostParams& c, std::size_t n_scenarios,
                         const USampler& sampler, const SearchOptions& opts, std::uint64_t seed,
                         const QuadratureSpec& q = {});

/// Uniformly random partition with round(n * train_fraction) training rows.
Dataset split_dataset(Dataset d, double train_fraction, std::uint64_t seed);

}  // namespace cbm

namespace cbm {

/// CSV: a "# fingerprint=<hex> n_components=<n>" comment line, then the header
/// scenario_id,u_1..u_n,tau_star,cost_rate_star,split. Numbers use 9
/// significant digits. Wall-clock solve times are not part of the file.
std::string dataset_to_csv(const Dataset& d);
Dataset dataset_from_csv(const std::string& text);

/// JSON keeps full double precision.
std::string dataset_to_json(const Dataset& d, int indent = 2);
Dataset dataset_from_json(const std::string& text);

}  // namespace cbm

#pragma once

// Domain types and elementary probability functions for components that
// degrade by a gamma process and are hit by a system-wide Poisson shock
// stream.
//
// Units: degradation in mm, time in abstract "time units" (the reference
// parameter set carries none). The gamma process is parameterised with a
// shape that grows linearly in time (alpha * t) and a RATE beta, i.e. the
// increment density is beta^a x^(a-1) exp(-beta x) / Gamma(a). The mean
// degradation after time t is therefore alpha * t / beta.

#include <cstddef>
#include <string>
#include <vector>

namespace cbm {

struct ComponentParams {
  double soft_threshold = 1.0;   // H, mm
  double hard_threshold = 1.0;   // D, shock-magnitude units
  double gamma_shape_rate = 1.0; // alpha, shape per time unit
  double gamma_rate = 1.0;       // beta, per mm (rate, not scale)
  double shock_magnitude_mean = 0.0;  // mu_W
  double shock_magnitude_sd = 0.0;    // sigma_W
  double shock_damage_mean = 0.0;     // mu_Y, mm
  double shock_damage_sd = 0.0;       // sigma_Y, mm

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

enum class Topology { Series, Parallel };

std::string to_string(Topology t);
/// Accepts "series" / "parallel" (case-insensitive).
Topology parse_topology(const std::string& s);

struct SystemModel {
  std::vector<ComponentParams> components;
  Topology topology = Topology::Series;
  double shock_rate = 0.0;  // lambda, shocks per time unit, shared by all components

  std::size_t size() const { return components.size(); }
  void validate() const;
};

/// Degradation level of every component at the start of an inspection
/// interval (mm). Called "initial age" in the maintenance literature, but it
/// enters the model as an additive degradation offset.
struct DegradationState {
  std::vector<double> u;

  DegradationState() = default;
  explicit DegradationState(std::vector<double> levels) : u(std::move(levels)) {}
  static DegradationState zeros(std::size_t n) { return DegradationState(std::vector<double>(n, 0.0)); }

  std::size_t size() const { return u.size(); }
  double operator[](std::size_t i) const { return u[i]; }
  double& operator[](std::size_t i) { return u[i]; }

  /// Length must match the system and every level must be finite and >= 0.
  void validate_for(const SystemModel& s) const;
};

/// Mean and variance of the sum of m i.i.d. normal shock damages.
struct DamageSum {
  double mean = 0.0;
  double variance = 0.0;
  bool point_mass = true;  // true when the distribution is degenerate (m == 0 or sigma_Y == 0)
};

/// Standard normal CDF, accurate to ~1 ulp through erfc.
double std_normal_cdf(double x);

double normal_pdf(double x, double mean, double sd);

/// P(W < D) for a single shock. sigma_W == 0 is a point mass at mu_W.
double prob_no_hard_failure(const ComponentParams& c);

/// P(N(t) = m) for a Poisson process of rate lambda, evaluated in log space.
double poisson_pmf(unsigned m, double lambda, double t);

/// Regularised lower incomplete gamma P(shape, rate * x): the CDF at x of a
/// gamma variable with the given shape and rate. Returns 0 for x <= 0.
/// Throws DomainError for shape <= 0 or rate <= 0.
double gamma_cdf(double x, double shape, double rate);

/// Regularised lower incomplete gamma P(a, z) with a caller-supplied
/// log Gamma(a), so that repeated calls with one shape skip lgamma.
double regularized_gamma_p(double a, double z, double log_gamma_a);

DamageSum damage_sum_distribution(const ComponentParams& c, unsigned m);

/// The reference three-component parameter set used by the bundled default
/// configuration (series topology, lambda = 2.5e-3).
SystemModel reference_system();

}  // namespace cbm

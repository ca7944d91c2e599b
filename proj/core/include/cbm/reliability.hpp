#pragma once

// Analytic reliability of components and series/parallel systems under
// competing gamma degradation (soft failure) and Poisson shocks (hard
// failure plus abrupt damage), starting from observed degradation levels.
//
// Every shock of the system-wide stream hits every component, so system
// formulas keep the product over components inside the sum over the
// shock count m.

#include <cstddef>
#include <vector>

#include "cbm/model.hpp"

namespace cbm {

/// Numerical policy for the infinite shock-count sum and the damage
/// convolution integral.
struct QuadratureSpec {
  std::size_t node_count = 64;  // Gauss-Legendre nodes for the damage integral
  double tail_epsilon = 1e-10;  // Poisson tail mass allowed to be dropped
  double domain_sigmas = 8.0;   // half-width of the damage window, in sd of the m-fold sum

  void validate() const;
};

/// Smallest M with P(N(t) > M) < tail_epsilon for N ~ Poisson(lambda t).
unsigned truncation_level(double lambda, double t, double tail_epsilon);

/// P(X(t) + S_m + u < H) where S_m is the sum of m shock damages, with the
/// damage integral restricted to [0, H - u]. Returns 0 once u >= H.
double soft_survival_given_m(const ComponentParams& c, double t, double u, unsigned m,
                             const QuadratureSpec& q = {});

/// P(no soft and no hard failure of the component by t | level u at time 0).
double component_reliability(const ComponentParams& c, double lambda, double t, double u,
                             const QuadratureSpec& q = {});

/// Series-system reliability. The topology field of s is not consulted.
double series_reliability(const SystemModel& s, double t, const DegradationState& u,
                          const QuadratureSpec& q = {});

/// Parallel-system reliability. The topology field of s is not consulted.
double parallel_reliability(const SystemModel& s, double t, const DegradationState& u,
                            const QuadratureSpec& q = {});

/// Dispatches on s.topology.
double system_reliability(const SystemModel& s, double t, const DegradationState& u,
                          const QuadratureSpec& q = {});

/// Component and system reliabilities at one instant, sharing one pass over
/// the shock counts. `system` follows s.topology.
struct ReliabilitySnapshot {
  std::vector<double> component;
  double series = 1.0;
  double parallel = 1.0;
  double system = 1.0;
};

ReliabilitySnapshot evaluate_reliability(const SystemModel& s, double t, const DegradationState& u,
                                         const QuadratureSpec& q = {});

}  // namespace cbm

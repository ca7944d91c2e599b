#include "cbm/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cbm/error.hpp"
#include "cbm/quadrature.hpp"

namespace cbm {

namespace {

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
}

void check_level(double u) {
  if (!(u >= 0.0) || !std::isfinite(u)) throw DomainError("degradation level must be finite and >= 0");
}

// Arguments below this use the shared power series even when the continued
// fraction would be chosen for a single evaluation: all terms are positive,
// so the series stays accurate, and ~z + 10 sqrt(z) terms suffice.
constexpr double kSharedSeriesCeiling = 50.0;

// Gauss-Legendre estimate of
//   integral_lo^hi P(shape, rate * (room - y)) * N(y; mean, sd) dy.
// Nodes whose gamma argument is below the series ceiling share one
// coefficient table and are summed by Horner's rule side by side; the gamma
// prefactor and the normal density are folded into a single exp per node.
double damage_convolution(double shape, double rate, double log_gamma_shape, double room, double mean,
                          double sd, double lo, double hi, std::size_t node_count) {
  const GaussLegendreRule& rule = gauss_legendre(node_count);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  const double log_norm = std::log(sd * std::sqrt(2.0 * std::numbers::pi));

  thread_local std::vector<double> zs, log_factor, weight, horner;
  zs.clear();
  log_factor.clear();
  weight.clear();

  double acc = 0.0;
  double z_max = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double y = mid + half * rule.nodes[k];
    const double x = room - y;
    if (x <= 0.0) continue;
    const double zeta = (y - mean) / sd;
    const double log_pdf = -0.5 * zeta * zeta - log_norm;
    if (shape == 0.0) {
      acc += rule.weights[k] * std::exp(log_pdf);
      continue;
    }
    const double z = rate * x;
    if (z < std::max(shape + 1.0, kSharedSeriesCeiling)) {
      zs.push_back(z);
      log_factor.push_back(shape * std::log(z) - z - log_gamma_shape + log_pdf);
      weight.push_back(rule.weights[k]);
      z_max = std::max(z_max, z);
    } else {
      acc += rule.weights[k] * regularized_gamma_p(shape, z, log_gamma_shape) * std::exp(log_pdf);
    }
  }

  if (!zs.empty()) {
    // Series coefficients c_n = 1 / (a (a+1) ... (a+n)), truncated where the
    // term at the largest argument is negligible next to c_0.
    thread_local std::vector<double> coeff;
    coeff.clear();
    double c = 1.0 / shape;
    const double c0 = c;
    double term = c;
    coeff.push_back(c);
    for (int n = 1; n < 100000; ++n) {
      c /= shape + n;
      term *= z_max / (shape + n);
      coeff.push_back(c);
      if (term < c0 * 1e-17) break;
    }
    horner.assign(zs.size(), coeff.back());
    for (std::size_t n = coeff.size() - 1; n-- > 0;) {
      const double cn = coeff[n];
      for (std::size_t j = 0; j < zs.size(); ++j) horner[j] = horner[j] * zs[j] + cn;
    }
    for (std::size_t j = 0; j < zs.size(); ++j) {
      acc += weight[j] * horner[j] * std::exp(log_factor[j]);
    }
  }
  return std::clamp(acc * half, 0.0, 1.0);
}

double soft_survival_impl(const ComponentParams& c, double t, double u, unsigned m,
                          const QuadratureSpec& q, double log_gamma_shape) {
  const double room = c.soft_threshold - u;
  if (room <= 0.0) return 0.0;
  const double shape = c.gamma_shape_rate * t;
  const double rate = c.gamma_rate;
  auto pure = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (shape == 0.0) return 1.0;
    return regularized_gamma_p(shape, rate * x, log_gamma_shape);
  };

  if (m == 0) return pure(room);

  const DamageSum dmg = damage_sum_distribution(c, m);
  if (dmg.point_mass) {
    // Domain of the damage integral is [0, room]; mass outside contributes nothing.
    if (dmg.mean < 0.0 || dmg.mean > room) return 0.0;
    return pure(room - dmg.mean);
  }

  const double sd = std::sqrt(dmg.variance);
  const double lo = std::max(0.0, dmg.mean - q.domain_sigmas * sd);
  const double hi = std::min(room, dmg.mean + q.domain_sigmas * sd);
  if (hi <= lo) return 0.0;
  return damage_convolution(shape, rate, log_gamma_shape, room, dmg.mean, sd, lo, hi, q.node_count);
}

// Fills terms[i][m] = P_NH,i^m * soft_survival(i, m) for m = 0..M and
// weights[m] = poisson_pmf(m).
struct ShockTerms {
  std::vector<double> weights;
  std::vector<std::vector<double>> terms;
};

ShockTerms shock_terms(const SystemModel& s, double t, const DegradationState& u, const QuadratureSpec& q) {
  const unsigned M = truncation_level(s.shock_rate, t, q.tail_epsilon);
  ShockTerms out;
  out.weights.resize(M + 1);
  for (unsigned m = 0; m <= M; ++m) out.weights[m] = poisson_pmf(m, s.shock_rate, t);
  out.terms.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const ComponentParams& c = s.components[i];
    const double shape = c.gamma_shape_rate * t;
    const double lg = shape > 0.0 ? std::lgamma(shape) : 0.0;
    const double p_nh = prob_no_hard_failure(c);
    auto& row = out.terms[i];
    row.resize(M + 1);
    double p_nh_pow = 1.0;
    for (unsigned m = 0; m <= M; ++m) {
      row[m] = p_nh_pow == 0.0 ? 0.0 : p_nh_pow * soft_survival_impl(c, t, u[i], m, q, lg);
      p_nh_pow *= p_nh;
    }
  }
  return out;
}

void check_inputs(const SystemModel& s, double t, const DegradationState& u, const QuadratureSpec& q) {
  check_time(t);
  q.validate();
  u.validate_for(s);
}

}  // namespace

void QuadratureSpec::validate() const {
  if (node_count < 2) throw ConfigError("quadrature node_count must be >= 2");
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0)) throw ConfigError("tail_epsilon must lie in (0, 1)");
  if (!(domain_sigmas > 0.0) || !std::isfinite(domain_sigmas)) throw ConfigError("domain_sigmas must be > 0");
}

unsigned truncation_level(double lambda, double t, double tail_epsilon) {
  if (!(lambda >= 0.0) || !(t >= 0.0)) throw DomainError("truncation_level needs lambda >= 0 and t >= 0");
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0)) throw DomainError("tail_epsilon must lie in (0, 1)");
  const double mean = lambda * t;
  if (mean == 0.0) return 0;
  // P(N > M) = P(Gamma(M + 1, 1) < mean), which keeps full relative accuracy in the tail.
  for (unsigned M = 0;; ++M) {
    const double tail = regularized_gamma_p(M + 1.0, mean, std::lgamma(M + 1.0));
    if (tail < tail_epsilon) return M;
  }
}

double soft_survival_given_m(const ComponentParams& c, double t, double u, unsigned m, const QuadratureSpec& q) {
  check_time(t);
  check_level(u);
  q.validate();
  const double shape = c.gamma_shape_rate * t;
  return soft_survival_impl(c, t, u, m, q, shape > 0.0 ? std::lgamma(shape) : 0.0);
}

double component_reliability(const ComponentParams& c, double lambda, double t, double u, const QuadratureSpec& q) {
  SystemModel single;
  single.components = {c};
  single.shock_rate = lambda;
  check_level(u);
  return evaluate_reliability(single, t, DegradationState({u}), q).component.front();
}

double series_reliability(const SystemModel& s, double t, const DegradationState& u, const QuadratureSpec& q) {
  return evaluate_reliability(s, t, u, q).series;
}

double parallel_reliability(const SystemModel& s, double t, const DegradationState& u, const QuadratureSpec& q) {
  return evaluate_reliability(s, t, u, q).parallel;
}

double system_reliability(const SystemModel& s, double t, const DegradationState& u, const QuadratureSpec& q) {
  return evaluate_reliability(s, t, u, q).system;
}

ReliabilitySnapshot evaluate_reliability(const SystemModel& s, double t, const DegradationState& u,
                                         const QuadratureSpec& q) {
  check_inputs(s, t, u, q);
  const std::size_t n = s.size();
  ReliabilitySnapshot snap;
  snap.component.assign(n, 0.0);

  if (t == 0.0) {
    bool all = true;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const bool alive = u[i] < s.components[i].soft_threshold;
      snap.component[i] = alive ? 1.0 : 0.0;
      all = all && alive;
      any = any || alive;
    }
    snap.series = all ? 1.0 : 0.0;
    snap.parallel = any ? 1.0 : 0.0;
    snap.system = s.topology == Topology::Series ? snap.series : snap.parallel;
    return snap;
  }

  const ShockTerms st = shock_terms(s, t, u, q);
  // The dropped Poisson tail is credited to neither survival nor failure,
  // so parallel is accumulated as a survival sum rather than 1 - failure.
  double series = 0.0;
  double parallel = 0.0;
  for (std::size_t m = 0; m < st.weights.size(); ++m) {
    double prod_survive = 1.0;
    double prod_fail = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = st.terms[i][m];
      snap.component[i] += a * st.weights[m];
      prod_survive *= a;
      prod_fail *= 1.0 - a;
    }
    series += prod_survive * st.weights[m];
    parallel += (1.0 - prod_fail) * st.weights[m];
  }
  for (double& r : snap.component) r = std::clamp(r, 0.0, 1.0);
  snap.series = std::clamp(series, 0.0, 1.0);
  snap.parallel = std::clamp(parallel, 0.0, 1.0);
  snap.system = s.topology == Topology::Series ? snap.series : snap.parallel;
  return snap;
}

}  // namespace cbm

#include "cbm/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "cbm/error.hpp"

namespace cbm {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }
bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 100000;

// P(a, z) by its power series; converges quickly for z < a + 1.
double gamma_p_series(double a, double z, double log_gamma_a) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= z / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-z + a * std::log(z) - log_gamma_a);
}

// Q(a, z) by the Legendre continued fraction (modified Lentz); used for z >= a + 1.
double gamma_q_continued_fraction(double a, double z, double log_gamma_a) {
  // Q(a, z) <= z^(a-1) e^(-z) / Gamma(a) * max(1, z / (z - a + 1)) for z > a - 1;
  // skip the fraction once that bound is negligible.
  const double log_prefactor = -z + a * std::log(z) - log_gamma_a;
  const double log_bound = log_prefactor - std::log(z) + std::log(std::max(1.0, z / (z - a + 1.0)));
  if (log_bound < -40.0) return 0.0;
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = z + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kGammaEps) break;
  }
  return std::exp(log_prefactor) * h;
}

}  // namespace

void ComponentParams::validate() const {
  require(finite_positive(soft_threshold), "soft_threshold H must be > 0");
  require(finite_positive(hard_threshold), "hard_threshold D must be > 0");
  require(finite_positive(gamma_shape_rate), "gamma_shape_rate alpha must be > 0");
  require(finite_positive(gamma_rate), "gamma_rate beta must be > 0");
  require(std::isfinite(shock_magnitude_mean), "shock_magnitude_mean must be finite");
  require(finite_nonneg(shock_magnitude_sd), "shock_magnitude_sd must be >= 0");
  require(std::isfinite(shock_damage_mean), "shock_damage_mean must be finite");
  require(finite_nonneg(shock_damage_sd), "shock_damage_sd must be >= 0");
}

std::string to_string(Topology t) { return t == Topology::Series ? "series" : "parallel"; }

Topology parse_topology(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "series") return Topology::Series;
  if (lower == "parallel") return Topology::Parallel;
  throw ConfigError("unknown topology '" + s + "' (expected series|parallel)");
}

void SystemModel::validate() const {
  require(!components.empty(), "system needs at least one component");
  require(finite_nonneg(shock_rate), "shock_rate lambda must be >= 0");
  for (std::size_t i = 0; i < components.size(); ++i) {
    try {
      components[i].validate();
    } catch (const ConfigError& e) {
      throw ConfigError("component " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

void DegradationState::validate_for(const SystemModel& s) const {
  if (u.size() != s.size()) {
    throw DimensionError("degradation state has " + std::to_string(u.size()) +
                         " entries, system has " + std::to_string(s.size()));
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!finite_nonneg(u[i])) {
      throw DomainError("degradation level u_" + std::to_string(i + 1) + " must be finite and >= 0");
    }
  }
}

double std_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double prob_no_hard_failure(const ComponentParams& c) {
  if (c.shock_magnitude_sd == 0.0) return c.shock_magnitude_mean < c.hard_threshold ? 1.0 : 0.0;
  return std_normal_cdf((c.hard_threshold - c.shock_magnitude_mean) / c.shock_magnitude_sd);
}

double poisson_pmf(unsigned m, double lambda, double t) {
  const double mean = lambda * t;
  if (mean == 0.0) return m == 0 ? 1.0 : 0.0;
  const double log_p = m * std::log(mean) - mean - std::lgamma(m + 1.0);
  return std::exp(log_p);
}

double regularized_gamma_p(double a, double z, double log_gamma_a) {
  if (z <= 0.0) return 0.0;
  if (std::isinf(z)) return 1.0;
  if (z < a + 1.0) return std::clamp(gamma_p_series(a, z, log_gamma_a), 0.0, 1.0);
  return std::clamp(1.0 - gamma_q_continued_fraction(a, z, log_gamma_a), 0.0, 1.0);
}

double gamma_cdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw DomainError("gamma_cdf requires shape > 0 and rate > 0");
  }
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(shape, rate * x, std::lgamma(shape));
}

DamageSum damage_sum_distribution(const ComponentParams& c, unsigned m) {
  DamageSum d;
  d.mean = m * c.shock_damage_mean;
  d.variance = m * c.shock_damage_sd * c.shock_damage_sd;
  d.point_mass = (m == 0) || (c.shock_damage_sd == 0.0);
  return d;
}

SystemModel reference_system() {
  SystemModel s;
  s.topology = Topology::Series;
  s.shock_rate = 2.5e-3;
  s.components = {
      {20.0, 7.0, 3.0, 1.0, 1.5, 0.4, 2.0, 0.5},
      {30.0, 5.0, 2.0, 0.6, 2.0, 0.3, 2.5, 0.2},
      {35.0, 6.0, 1.0, 0.3, 1.2, 0.15, 3.0, 0.1},
  };
  return s;
}

}  // namespace cbm

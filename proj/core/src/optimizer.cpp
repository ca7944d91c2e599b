#include "cbm/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "cbm/error.hpp"
#include "cbm/quadrature.hpp"
#include "cbm/rng.hpp"

namespace cbm {

namespace {

std::string canonical(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string canonical(const SystemModel& s) {
  std::ostringstream os;
  os << to_string(s.topology) << ';' << canonical(s.shock_rate);
  for (const auto& c : s.components) {
    os << ';' << canonical(c.soft_threshold) << ',' << canonical(c.hard_threshold) << ','
       << canonical(c.gamma_shape_rate) << ',' << canonical(c.gamma_rate) << ','
       << canonical(c.shock_magnitude_mean) << ',' << canonical(c.shock_magnitude_sd) << ','
       << canonical(c.shock_damage_mean) << ',' << canonical(c.shock_damage_sd);
  }
  return os.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void CostParams::validate_for(const SystemModel& s) const {
  if (!(inspection_cost > 0.0) || !std::isfinite(inspection_cost)) throw ConfigError("inspection_cost must be > 0");
  if (!(downtime_rate >= 0.0) || !std::isfinite(downtime_rate)) throw ConfigError("downtime_rate must be >= 0");
  if (replacement_costs.size() != s.size()) {
    throw ConfigError("replacement_costs has " + std::to_string(replacement_costs.size()) +
                      " entries but the system has " + std::to_string(s.size()) + " components");
  }
  for (double r : replacement_costs) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("replacement costs must be > 0");
  }
}

void SearchOptions::validate() const {
  if (!(tau_min > 0.0) || !(tau_min < tau_max) || !std::isfinite(tau_max)) {
    throw ConfigError("search bounds need 0 < tau_min < tau_max");
  }
  if (!(tol > 0.0)) throw ConfigError("search tol must be > 0");
  if (grid_points < 3) throw ConfigError("search grid needs at least 3 points");
  if (integral_nodes < 1) throw ConfigError("integral_nodes must be >= 1");
}

void USampler::validate() const {
  if (!(lower_fraction >= 0.0) || !(lower_fraction <= upper_fraction)) {
    throw ConfigError("u sampler needs 0 <= lower_fraction <= upper_fraction");
  }
}

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    default: return "unassigned";
  }
}

std::vector<std::size_t> Dataset::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(i);
  }
  return out;
}

double cost_rate(const SystemModel& s, const CostParams& c, double tau, const DegradationState& u,
                 const QuadratureSpec& q, std::size_t integral_nodes) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("cost_rate needs tau > 0");
  const ReliabilitySnapshot end = evaluate_reliability(s, tau, u, q);
  double cost = c.inspection_cost;
  for (std::size_t i = 0; i < s.size(); ++i) cost += c.replacement_costs[i] * (1.0 - end.component[i]);
  if (c.downtime_rate > 0.0) {
    const double unavailable = integrate(
        [&](double t) { return 1.0 - evaluate_reliability(s, t, u, q).system; }, 0.0, tau, integral_nodes);
    cost += c.downtime_rate * unavailable;
  }
  return cost / tau;
}

Optimum optimal_inspection_time(const SystemModel& s, const CostParams& c, const DegradationState& u,
                                const SearchOptions& opts, const QuadratureSpec& q) {
  opts.validate();
  c.validate_for(s);
  Optimum best;
  auto f = [&](double tau) {
    ++best.evaluations;
    const double v = cost_rate(s, c, tau, u, q, opts.integral_nodes);
    if (!std::isfinite(v)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "cost rate is not finite at tau = %.9g", tau);
      throw NumericError(buf);
    }
    return v;
  };

  const std::size_t n = opts.grid_points;
  const double log_lo = std::log(opts.tau_min);
  const double log_hi = std::log(opts.tau_max);
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid[k] = k + 1 == n ? opts.tau_max : std::exp(log_lo + (log_hi - log_lo) * k / (n - 1));
  }
  grid.front() = opts.tau_min;

  std::size_t arg = 0;
  double best_value = f(grid[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double v = f(grid[k]);
    if (v < best_value) {
      best_value = v;
      arg = k;
    }
  }
  double best_tau = grid[arg];
  best.at_boundary = (arg == 0 || arg + 1 == n);

  // Golden-section refinement inside the neighbouring grid cells.
  constexpr double inv_phi = 0.6180339887498949;
  double a = grid[arg == 0 ? 0 : arg - 1];
  double b = grid[arg + 1 == n ? n - 1 : arg + 1];
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > opts.tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  if (f1 < best_value) best_value = f1, best_tau = x1;
  if (f2 < best_value) best_value = f2, best_tau = x2;

  best.tau_star = best_tau;
  best.cost_rate_star = best_value;
  return best;
}

std::uint64_t fingerprint(const SystemModel& s) { return fnv1a(canonical(s)); }

std::uint64_t fingerprint(const SystemModel& s, const CostParams& c) {
  std::string text = canonical(s) + "|" + canonical(c.inspection_cost);
  for (double r : c.replacement_costs) text += "," + canonical(r);
  text += "|" + canonical(c.downtime_rate);
  return fnv1a(text);
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

std::uint64_t parse_fingerprint_hex(const std::string& hex) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(hex, &used, 16);
    if (used != hex.size()) throw ConfigError("bad fingerprint '" + hex + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad fingerprint '" + hex + "'");
  }
}

Dataset generate_dataset(const SystemModel& s, const CostParams& c, std::size_t n_scenarios,
                         const USampler& sampler, const SearchOptions& opts, std::uint64_t seed,
                         const QuadratureSpec& q) {
  if (n_scenarios < 1) throw ConfigError("n_scenarios must be >= 1");
  s.validate();
  c.validate_for(s);
  sampler.validate();
  opts.validate();

  Dataset d;
  d.fingerprint = fingerprint(s, c);
  d.n_components = s.size();
  d.rows.resize(n_scenarios);
  for (std::size_t i = 0; i < n_scenarios; ++i) {
    auto gen = RngSeed{seed, i}.engine();
    Scenario& row = d.rows[i];
    row.id = i;
    row.u = DegradationState::zeros(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double H = s.components[j].soft_threshold;
      std::uniform_real_distribution<double> dist(sampler.lower_fraction * H, sampler.upper_fraction * H);
      row.u[j] = sampler.lower_fraction == sampler.upper_fraction ? sampler.lower_fraction * H : dist(gen);
    }
    const auto start = std::chrono::steady_clock::now();
    Optimum opt;
    try {
      opt = optimal_inspection_time(s, c, row.u, opts, q);
    } catch (const std::exception& e) {
      throw NumericError("scenario " + std::to_string(i) + ": " + e.what());
    }
    row.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    row.tau_star = opt.tau_star;
    row.cost_rate_star = opt.cost_rate_star;
    row.at_boundary = opt.at_boundary;
  }
  return d;
}

Dataset split_dataset(Dataset d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  const std::size_t n = d.rows.size();
  if (n < 2) throw ConfigError("splitting needs at least two scenarios");
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto gen = RngSeed{seed, 0x5b1e}.engine();
  // Fisher-Yates with our own index draw so the partition is stable across standard libraries.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % (i + 1));
    std::swap(order[i], order[j]);
  }
  d.split.assign(n, Split::Test);
  for (std::size_t k = 0; k < n_train; ++k) d.split[order[k]] = Split::Train;
  return d;
}

}  // namespace cbm

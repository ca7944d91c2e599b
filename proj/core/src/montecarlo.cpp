#include "cbm/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cbm/error.hpp"
#include "cbm/io.hpp"

namespace cbm {

namespace {

double draw_normal(std::mt19937_64& gen, double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(gen);
}

double draw_gamma(std::mt19937_64& gen, double shape, double rate) {
  if (shape <= 0.0) return 0.0;
  return std::gamma_distribution<double>(shape, 1.0 / rate)(gen);
}

unsigned draw_poisson(std::mt19937_64& gen, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<unsigned>(mean)(gen);
}

}  // namespace

StateSample sample_state_at(const SystemModel& s, double t, const DegradationState& u, std::mt19937_64& gen) {
  if (!(t >= 0.0)) throw DomainError("sample time must be >= 0");
  StateSample x;
  x.levels = u.u;
  x.hard_failed.assign(s.size(), false);
  if (t == 0.0) return x;
  x.shocks = draw_poisson(gen, s.shock_rate * t);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const ComponentParams& c = s.components[i];
    double level = x.levels[i] + draw_gamma(gen, c.gamma_shape_rate * t, c.gamma_rate);
    for (unsigned j = 0; j < x.shocks; ++j) {
      const double w = draw_normal(gen, c.shock_magnitude_mean, c.shock_magnitude_sd);
      const double y = draw_normal(gen, c.shock_damage_mean, c.shock_damage_sd);
      if (w >= c.hard_threshold) x.hard_failed[i] = true;
      level += std::max(0.0, y);
    }
    x.levels[i] = level;
  }
  return x;
}

StateSample sample_state_at(const SystemModel& s, double t, const DegradationState& u, const RngSeed& seed) {
  auto gen = seed.engine();
  return sample_state_at(s, t, u, gen);
}

bool component_survives(const ComponentParams& c, double level, bool hard_failed) {
  return !hard_failed && level < c.soft_threshold;
}

bool system_survives(const SystemModel& s, const StateSample& x) {
  bool all = true;
  bool any = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool ok = component_survives(s.components[i], x.levels[i], x.hard_failed[i]);
    all = all && ok;
    any = any || ok;
  }
  return s.topology == Topology::Series ? all : any;
}

ReliabilityEstimate estimate_reliability(const SystemModel& s, double t, const DegradationState& u,
                                         std::size_t n_samples, const RngSeed& seed) {
  if (n_samples < 1) throw DomainError("estimate_reliability needs n_samples >= 1");
  u.validate_for(s);
  auto gen = seed.engine();
  std::size_t survived = 0;
  for (std::size_t r = 0; r < n_samples; ++r) {
    if (system_survives(s, sample_state_at(s, t, u, gen))) ++survived;
  }
  ReliabilityEstimate est;
  est.n_samples = n_samples;
  est.p_hat = static_cast<double>(survived) / static_cast<double>(n_samples);
  est.std_err = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n_samples));
  return est;
}

PlanTrace simulate_plan(const SystemModel& s, const CostParams& costs, const InspectionPolicy& policy,
                        double horizon, const RngSeed& seed, const SimulationOptions& opts) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("simulation horizon must be > 0");
  if (opts.subgrid_steps < 1) throw ConfigError("subgrid_steps must be >= 1");
  s.validate();
  costs.validate_for(s);

  const std::size_t n = s.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto gen = seed.engine();

  PlanTrace trace;
  trace.replacements_per_component.assign(n, 0);
  DegradationState state = DegradationState::zeros(n);
  double now = 0.0;

  struct Event {
    double time;
    int shock;  // -1 for a subgrid point
  };
  std::vector<Event> events;
  std::vector<double> shock_times;

  while (now < horizon * (1.0 - 1e-12)) {
    const double tau = policy(state);
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw PolicyError("inspection policy returned tau = " + format_number(tau) + " at time " + format_number(now));
    }

    const unsigned n_shocks = draw_poisson(gen, s.shock_rate * tau);
    shock_times.clear();
    std::uniform_real_distribution<double> arrival(0.0, tau);
    for (unsigned j = 0; j < n_shocks; ++j) shock_times.push_back(arrival(gen));
    std::sort(shock_times.begin(), shock_times.end());

    events.clear();
    for (std::size_t k = 1; k <= opts.subgrid_steps; ++k) {
      events.push_back({tau * static_cast<double>(k) / static_cast<double>(opts.subgrid_steps), -1});
    }
    for (unsigned j = 0; j < n_shocks; ++j) events.push_back({shock_times[j], static_cast<int>(j)});
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });

    InspectionRecord rec;
    rec.interval = tau;
    rec.u_start = state.u;
    rec.observed.assign(n, 0.0);
    rec.failure_time.assign(n, std::numeric_limits<double>::quiet_NaN());

    std::vector<double> fail_at(n, inf);
    for (std::size_t i = 0; i < n; ++i) {
      const ComponentParams& c = s.components[i];
      double level = state[i];
      double prev = 0.0;
      for (const Event& ev : events) {
        const double dt = ev.time - prev;
        if (dt > 0.0) level += draw_gamma(gen, c.gamma_shape_rate * dt, c.gamma_rate);
        prev = ev.time;
        if (ev.shock >= 0) {
          const double w = draw_normal(gen, c.shock_magnitude_mean, c.shock_magnitude_sd);
          const double y = draw_normal(gen, c.shock_damage_mean, c.shock_damage_sd);
          level += std::max(0.0, y);
          if (w >= c.hard_threshold && fail_at[i] == inf) fail_at[i] = ev.time;
        }
        if (level >= c.soft_threshold && fail_at[i] == inf) fail_at[i] = ev.time;
      }
      rec.observed[i] = level;
      if (fail_at[i] < inf) rec.failure_time[i] = fail_at[i];
    }

    double system_fail = s.topology == Topology::Series ? inf : -inf;
    for (std::size_t i = 0; i < n; ++i) {
      system_fail = s.topology == Topology::Series ? std::min(system_fail, fail_at[i]) : std::max(system_fail, fail_at[i]);
    }
    rec.downtime = system_fail < inf ? std::max(0.0, tau - system_fail) : 0.0;

    now += tau;
    rec.time = now;
    trace.inspection_cost += costs.inspection_cost;
    trace.downtime_cost += costs.downtime_rate * rec.downtime;
    trace.total_downtime += rec.downtime;
    for (std::size_t i = 0; i < n; ++i) {
      if (fail_at[i] < inf) {
        rec.replaced.push_back(i);
        trace.replacement_cost += costs.replacement_costs[i];
        ++trace.replacements_per_component[i];
        state[i] = 0.0;
      } else {
        state[i] = rec.observed[i];
      }
    }
    trace.inspections.push_back(std::move(rec));
  }
  trace.horizon = now;
  return trace;
}

std::string trace_to_csv(const PlanTrace& trace, std::size_t replication, bool header) {
  std::ostringstream os;
  const std::size_t n = trace.replacements_per_component.size();
  if (header) {
    os << "replication,inspection,time,interval";
    for (std::size_t i = 0; i < n; ++i) os << ",u_start_" << i + 1;
    for (std::size_t i = 0; i < n; ++i) os << ",observed_" << i + 1;
    for (std::size_t i = 0; i < n; ++i) os << ",replaced_" << i + 1;
    os << ",downtime\n";
  }
  for (std::size_t k = 0; k < trace.inspections.size(); ++k) {
    const InspectionRecord& r = trace.inspections[k];
    os << replication << ',' << k + 1 << ',' << format_number(r.time) << ',' << format_number(r.interval);
    for (double v : r.u_start) os << ',' << format_number(v);
    for (double v : r.observed) os << ',' << format_number(v);
    for (std::size_t i = 0; i < n; ++i) {
      const bool rep = std::find(r.replaced.begin(), r.replaced.end(), i) != r.replaced.end();
      os << ',' << (rep ? 1 : 0);
    }
    os << ',' << format_number(r.downtime) << '\n';
  }
  return os.str();
}

std::string trace_to_json(const PlanTrace& trace, int indent) {
  nlohmann::json j;
  j["horizon"] = trace.horizon;
  j["costs"] = {{"inspection", trace.inspection_cost},
                {"replacement", trace.replacement_cost},
                {"downtime", trace.downtime_cost},
                {"total", trace.total_cost()}};
  j["total_downtime"] = trace.total_downtime;
  j["cost_rate"] = trace.cost_rate();
  j["availability"] = trace.availability();
  j["replacements_per_component"] = trace.replacements_per_component;
  nlohmann::json rows = nlohmann::json::array();
  for (const InspectionRecord& r : trace.inspections) {
    nlohmann::json fail = nlohmann::json::array();
    for (double f : r.failure_time) fail.push_back(std::isnan(f) ? nlohmann::json(nullptr) : nlohmann::json(f));
    std::vector<std::size_t> replaced_one_based;
    for (std::size_t i : r.replaced) replaced_one_based.push_back(i + 1);
    rows.push_back({{"time", r.time},
                    {"interval", r.interval},
                    {"u_start", r.u_start},
                    {"observed", r.observed},
                    {"failure_time", fail},
                    {"replaced", replaced_one_based},
                    {"downtime", r.downtime}});
  }
  j["inspections"] = rows;
  return j.dump(indent);
}

}  // namespace cbm

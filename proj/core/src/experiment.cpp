#include "cbm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "cbm/error.hpp"
#include "cbm/io.hpp"

namespace cbm {

namespace {

using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::string reliability_curve_csv(const ExperimentConfig& cfg, Topology topology, const std::vector<double>& times,
                                  const DegradationState& u) {
  cfg.validate();
  SystemModel s = cfg.system;
  s.topology = topology;
  u.validate_for(s);
  std::ostringstream os;
  os << 't';
  for (std::size_t i = 0; i < s.size(); ++i) os << ",R_" << i + 1;
  os << ",R_system\n";
  for (double t : times) {
    const ReliabilitySnapshot snap = evaluate_reliability(s, t, u, cfg.quadrature);
    os << format_number(t);
    for (double r : snap.component) os << ',' << format_number(r);
    os << ',' << format_number(snap.system) << '\n';
  }
  return os.str();
}

OptimizeReport run_optimize(const ExperimentConfig& cfg, const DegradationState& u) {
  cfg.validate();
  u.validate_for(cfg.system);
  OptimizeReport r;
  r.u = u;
  const auto start = Clock::now();
  r.optimum = optimal_inspection_time(cfg.system, cfg.costs, u, cfg.solver, cfg.quadrature);
  r.solve_ms = elapsed_ms(start);
  return r;
}

std::string optimize_report_json(const OptimizeReport& r) {
  Json j;
  j["u"] = r.u.u;
  j["tau_star"] = r.optimum.tau_star;
  j["cost_rate_star"] = r.optimum.cost_rate_star;
  j["at_boundary"] = r.optimum.at_boundary;
  j["evaluations"] = r.optimum.evaluations;
  j["solve_ms"] = r.solve_ms;
  return j.dump(2);
}

Dataset run_generate(const ExperimentConfig& cfg) {
  cfg.validate();
  return generate_dataset(cfg.system, cfg.costs, cfg.dataset.n_scenarios, cfg.dataset.sampler, cfg.solver,
                          cfg.stage_seed("dataset"), cfg.quadrature);
}

Dataset run_split(const ExperimentConfig& cfg, Dataset d) {
  return split_dataset(std::move(d), cfg.dataset.train_fraction, cfg.stage_seed("split"));
}

TrainResult run_train(const ExperimentConfig& cfg, const Dataset& d) {
  cfg.validate();
  if (d.fingerprint != fingerprint(cfg.system, cfg.costs)) {
    throw FingerprintMismatch("dataset " + fingerprint_hex(d.fingerprint) + " was not generated from this config (" +
                              fingerprint_hex(fingerprint(cfg.system, cfg.costs)) + ")");
  }
  std::vector<std::size_t> sizes{cfg.surrogate.features.feature_count(cfg.system.size())};
  sizes.insert(sizes.end(), cfg.surrogate.hidden_layers.begin(), cfg.surrogate.hidden_layers.end());
  sizes.push_back(1);
  MlpModel m = MlpModel::create(sizes, cfg.stage_seed("init"));
  m.tau_min = cfg.solver.tau_min;
  m.tau_max = cfg.solver.tau_max;
  TrainOptions opts = cfg.surrogate.training;
  opts.seed = cfg.stage_seed("train");
  return train(std::move(m), d, cfg.system, cfg.surrogate.features, opts);
}

EvaluationReport evaluate_model(const MlpModel& m, const Dataset& d, const SystemModel& s,
                                const std::vector<double>& solve_ms) {
  EvaluationReport r;
  std::vector<std::size_t> train_rows = d.indices(Split::Train);
  std::vector<std::size_t> test_rows = d.indices(Split::Test);
  if (d.split.empty()) {
    for (std::size_t i = 0; i < d.rows.size(); ++i) test_rows.push_back(i);
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return d.rows[a].id < d.rows[b].id; };
  std::sort(train_rows.begin(), train_rows.end(), by_id);
  std::sort(test_rows.begin(), test_rows.end(), by_id);

  auto collect = [&](const std::vector<std::size_t>& idx, Split label, std::vector<double>& preds,
                     std::vector<double>& targets) {
    for (std::size_t i : idx) {
      const Scenario& row = d.rows[i];
      const double pred = predict_next_inspection(m, s, row.u);
      preds.push_back(pred);
      targets.push_back(row.tau_star);
      r.rows.push_back({row.id, label, row.tau_star, pred});
    }
  };
  std::vector<double> p_train, y_train, p_test, y_test;
  collect(train_rows, Split::Train, p_train, y_train);
  collect(test_rows, Split::Test, p_test, y_test);
  r.n_train = p_train.size();
  r.n_test = p_test.size();

  auto safe_r2 = [](const std::vector<double>& p, const std::vector<double>& y) -> std::optional<double> {
    try {
      return r_squared(p, y);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  if (!p_train.empty()) {
    r.train_mse = mse(p_train, y_train);
    r.train_r2 = safe_r2(p_train, y_train);
  }
  if (!p_test.empty()) {
    r.test_mse = mse(p_test, y_test);
    r.test_r2 = safe_r2(p_test, y_test);
    double mae = 0.0;
    for (std::size_t i = 0; i < p_test.size(); ++i) mae += std::abs(p_test[i] - y_test[i]);
    r.mean_abs_error_test = mae / static_cast<double>(p_test.size());
  }
  for (const Scenario& row : d.rows) r.boundary_solutions += row.at_boundary ? 1 : 0;

  if (!solve_ms.empty()) {
    double total = 0.0;
    for (double v : solve_ms) total += v;
    r.mean_solve_ms = total / static_cast<double>(solve_ms.size());
  }

  // Inference timing: repeat the prediction sweep until the clock has something to measure.
  const std::vector<std::size_t>& timed = test_rows.empty() ? train_rows : test_rows;
  if (!timed.empty()) {
    std::size_t calls = 0;
    volatile double sink = 0.0;
    const auto start = Clock::now();
    do {
      for (std::size_t i : timed) {
        sink = sink + predict_next_inspection(m, s, d.rows[i].u);
        ++calls;
      }
    } while (elapsed_ms(start) < 20.0);
    r.mean_inference_ms = elapsed_ms(start) / static_cast<double>(calls);
  }
  return r;
}

std::string metrics_json(const EvaluationReport& r, const MlpModel& m) {
  Json j;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["train_mse"] = r.train_mse;
  j["test_mse"] = r.test_mse;
  j["train_r2"] = optional_number(r.train_r2);
  j["test_r2"] = optional_number(r.test_r2);
  j["test_mean_abs_error"] = r.mean_abs_error_test;
  j["mean_solve_ms"] = optional_number(r.mean_solve_ms);
  j["mean_inference_ms"] = r.mean_inference_ms;
  j["speedup"] = r.mean_solve_ms && r.mean_inference_ms > 0.0 ? Json(*r.mean_solve_ms / r.mean_inference_ms)
                                                                 : Json(nullptr);
  j["boundary_solutions"] = r.boundary_solutions;
  j["layer_sizes"] = m.layer_sizes;
  j["learning_rate"] = m.training.learning_rate;
  j["epochs"] = m.training.epochs;
  return j.dump(2);
}

std::string figure4_csv(const EvaluationReport& r) {
  std::ostringstream os;
  os << "scenario_id,split,tau_star,tau_pred\n";
  for (const PredictionRow& row : r.rows) {
    os << row.scenario_id << ',' << to_string(row.split) << ',' << format_number(row.tau_star) << ','
       << format_number(row.tau_pred) << '\n';
  }
  return os.str();
}

std::string timings_csv(const Dataset& d) {
  std::ostringstream os;
  os << "scenario_id,solve_ms\n";
  for (const Scenario& row : d.rows) os << row.id << ',' << format_number(row.solve_ms) << '\n';
  return os.str();
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  PipelineResult res;
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
  };
  res.dataset = stage("gen-data", [&] { return run_generate(cfg); });
  res.dataset = stage("split", [&] { return run_split(cfg, std::move(res.dataset)); });
  res.trained = stage("train", [&] { return run_train(cfg, res.dataset); });
  std::vector<double> solve_ms;
  for (const Scenario& row : res.dataset.rows) solve_ms.push_back(row.solve_ms);
  res.report = stage("evaluate", [&] { return evaluate_model(res.trained.model, res.dataset, cfg.system, solve_ms); });

  write_file_atomic(out_dir / "dataset.csv", dataset_to_csv(res.dataset));
  write_file_atomic(out_dir / "dataset.json", dataset_to_json(res.dataset));
  write_file_atomic(out_dir / "model.json", model_to_json(res.trained.model));
  write_file_atomic(out_dir / "loss_history.csv", loss_history_to_csv(res.trained.loss_history));
  write_file_atomic(out_dir / "timings.csv", timings_csv(res.dataset));
  write_file_atomic(out_dir / "metrics.json", metrics_json(res.report, res.trained.model));
  write_file_atomic(out_dir / "figure4.csv", figure4_csv(res.report));
  return res;
}

InspectionPolicy make_policy(const ExperimentConfig& cfg, const MlpModel& model) {
  if (model.system_fingerprint != fingerprint(cfg.system)) {
    throw FingerprintMismatch("model was trained for system " + fingerprint_hex(model.system_fingerprint) +
                              ", config describes " + fingerprint_hex(fingerprint(cfg.system)));
  }
  const SystemModel system = cfg.system;
  return [model, system](const DegradationState& u) { return predict_next_inspection(model, system, u); };
}

InspectionPolicy make_policy(const ExperimentConfig& cfg, const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::Solver: {
      const ExperimentConfig c = cfg;
      return [c](const DegradationState& u) {
        return optimal_inspection_time(c.system, c.costs, u, c.solver, c.quadrature).tau_star;
      };
    }
    case PolicyKind::Surrogate:
      return make_policy(cfg, model_from_json(read_file(spec.model_path)));
    case PolicyKind::FixedPeriod: {
      if (!(spec.period > 0.0)) throw PolicyError("fixed inspection period must be > 0");
      const double period = spec.period;
      return [period](const DegradationState&) { return period; };
    }
  }
  throw PolicyError("unknown policy");
}

SimulationSummary run_simulation(const ExperimentConfig& cfg, const InspectionPolicy& policy, double horizon,
                                 std::size_t replications, std::uint64_t seed) {
  cfg.validate();
  if (replications < 1) throw ConfigError("replications must be >= 1");
  SimulationSummary out;
  SimulationOptions opts;
  opts.subgrid_steps = cfg.simulation.subgrid_steps;
  std::vector<double> total, rate, avail;
  double inspections = 0.0;
  for (std::size_t r = 0; r < replications; ++r) {
    PlanTrace t = simulate_plan(cfg.system, cfg.costs, policy, horizon, RngSeed{seed, r}, opts);
    total.push_back(t.total_cost());
    rate.push_back(t.cost_rate());
    avail.push_back(t.availability());
    inspections += static_cast<double>(t.inspections.size());
    out.traces.push_back(std::move(t));
  }
  std::tie(out.mean_total_cost, out.sd_total_cost) = mean_sd(total);
  std::tie(out.mean_cost_rate, out.sd_cost_rate) = mean_sd(rate);
  std::tie(out.mean_availability, out.sd_availability) = mean_sd(avail);
  out.mean_inspections = inspections / static_cast<double>(replications);
  return out;
}

std::string simulation_summary_csv(const SimulationSummary& s) {
  std::ostringstream os;
  os << "metric,mean,sd\n";
  os << "total_cost," << format_number(s.mean_total_cost) << ',' << format_number(s.sd_total_cost) << '\n';
  os << "cost_rate," << format_number(s.mean_cost_rate) << ',' << format_number(s.sd_cost_rate) << '\n';
  os << "availability," << format_number(s.mean_availability) << ',' << format_number(s.sd_availability) << '\n';
  os << "inspections," << format_number(s.mean_inspections) << ",\n";
  return os.str();
}

std::string simulation_traces_json(const SimulationSummary& s) {
  Json arr = Json::array();
  for (std::size_t r = 0; r < s.traces.size(); ++r) {
    Json t = Json::parse(trace_to_json(s.traces[r], -1));
    t["replication"] = r;
    arr.push_back(std::move(t));
  }
  return Json{{"replications", arr}}.dump(2);
}

std::string simulation_traces_csv(const SimulationSummary& s) {
  std::string out;
  for (std::size_t r = 0; r < s.traces.size(); ++r) out += trace_to_csv(s.traces[r], r, r == 0);
  return out;
}

}  // namespace cbm

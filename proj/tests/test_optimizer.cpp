#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "cbm/error.hpp"
#include "cbm/montecarlo.hpp"
#include "cbm/optimizer.hpp"
#include "cbm/quadrature.hpp"
#include "cbm/reliability.hpp"
#include "test_support.hpp"

using namespace cbm;

namespace {

Dataset synthetic_dataset(std::size_t n) {
  Dataset d;
  d.fingerprint = 0xabcdef0123456789ULL;
  d.n_components = 2;
  for (std::size_t i = 0; i < n; ++i) {
    Scenario sc;
    sc.id = i;
    sc.u = DegradationState({0.1 * static_cast<double>(i), 1.0 / 3.0});
    sc.tau_star = 1.0 + std::sqrt(static_cast<double>(i));
    sc.cost_rate_star = 10.0 / (1.0 + static_cast<double>(i));
    sc.at_boundary = i % 7 == 0;
    d.rows.push_back(sc);
  }
  return d;
}

}  // namespace

TEST(CostParams, Validation) {
  const SystemModel s = reference_system();
  EXPECT_NO_THROW(CostParams::defaults(3).validate_for(s));
  EXPECT_THROW(CostParams::defaults(2).validate_for(s), ConfigError);
  CostParams c = CostParams::defaults(3);
  c.inspection_cost = 0.0;
  EXPECT_THROW(c.validate_for(s), ConfigError);
  c = CostParams::defaults(3);
  c.downtime_rate = -1.0;
  EXPECT_THROW(c.validate_for(s), ConfigError);
  c = CostParams::defaults(3);
  c.replacement_costs[1] = 0.0;
  EXPECT_THROW(c.validate_for(s), ConfigError);
}

TEST(SearchOptions, Validation) {
  SearchOptions o;
  EXPECT_NO_THROW(o.validate());
  o.tau_min = 50.0;
  EXPECT_THROW(o.validate(), ConfigError);
  o = SearchOptions{};
  o.tol = 0.0;
  EXPECT_THROW(o.validate(), ConfigError);
}

TEST(CostRate, RejectsNonPositiveTau) {
  const SystemModel s = reference_system();
  EXPECT_THROW(cost_rate(s, CostParams::defaults(3), 0.0, DegradationState::zeros(3)), DomainError);
  EXPECT_THROW(cost_rate(s, CostParams::defaults(3), -2.0, DegradationState::zeros(3)), DomainError);
}

TEST(CostRate, InspectionOnlyLimit) {
  const SystemModel s = test::quiet_system(3);
  CostParams c = CostParams::defaults(3);
  c.downtime_rate = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double tau : {0.1, 0.5, 2.0, 10.0, 50.0}) {
    const double cr = cost_rate(s, c, tau, DegradationState::zeros(3));
    EXPECT_NEAR(cr, c.inspection_cost / tau, 1e-9 * cr);
    EXPECT_LT(cr, prev);
    prev = cr;
  }
}

TEST(CostRate, BlowsUpNearZero) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  EXPECT_GT(cost_rate(s, c, 1e-4, DegradationState::zeros(3)), 0.99 * c.inspection_cost / 1e-4);
}

TEST(CostRate, AssembledFromSimulatedReliabilities) {
  // Same formula, every reliability replaced by a Monte Carlo estimate.
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  const DegradationState u = DegradationState::zeros(3);
  const double tau = 5.0;
  const std::size_t n = 100000;

  double numerator = c.inspection_cost;
  double var = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    SystemModel one;
    one.components = {s.components[i]};
    one.shock_rate = s.shock_rate;
    const auto est = estimate_reliability(one, tau, DegradationState::zeros(1), n, RngSeed{31, i});
    numerator += c.replacement_costs[i] * (1.0 - est.p_hat);
    var += std::pow(c.replacement_costs[i] * est.std_err, 2);
  }
  const auto& rule = gauss_legendre(32);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = 0.5 * tau * (rule.nodes[k] + 1.0);
    const auto est = estimate_reliability(s, t, u, n, RngSeed{32, k});
    const double w = c.downtime_rate * 0.5 * tau * rule.weights[k];
    numerator += w * (1.0 - est.p_hat);
    var += std::pow(w * est.std_err, 2);
  }
  const double oracle = numerator / tau;
  const double se = std::sqrt(var) / tau;
  const double analytic = cost_rate(s, c, tau, u);
  RecordProperty("analytic", std::to_string(analytic));
  RecordProperty("monte_carlo", std::to_string(oracle));
  EXPECT_NEAR(analytic, oracle, 4.0 * se + 1e-3 * oracle);
}

TEST(Optimizer, MonotoneObjectiveEndsOnUpperBound) {
  const SystemModel s = test::quiet_system(2);
  CostParams c = CostParams::defaults(2);
  c.downtime_rate = 0.0;
  const Optimum o = optimal_inspection_time(s, c, DegradationState::zeros(2));
  EXPECT_NEAR(o.tau_star, 50.0, 1e-4);
  EXPECT_TRUE(o.at_boundary);
}

TEST(Optimizer, NotBeatenByUniformGrid) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  const DegradationState u = DegradationState::zeros(3);
  const Optimum o = optimal_inspection_time(s, c, u);
  EXPECT_FALSE(o.at_boundary);
  const std::size_t points = 2000;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points; ++k) {
    const double tau = 0.1 + (50.0 - 0.1) * static_cast<double>(k) / static_cast<double>(points - 1);
    best = std::min(best, cost_rate(s, c, tau, u));
  }
  EXPECT_GE(best, o.cost_rate_star * (1.0 - 1e-6));
  // Local check around tau* at the tolerance scale.
  for (double d : {-1e-3, 1e-3, -1e-2, 1e-2}) {
    EXPECT_GE(cost_rate(s, c, o.tau_star + d, u), o.cost_rate_star * (1.0 - 1e-9));
  }
}

TEST(Optimizer, ReportedCostRateIsTheObjectiveAtTau) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  const DegradationState u({4.0, 10.0, 3.0});
  const Optimum o = optimal_inspection_time(s, c, u);
  EXPECT_NEAR(o.cost_rate_star, cost_rate(s, c, o.tau_star, u), 1e-9);
  EXPECT_GE(o.tau_star, 0.1);
  EXPECT_LE(o.tau_star, 50.0);
}

TEST(Optimizer, SwappingIdenticalComponentsWithTheirLevels) {
  SystemModel s = reference_system();
  s.components[1] = s.components[0];
  const CostParams c = CostParams::defaults(3);
  const Optimum a = optimal_inspection_time(s, c, DegradationState({2.0, 9.0, 5.0}));
  const Optimum b = optimal_inspection_time(s, c, DegradationState({9.0, 2.0, 5.0}));
  EXPECT_NEAR(a.tau_star, b.tau_star, 1e-4);
}

TEST(Optimizer, DegradedStartDoesNotLengthenInterval) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  const Optimum fresh = optimal_inspection_time(s, c, DegradationState::zeros(3));
  const Optimum worn = optimal_inspection_time(s, c, test::fraction_of_threshold(s, 0.8));
  EXPECT_GE(fresh.tau_star, worn.tau_star);
  EXPECT_FALSE(worn.at_boundary);
}

TEST(Optimizer, Deterministic) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  const DegradationState u({1.0, 2.0, 3.0});
  const Optimum a = optimal_inspection_time(s, c, u);
  const Optimum b = optimal_inspection_time(s, c, u);
  EXPECT_EQ(a.tau_star, b.tau_star);
  EXPECT_EQ(a.cost_rate_star, b.cost_rate_star);
}

TEST(Dataset, GenerationIsSeededAndBounded) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  SearchOptions opts;
  opts.grid_points = 40;
  const Dataset a = generate_dataset(s, c, 4, USampler{}, opts, 17);
  const Dataset b = generate_dataset(s, c, 4, USampler{}, opts, 17);
  ASSERT_EQ(a.rows.size(), 4u);
  EXPECT_EQ(dataset_to_json(a), dataset_to_json(b));
  EXPECT_EQ(a.fingerprint, fingerprint(s, c));
  for (const Scenario& sc : a.rows) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GE(sc.u[i], 0.0);
      EXPECT_LE(sc.u[i], 0.8 * s.components[i].soft_threshold);
    }
    EXPECT_GE(sc.solve_ms, 0.0);
  }
}

TEST(Dataset, DegenerateSamplerGivesIdenticalRows) {
  const SystemModel s = reference_system();
  SearchOptions opts;
  opts.grid_points = 40;
  const Dataset d = generate_dataset(s, CostParams::defaults(3), 3, USampler{0.0, 0.0}, opts, 5);
  for (const Scenario& sc : d.rows) {
    EXPECT_EQ(sc.tau_star, d.rows[0].tau_star);
    EXPECT_EQ(sc.u.u, std::vector<double>(3, 0.0));
  }
}

TEST(Dataset, ScenarioStreamsDoNotDependOnCount) {
  const SystemModel s = reference_system();
  SearchOptions opts;
  opts.grid_points = 20;
  const Dataset small = generate_dataset(s, CostParams::defaults(3), 2, USampler{}, opts, 3);
  const Dataset large = generate_dataset(s, CostParams::defaults(3), 3, USampler{}, opts, 3);
  EXPECT_EQ(small.rows[1].u.u, large.rows[1].u.u);
}

TEST(Split, SeventyThirtyOfSixty) {
  const Dataset d = split_dataset(synthetic_dataset(60), 0.7, 1);
  EXPECT_EQ(d.indices(Split::Train).size(), 42u);
  EXPECT_EQ(d.indices(Split::Test).size(), 18u);
  std::set<std::size_t> all;
  for (auto i : d.indices(Split::Train)) all.insert(i);
  for (auto i : d.indices(Split::Test)) all.insert(i);
  EXPECT_EQ(all.size(), 60u);
}

TEST(Split, TwoRowsHalfAndHalf) {
  const Dataset d = split_dataset(synthetic_dataset(2), 0.5, 9);
  EXPECT_EQ(d.indices(Split::Train).size(), 1u);
  EXPECT_EQ(d.indices(Split::Test).size(), 1u);
}

TEST(Split, SeededAndVaried) {
  const Dataset a = split_dataset(synthetic_dataset(30), 0.7, 4);
  const Dataset b = split_dataset(synthetic_dataset(30), 0.7, 4);
  const Dataset c = split_dataset(synthetic_dataset(30), 0.7, 5);
  EXPECT_EQ(a.split, b.split);
  EXPECT_NE(a.split, c.split);
}

TEST(Split, RejectsBadArguments) {
  EXPECT_THROW(split_dataset(synthetic_dataset(1), 0.5, 1), ConfigError);
  EXPECT_THROW(split_dataset(synthetic_dataset(10), 0.0, 1), ConfigError);
  EXPECT_THROW(split_dataset(synthetic_dataset(10), 1.0, 1), ConfigError);
}

TEST(Fingerprint, SensitiveToEveryInput) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(3);
  SystemModel s2 = s;
  s2.components[2].shock_damage_sd += 1e-12;
  CostParams c2 = c;
  c2.downtime_rate += 1.0;
  EXPECT_NE(fingerprint(s), fingerprint(s2));
  EXPECT_NE(fingerprint(s, c), fingerprint(s, c2));
  EXPECT_NE(fingerprint(s), fingerprint(s, c));
  EXPECT_EQ(parse_fingerprint_hex(fingerprint_hex(fingerprint(s, c))), fingerprint(s, c));
  EXPECT_THROW(parse_fingerprint_hex("xyz"), ConfigError);
}

TEST(DatasetIo, JsonRoundTripIsExact) {
  const Dataset d = split_dataset(synthetic_dataset(9), 0.7, 2);
  const Dataset back = dataset_from_json(dataset_to_json(d));
  EXPECT_EQ(back.fingerprint, d.fingerprint);
  EXPECT_EQ(back.split, d.split);
  ASSERT_EQ(back.rows.size(), d.rows.size());
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].u.u, d.rows[i].u.u);
    EXPECT_EQ(back.rows[i].tau_star, d.rows[i].tau_star);
    EXPECT_EQ(back.rows[i].at_boundary, d.rows[i].at_boundary);
  }
  EXPECT_EQ(dataset_to_json(back), dataset_to_json(d));
}

TEST(DatasetIo, CsvRoundTripToNineDigits) {
  const Dataset d = split_dataset(synthetic_dataset(9), 0.7, 2);
  const std::string csv = dataset_to_csv(d);
  EXPECT_EQ(csv.rfind("# fingerprint=", 0), 0u);
  EXPECT_NE(csv.find("scenario_id,u_1,u_2,tau_star,cost_rate_star,split\n"), std::string::npos);
  const Dataset back = dataset_from_csv(csv);
  EXPECT_EQ(back.split, d.split);
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    EXPECT_NEAR(back.rows[i].u[1], d.rows[i].u[1], 1e-9);
    EXPECT_NEAR(back.rows[i].tau_star, d.rows[i].tau_star, 1e-8 * d.rows[i].tau_star);
  }
  EXPECT_EQ(dataset_to_csv(back), csv);
}

TEST(DatasetIo, MalformedCsvRejected) {
  EXPECT_THROW(dataset_from_csv("scenario_id,u_1\n"), ConfigError);
  EXPECT_THROW(dataset_from_csv("# fingerprint=00 n_components=2\nscenario_id,u_1\n"), ConfigError);
}

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cbm/error.hpp"
#include "cbm/optimizer.hpp"
#include "cbm/surrogate.hpp"
#include "gradient_check.hpp"
#include "test_support.hpp"

using namespace cbm;

namespace {

// Smooth 2-input regression problem.
void toy_data(std::size_t n, std::vector<std::vector<double>>& x, std::vector<double>& y) {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  x.clear();
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(gen), b = u(gen);
    x.push_back({a, b});
    y.push_back(4.0 - 3.0 * a * a + std::sin(3.0 * b));
  }
}

MlpModel bound_model(const SystemModel& s, std::uint64_t seed) {
  MlpModel m = MlpModel::create({s.size(), 4, 1}, seed);
  m.system_fingerprint = fingerprint(s);
  m.tau_min = 0.1;
  m.tau_max = 50.0;
  return m;
}

}  // namespace

TEST(Sigmoid, ValuesAndSaturation) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Metrics, MeanSquaredError) {
  EXPECT_DOUBLE_EQ(mse(std::vector<double>{0.0}, std::vector<double>{2.0}), 4.0);
  EXPECT_DOUBLE_EQ(mse(std::vector<double>{1.0, 3.0}, std::vector<double>{2.0, 5.0}), 2.5);
  EXPECT_THROW(mse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(Metrics, RSquared) {
  const std::vector<double> y{1.0, 2.0, 4.0, 7.0};
  EXPECT_DOUBLE_EQ(r_squared(y, y), 1.0);
  EXPECT_NEAR(r_squared(std::vector<double>(4, 3.5), y), 0.0, 1e-15);
  EXPECT_THROW(r_squared(std::vector<double>{1.0, 2.0}, std::vector<double>{3.0, 3.0}), DomainError);
  EXPECT_THROW(r_squared(std::vector<double>{1.0}, std::vector<double>{3.0}), DimensionError);
}

TEST(Scaler, FitStandardisesColumns) {
  const Scaler s = Scaler::fit({{1.0, 5.0}, {3.0, 5.0}});
  EXPECT_DOUBLE_EQ(s.shift[0], 2.0);
  EXPECT_DOUBLE_EQ(s.scale[0], 1.0);
  EXPECT_DOUBLE_EQ(s.shift[1], 5.0);
  EXPECT_DOUBLE_EQ(s.scale[1], 1.0);
  EXPECT_THROW(Scaler::fit({}), DimensionError);
}

TEST(Features, Layouts) {
  const SystemModel s = reference_system();
  FeatureSpec only;
  FeatureSpec full{FeatureMode::UPlusParams};
  EXPECT_EQ(only.feature_count(3), 3u);
  EXPECT_EQ(full.feature_count(3), 28u);
  const auto f = full.build(s, DegradationState({10.0, 15.0, 7.0}));
  ASSERT_EQ(f.size(), 28u);
  EXPECT_DOUBLE_EQ(f[0], 0.5);
  EXPECT_DOUBLE_EQ(f[1], 0.5);
  EXPECT_DOUBLE_EQ(f[2], 0.2);
  EXPECT_DOUBLE_EQ(f[3], 20.0);
  EXPECT_DOUBLE_EQ(f.back(), s.shock_rate);
  EXPECT_THROW(only.build(s, DegradationState::zeros(2)), DimensionError);
}

TEST(Model, CreateShapesAndGlorotRange) {
  const MlpModel m = MlpModel::create({3, 16, 16, 1}, 4);
  ASSERT_EQ(m.layers.size(), 3u);
  EXPECT_EQ(m.layers[1].weights.size(), 256u);
  const double limit = std::sqrt(6.0 / 32.0);
  for (double w : m.layers[1].weights) EXPECT_LE(std::abs(w), limit);
  for (double b : m.layers[1].bias) EXPECT_EQ(b, 0.0);
  EXPECT_THROW(MlpModel::create({3}, 1), DimensionError);
  EXPECT_THROW(MlpModel::create({3, 2}, 1), DimensionError);
  EXPECT_THROW(forward(m, std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(Backprop, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = test::random_gradient_case(seed);
    const auto check = test::check_gradients(c);
    EXPECT_LT(check.worst_relative, 1e-4) << "configuration " << seed;
    EXPECT_GT(check.parameters, 0u);
  }
}

TEST(Backprop, ZeroAtStationaryResidual) {
  MlpModel m = MlpModel::create({2, 3, 1}, 1);
  for (auto& layer : m.layers) std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
  m.layers.back().bias[0] = 1.7;
  const Gradients g = backprop_gradients(m, std::vector<double>{0.3, -1.0}, 1.7);
  for (const auto& w : g.weights) {
    for (double v : w) EXPECT_EQ(v, 0.0);
  }
  for (const auto& b : g.biases) {
    for (double v : b) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backprop, LinearInResidual) {
  const auto c = test::random_gradient_case(42);
  const double out = forward(c.model, c.x);
  const double r = out - c.target;
  const Gradients g1 = backprop_gradients(c.model, c.x, c.target);
  const Gradients g3 = backprop_gradients(c.model, c.x, out - 3.0 * r);
  for (std::size_t l = 0; l < g1.weights.size(); ++l) {
    for (std::size_t k = 0; k < g1.weights[l].size(); ++k) {
      EXPECT_NEAR(g3.weights[l][k], 3.0 * g1.weights[l][k], 1e-12 * (1.0 + std::abs(g3.weights[l][k])));
    }
  }
}

TEST(Training, ZeroLearningRateChangesNothing) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  toy_data(10, x, y);
  const MlpModel m = MlpModel::create({2, 5, 1}, 3);
  TrainOptions o;
  o.learning_rate = 0.0;
  o.epochs = 5;
  const TrainResult r = train_on(m, x, y, o);
  EXPECT_EQ(r.model.layers[0].weights, m.layers[0].weights);
  for (double l : r.loss_history) EXPECT_EQ(l, r.loss_history.front());
}

TEST(Training, SingleWeightFollowsAnalyticIterate) {
  // y = 2x from (1, 2): theta_k = 2 - 2 (1 - 2 eta)^k starting from 0.
  MlpModel m = MlpModel::create({1, 1}, 1);
  m.layers[0].weights[0] = 0.0;
  TrainOptions o;
  o.learning_rate = 0.1;
  o.mode = TrainMode::FullBatchGD;
  o.update_biases = false;
  const std::vector<std::vector<double>> x{{1.0}};
  const std::vector<double> y{2.0};
  for (std::size_t k : {1u, 5u, 20u}) {
    o.epochs = k;
    const double theta = train_on(m, x, y, o).model.layers[0].weights[0];
    EXPECT_NEAR(theta, 2.0 - 2.0 * std::pow(0.8, static_cast<double>(k)), 1e-12) << "k = " << k;
  }
  o.epochs = 10000;
  const TrainResult r = train_on(m, x, y, o);
  EXPECT_NEAR(r.model.layers[0].weights[0], 2.0, 1e-6);
  EXPECT_EQ(r.model.layers[0].bias[0], 0.0);
}

TEST(Training, PerSampleSgdIsSeeded) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  toy_data(20, x, y);
  TrainOptions o;
  o.epochs = 50;
  o.seed = 8;
  const MlpModel m = MlpModel::create({2, 6, 1}, 2);
  const TrainResult a = train_on(m, x, y, o);
  const TrainResult b = train_on(m, x, y, o);
  EXPECT_EQ(a.model.layers[0].weights, b.model.layers[0].weights);
  EXPECT_EQ(a.loss_history, b.loss_history);
  o.seed = 9;
  EXPECT_NE(train_on(m, x, y, o).model.layers[0].weights, a.model.layers[0].weights);
}

TEST(Training, FullBatchDescentIsMonotoneForSmallSteps) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  toy_data(25, x, y);
  MlpModel m = MlpModel::create({2, 8, 8, 1}, 6);
  m.input_scaler = Scaler::fit(x);
  m.output_shift = 3.0;
  m.output_scale = 1.0;
  TrainOptions o;
  o.mode = TrainMode::FullBatchGD;
  o.epochs = 400;
  bool monotone = false;
  for (double eta = 2.0; eta > 1e-4 && !monotone; eta *= 0.5) {
    o.learning_rate = eta;
    try {
      const TrainResult r = train_on(m, x, y, o);
      monotone = std::is_sorted(r.loss_history.rbegin(), r.loss_history.rend());
      if (monotone) {
        EXPECT_LT(r.loss_history.back(), r.loss_history.front());
      }
    } catch (const NumericError&) {
    }
  }
  EXPECT_TRUE(monotone);
}

TEST(Training, DivergenceAborts) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  toy_data(10, x, y);
  TrainOptions o;
  o.mode = TrainMode::FullBatchGD;
  o.learning_rate = 50.0;
  o.epochs = 200;
  EXPECT_THROW(train_on(MlpModel::create({2, 1}, 1), x, y, o), NumericError);
}

TEST(Training, OutputScalerInvariance) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  toy_data(15, x, y);
  MlpModel m = MlpModel::create({2, 5, 1}, 11);
  m.input_scaler = Scaler::fit(x);
  m.output_shift = 3.5;
  m.output_scale = 0.8;
  TrainOptions o;
  o.epochs = 100;
  o.seed = 2;
  const TrainResult base = train_on(m, x, y, o);
  for (double c : {0.01, 7.0, 1000.0}) {
    MlpModel mc = m;
    mc.output_shift *= c;
    mc.output_scale *= c;
    std::vector<double> yc = y;
    for (double& v : yc) v *= c;
    const TrainResult scaled = train_on(mc, x, yc, o);
    for (const auto& row : x) {
      EXPECT_NEAR(forward(scaled.model, row) / c, forward(base.model, row), 1e-9) << "c = " << c;
    }
  }
}

TEST(Training, RejectsBadInputs) {
  TrainOptions o;
  o.epochs = 0;
  EXPECT_THROW(train_on(MlpModel::create({1, 1}, 1), {{1.0}}, {1.0}, o), ConfigError);
  EXPECT_THROW(train_on(MlpModel::create({1, 1}, 1), {}, {}, TrainOptions{}), DimensionError);
}

TEST(Training, DatasetTrainingFitsScalersOnTrainRows) {
  const SystemModel s = reference_system();
  Dataset d;
  d.n_components = 3;
  for (std::size_t i = 0; i < 10; ++i) {
    Scenario sc;
    sc.id = i;
    sc.u = DegradationState({1.0 * i, 2.0 * i, 0.5 * i});
    sc.tau_star = 4.0 - 0.3 * i;
    d.rows.push_back(sc);
  }
  d = split_dataset(d, 0.7, 3);
  TrainOptions o;
  o.epochs = 20;
  const TrainResult r = train(MlpModel::create({3, 4, 1}, 1), d, s, FeatureSpec{}, o);
  double mean = 0.0;
  for (auto i : d.indices(Split::Train)) mean += d.rows[i].tau_star;
  mean /= 7.0;
  EXPECT_NEAR(r.model.output_shift, mean, 1e-12);
  EXPECT_EQ(r.model.system_fingerprint, fingerprint(s));
  EXPECT_EQ(r.loss_history.size(), 20u);
  EXPECT_GT(r.model.training.final_test_mse, 0.0);
  EXPECT_THROW(train(MlpModel::create({2, 1}, 1), d, s, FeatureSpec{}, o), DimensionError);
}

TEST(Prediction, ClampedToSearchBounds) {
  const SystemModel s = reference_system();
  MlpModel m = bound_model(s, 1);
  m.layers.back().bias[0] = -1e3;
  EXPECT_EQ(predict_next_inspection(m, s, DegradationState::zeros(3)), 0.1);
  m.layers.back().bias[0] = 1e3;
  EXPECT_EQ(predict_next_inspection(m, s, DegradationState::zeros(3)), 50.0);
}

TEST(Prediction, RepeatableAndChecksSystem) {
  const SystemModel s = reference_system();
  const MlpModel m = bound_model(s, 2);
  const DegradationState u({3.0, 4.0, 5.0});
  EXPECT_EQ(predict_next_inspection(m, s, u), predict_next_inspection(m, s, u));
  SystemModel other = s;
  other.shock_rate *= 2.0;
  EXPECT_THROW(predict_next_inspection(m, other, u), FingerprintMismatch);
}

TEST(Serialization, RoundTripIsBitIdentical) {
  auto c = test::random_gradient_case(5);
  c.model.system_fingerprint = 0x1234;
  c.model.training.learning_rate = 0.05;
  const MlpModel back = model_from_json(model_to_json(c.model));
  EXPECT_EQ(back.layer_sizes, c.model.layer_sizes);
  EXPECT_EQ(back.system_fingerprint, 0x1234u);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> x(c.x.size());
    for (double& v : x) v = 3.0 * n01(gen);
    EXPECT_EQ(forward(back, x), forward(c.model, x));
  }
  EXPECT_EQ(model_to_json(back), model_to_json(c.model));
}

TEST(Serialization, RejectsForeignDocuments) {
  EXPECT_THROW(model_from_json("{\"format\": \"other\"}"), ConfigError);
  EXPECT_THROW(model_from_json("not json"), ConfigError);
}

TEST(Serialization, LossHistoryCsv) {
  const std::string csv = loss_history_to_csv({0.5, 0.25});
  EXPECT_EQ(csv, "epoch,train_mse\n1,0.5\n2,0.25\n");
}

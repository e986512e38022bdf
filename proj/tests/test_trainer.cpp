#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "lobtrend/metrics.hpp"
#include "lobtrend/trainer.hpp"

using namespace lobtrend;
using namespace testing_support;

namespace {

TrainConfig toy_config(std::size_t epochs = 50) {
  TrainConfig c;
  c.learning_rate = 1e-2;
  c.batch_size = 16;
  c.epochs = epochs;
  c.seed = 3;
  return c;
}

double accuracy_of(const Mlp& m, const ToySet& t) {
  const auto p = predict_probabilities(m, samples_of(t.x, t.dim, t.y));
  std::size_t hit = 0;
  for (std::size_t i = 0; i < p.size(); ++i) hit += argmax_label(p[i]) == t.y[i];
  return static_cast<double>(hit) / static_cast<double>(p.size());
}

}  // namespace

TEST(TrainConfig, Validation) {
  EXPECT_NO_THROW(TrainConfig{}.validate());
  TrainConfig c;
  c.learning_rate = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), Errc::InvalidArgument);
  c = {};
  c.batch_size = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), Errc::InvalidArgument);
  c = {};
  c.epochs = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), Errc::InvalidArgument);
  EXPECT_EQ(parse_optimizer("rmsprop"), Optimizer::RMSprop);
  EXPECT_EQ(optimizer_name(Optimizer::SGD), "sgd");
}

TEST(Train, SeparableToySetLearned) {
  const ToySet tr = separable_toy(1), va = separable_toy(2), te = separable_toy(3);
  const Mlp init = Mlp::init(MlpConfig{tr.dim, {16}}, 3);
  const TrainResult r = train(init, samples_of(tr.x, tr.dim, tr.y), samples_of(va.x, va.dim, va.y), toy_config());
  EXPECT_GE(accuracy_of(r.model, tr), 0.99);
  EXPECT_GE(accuracy_of(r.model, te), 0.99);
  ASSERT_EQ(r.history.size(), 50u);
  EXPECT_LT(r.history[49].train_loss, r.history[0].train_loss);
  EXPECT_EQ(r.best_val_f1, r.history[r.best_epoch - 1].val_f1);
  for (const auto& h : r.history) EXPECT_LE(h.val_f1, r.best_val_f1);
}

TEST(Train, EveryOptimizerReducesLoss) {
  const ToySet tr = separable_toy(4), va = separable_toy(5);
  for (Optimizer o : {Optimizer::Adam, Optimizer::SGD, Optimizer::RMSprop}) {
    TrainConfig c = toy_config(20);
    c.optimizer = o;
    if (o == Optimizer::SGD) c.learning_rate = 0.1;
    const TrainResult r =
        train(Mlp::init(MlpConfig{tr.dim, {8}}, 1), samples_of(tr.x, tr.dim, tr.y), samples_of(va.x, va.dim, va.y), c);
    EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss) << optimizer_name(o);
  }
}

TEST(Train, LearningRateTenSurfacesDivergence) {
  const ToySet tr = separable_toy(1), va = separable_toy(2);
  TrainConfig c = toy_config();
  c.learning_rate = 10.0;
  try {
    const TrainResult r =
        train(Mlp::init(MlpConfig{tr.dim, {16}}, 3), samples_of(tr.x, tr.dim, tr.y), samples_of(va.x, va.dim, va.y), c);
    // Majority-class predictor on balanced thirds: macro F1 = (0.5 + 0 + 0) / 3.
    const auto p = predict_probabilities(r.model, samples_of(va.x, va.dim, va.y));
    std::vector<TrendLabel> pred;
    for (const auto& row : p) pred.push_back(argmax_label(row));
    EXPECT_LE(macro_metrics(confusion(pred, va.y)).f1, 1.0 / 3.0 + 1e-9);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFiniteLoss);
  }
}

TEST(Train, OverflowReportsEpochAndBatch) {
  const ToySet tr = separable_toy(1), va = separable_toy(2);
  TrainConfig c = toy_config(3);
  c.optimizer = Optimizer::SGD;
  c.learning_rate = 1e300;
  try {
    train(Mlp::init(MlpConfig{tr.dim, {16}}, 3), samples_of(tr.x, tr.dim, tr.y), samples_of(va.x, va.dim, va.y), c);
    ADD_FAILURE() << "no NonFiniteLoss";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFiniteLoss);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Train, BitIdenticalAcrossRuns) {
  const ToySet tr = separable_toy(6), va = separable_toy(7);
  auto run = [&] {
    return train(Mlp::init(MlpConfig{tr.dim, {8}}, 11), samples_of(tr.x, tr.dim, tr.y),
                 samples_of(va.x, va.dim, va.y), toy_config(10));
  };
  const TrainResult a = run(), b = run();
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  TrainConfig other = toy_config(10);
  other.seed = 4;
  const TrainResult c =
      train(Mlp::init(MlpConfig{tr.dim, {8}}, 11), samples_of(tr.x, tr.dim, tr.y), samples_of(va.x, va.dim, va.y), other);
  EXPECT_FALSE(a.model == c.model);
}

TEST(Train, InputErrors) {
  const ToySet tr = separable_toy(1), va = separable_toy(2);
  const Mlp wrong = Mlp::init(MlpConfig{tr.dim + 1, {4}}, 0);
  EXPECT_EQ(code_of([&] { train(wrong, samples_of(tr.x, tr.dim, tr.y), samples_of(va.x, va.dim, va.y), toy_config(1)); }),
            Errc::DimensionMismatch);
  const Mlp ok = Mlp::init(MlpConfig{tr.dim, {4}}, 0);
  EXPECT_EQ(code_of([&] { train(ok, samples_of({}, tr.dim, {}), samples_of(va.x, va.dim, va.y), toy_config(1)); }),
            Errc::EmptyInput);
}

TEST(Train, BundleEntryPoint) {
  const DatasetBundle b = random_bundle(21, 64, 4, 1);
  TrainConfig c = toy_config(3);
  const TrainResult r = train(MlpConfig{16, {5}}, b, c);
  EXPECT_EQ(r.history.size(), 3u);
  EXPECT_EQ(code_of([&] { train(MlpConfig{15, {5}}, b, c); }), Errc::DimensionMismatch);
}

TEST(Predict, SimplexAndIndices) {
  const DatasetBundle b = random_bundle(22, 50, 4, 1);
  const Mlp m = Mlp::init(MlpConfig{16, {5}}, 1);
  const PredictionSet p = predict(m, b[Split::Test], "MLP", 5, 1);
  ASSERT_EQ(p.size(), b[Split::Test].size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p.index[i], i);
    EXPECT_NEAR(p.probs[i][0] + p.probs[i][1] + p.probs[i][2], 1.0, 1e-6);
    for (double v : p.probs[i]) EXPECT_GE(v, 0.0);
  }
  EXPECT_EQ(p.model_id, "MLP");
  EXPECT_EQ(p.horizon, 5);
  const PredictionSet z = predict(Mlp(MlpConfig{16, {5}}), b[Split::Test], "ZERO", 5, 0);
  for (const auto& row : z.probs) EXPECT_EQ(row, (Probabilities{1.0 / 3, 1.0 / 3, 1.0 / 3}));
  EXPECT_EQ(code_of([&] { predict(Mlp::init(MlpConfig{17, {5}}, 1), b[Split::Test], "X", 5, 0); }),
            Errc::DimensionMismatch);
}

TEST(GridSearch, FiveByFourRanked) {
  const DatasetBundle b = random_bundle(23, 48, 3, 1);
  const double lrs[] = {0.01, 0.001, 0.0001, 0.00001};
  const std::size_t batches[] = {16, 32, 64, 128, 256};
  TrainConfig base = toy_config(2);
  const auto rows = grid_search(MlpConfig{12, {4}}, b, lrs, batches, base, 4);
  ASSERT_EQ(rows.size(), 20u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i - 1].val_f1, rows[i].val_f1);
  std::set<std::pair<double, std::size_t>> cells;
  for (const auto& r : rows) cells.insert({r.learning_rate, r.batch_size});
  EXPECT_EQ(cells.size(), 20u);
}

TEST(GridSearch, SingleCellEqualsTrain) {
  const DatasetBundle b = random_bundle(24, 48, 3, 1);
  const double lrs[] = {0.005};
  const std::size_t batches[] = {8};
  TrainConfig base = toy_config(4);
  const auto rows = grid_search(MlpConfig{12, {4}}, b, lrs, batches, base, 1);
  ASSERT_EQ(rows.size(), 1u);
  base.learning_rate = 0.005;
  base.batch_size = 8;
  const TrainResult r = train(MlpConfig{12, {4}}, b, base);
  EXPECT_EQ(rows[0].val_f1, r.best_val_f1);
  EXPECT_EQ(rows[0].best_epoch, r.best_epoch);
  EXPECT_FALSE(rows[0].diverged);
}

TEST(GridSearch, FailingCellIsolated) {
  const DatasetBundle b = random_bundle(25, 48, 3, 1);
  const double lrs[] = {0.01, 0.001};
  const std::size_t batches[] = {16, 32};
  const MlpConfig mc{12, {4}};
  const auto rows = grid_search(mc, b, lrs, batches, toy_config(2), 2, [&](const TrainConfig& c) {
    if (c.learning_rate == 0.01 && c.batch_size == 32) fail(Errc::NonFiniteLoss, "injected at epoch 1 batch 1");
    return train(mc, b, c);
  });
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows.back().diverged);
  EXPECT_EQ(rows.back().learning_rate, 0.01);
  EXPECT_EQ(rows.back().batch_size, 32u);
  EXPECT_NE(rows.back().error.find("injected"), std::string::npos);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_FALSE(rows[i].diverged);
}

#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "lobtrend/ensemble.hpp"
#include "lobtrend/metrics.hpp"

using namespace lobtrend;
using namespace testing_support;

namespace {

PredictionSet one_hot_set(const std::vector<TrendLabel>& votes, const std::string& id = "M") {
  PredictionSet p;
  p.model_id = id;
  p.horizon = 5;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    Probabilities row{0, 0, 0};
    row[index_of(votes[i])] = 1;
    p.index.push_back(i);
    p.probs.push_back(row);
  }
  return p;
}

PredictionSet random_soft_set(std::uint64_t seed, std::size_t n) {
  CounterRng rng(seed);
  PredictionSet p;
  p.model_id = "R" + std::to_string(seed);
  p.horizon = 5;
  for (std::size_t i = 0; i < n; ++i) {
    Probabilities row{rng.uniform(), rng.uniform(), rng.uniform()};
    const double s = row[0] + row[1] + row[2];
    for (double& v : row) v /= s;
    p.index.push_back(i);
    p.probs.push_back(row);
  }
  return p;
}

std::vector<TrendLabel> random_labels(std::uint64_t seed, std::size_t n) {
  CounterRng rng(seed);
  std::vector<TrendLabel> y(n);
  for (auto& l : y) l = static_cast<TrendLabel>(rng.below(3));
  return y;
}

/// Independent weighted tally with the no-trade tie priority.
TrendLabel tally(const std::vector<PredictionSet>& sets, const std::vector<double>& w, std::size_t i) {
  double score[3] = {0, 0, 0};
  for (std::size_t m = 0; m < sets.size(); ++m) {
    const auto& p = sets[m].probs[i];
    std::size_t best = 1;  // S first, then U, then D on exact ties
    for (std::size_t c : {std::size_t{0}, std::size_t{2}}) {
      if (p[c] > p[best]) best = c;
    }
    score[best] += w[m];
  }
  std::size_t win = 1;
  for (std::size_t c : {std::size_t{0}, std::size_t{2}}) {
    if (score[c] > score[win]) win = c;
  }
  return static_cast<TrendLabel>(win);
}

double f1_points(const PredictionSet& p, const std::vector<TrendLabel>& truth, std::size_t from) {
  std::vector<TrendLabel> pred, t;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.index[i] < from) continue;
    pred.push_back(p.predicted(i));
    t.push_back(truth[p.index[i]]);
  }
  return 100 * macro_metrics(confusion(pred, t)).f1;
}

}  // namespace

TEST(Majority, PlainVote) {
  using enum TrendLabel;
  EnsembleInput in{{one_hot_set({Up}), one_hot_set({Up}), one_hot_set({Down})}, {1, 1, 1}};
  const PredictionSet out = majority_vote(in);
  EXPECT_EQ(out.model_id, "MAJORITY");
  EXPECT_EQ(out.predicted(0), Up);
  EXPECT_EQ(out.probs[0], (Probabilities{1, 0, 0}));
  EXPECT_EQ(out.extra.at("tie_break"), "S>U>D");
}

TEST(Majority, WeightedVote) {
  using enum TrendLabel;
  EnsembleInput in{{one_hot_set({Down}), one_hot_set({Up}), one_hot_set({Up})}, {0.9, 0.3, 0.3}};
  EXPECT_EQ(majority_vote(in).predicted(0), Down);
}

TEST(Majority, TiesPreferNoTrade) {
  using enum TrendLabel;
  EXPECT_EQ(majority_vote({{one_hot_set({Up}), one_hot_set({Down})}, {1, 1}}).predicted(0), Up);
  EXPECT_EQ(majority_vote({{one_hot_set({Up}), one_hot_set({Stationary})}, {1, 1}}).predicted(0), Stationary);
}

TEST(Majority, BruteForceTallyFifteenModels) {
  const std::size_t n = 1000;
  std::vector<PredictionSet> sets;
  std::vector<double> w;
  CounterRng rng(5);
  for (std::uint64_t m = 0; m < 15; ++m) {
    sets.push_back(random_soft_set(100 + m, n));
    w.push_back(rng.uniform(0.3, 0.6));
  }
  const PredictionSet out = majority_vote({sets, w});
  ASSERT_EQ(out.size(), n);
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(out.predicted(i), tally(sets, w, i)) << i;
}

TEST(Majority, BruteForceTallyWithIntegerWeightTies) {
  // Small integer weights and one-hot votes force many exact ties.
  const std::size_t n = 1000;
  std::vector<PredictionSet> sets;
  std::vector<double> w;
  for (std::uint64_t m = 0; m < 4; ++m) {
    sets.push_back(one_hot_set(random_labels(200 + m, n)));
    w.push_back(1 + static_cast<double>(m % 2));
  }
  const PredictionSet out = majority_vote({sets, w});
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(out.predicted(i), tally(sets, w, i)) << i;
}

TEST(MajorityProperties, UnanimityAndScaleInvariance) {
  CounterRng rng(6);
  for (int trial = 0; trial < 10'000; ++trial) {
    const std::size_t m = 1 + rng.below(6);
    std::vector<PredictionSet> sets;
    std::vector<double> w;
    for (std::size_t j = 0; j < m; ++j) {
      sets.push_back(random_soft_set(rng.next_u64(), 3));
      w.push_back(rng.uniform(0.01, 1));
    }
    const PredictionSet base = majority_vote({sets, w});
    std::vector<double> scaled = w;
    const double c = rng.uniform(0.001, 1000);
    for (double& x : scaled) x *= c;
    const PredictionSet again = majority_vote({sets, scaled});
    ASSERT_EQ(base.predicted_labels(), again.predicted_labels());

    const TrendLabel all = static_cast<TrendLabel>(rng.below(3));
    std::vector<PredictionSet> unanimous;
    for (std::size_t j = 0; j < m; ++j) unanimous.push_back(one_hot_set({all, all, all}));
    const PredictionSet u = majority_vote({unanimous, w});
    for (std::size_t i = 0; i < 3; ++i) ASSERT_EQ(u.predicted(i), all);
  }
}

TEST(Majority, InputErrors) {
  using enum TrendLabel;
  EXPECT_EQ(code_of([] { majority_vote({{one_hot_set({Up}), one_hot_set({Up, Down})}, {1, 1}}); }),
            Errc::MisalignedSets);
  PredictionSet shifted = one_hot_set({Up});
  shifted.index[0] = 7;
  EXPECT_EQ(code_of([&] { majority_vote({{one_hot_set({Up}), shifted}, {1, 1}}); }), Errc::MisalignedSets);
  EXPECT_EQ(code_of([] { majority_vote({{one_hot_set({Up})}, {-1}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { majority_vote({{one_hot_set({Up})}, {0}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { majority_vote({{one_hot_set({Up})}, {1, 1}}); }), Errc::InvalidArgument);
}

TEST(Weights, F1AndGlobal) {
  using enum TrendLabel;
  const std::vector<TrendLabel> truth{Up, Stationary, Down};
  const std::vector<PredictionSet> sets{one_hot_set({Up, Stationary, Down}), one_hot_set({Stationary, Stationary, Stationary})};
  const auto w = f1_weights(sets, truth);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_NEAR(w[1], (0 + 0.5 + 0) / 3.0, 1e-12);  // S: precision 1/3, recall 1
  const std::vector<std::vector<double>> per{{0.2, 0.6}, {0.4, 0.2}};
  const auto g = global_weights(per);
  EXPECT_NEAR(g[0], 0.3, 1e-15);
  EXPECT_NEAR(g[1], 0.4, 1e-15);
}

TEST(MetaFeatures, TwoModelRow) {
  using enum TrendLabel;
  const std::vector<PredictionSet> sets{one_hot_set({Up}), one_hot_set({Stationary})};
  EXPECT_EQ(build_meta_features(sets), (std::vector<double>{1, 0, 0, 0, 1, 0}));
}

TEST(MetaFeatures, FifteenModelsWidthAndBlocks) {
  std::vector<PredictionSet> sets;
  for (std::uint64_t m = 0; m < 15; ++m) sets.push_back(random_soft_set(300 + m, 20));
  const auto rows = build_meta_features(sets);
  ASSERT_EQ(rows.size(), 20u * 45);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t m = 0; m < 15; ++m) {
      const double* b = &rows[i * 45 + 3 * m];
      EXPECT_NEAR(b[0] + b[1] + b[2], 1.0, 1e-12);
      EXPECT_EQ(b[0], sets[m].probs[i][0]);
    }
  }
}

TEST(MetaFeatures, PermutedModelsPermuteBlocks) {
  std::vector<PredictionSet> sets;
  for (std::uint64_t m = 0; m < 5; ++m) sets.push_back(random_soft_set(400 + m, 30));
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<PredictionSet> permuted;
  for (std::size_t j : perm) permuted.push_back(sets[j]);
  const auto a = build_meta_features(sets);
  const auto b = build_meta_features(permuted);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t m = 0; m < 5; ++m) {
      for (std::size_t c = 0; c < 3; ++c) ASSERT_EQ(b[i * 15 + 3 * m + c], a[i * 15 + 3 * perm[m] + c]);
    }
  }
}

TEST(Metalob, ChronologicalSplitCounts) {
  const auto s = chronological_split(100, 0.70, 0.15);
  EXPECT_EQ(s.train, 70u);
  EXPECT_EQ(s.val, 15u);
  EXPECT_EQ(s.test, 15u);
  const auto t = chronological_split(7, 0.70, 0.15);
  EXPECT_EQ(t.train + t.val + t.test, 7u);
}

// Plain SGD at lr 1e-4 needs on the order of 10^4 samples (about 10^4 updates
// over 100 epochs) before it leaves the uniform starting point.
TEST(Metalob, OracleWithTwoRandomModels) {
  const std::size_t n = 10'000;
  const auto truth = random_labels(7, n);
  const std::vector<PredictionSet> sets{one_hot_set(truth, "ORACLE"), random_soft_set(8, n), random_soft_set(9, n)};
  const MetalobResult r = train_metalob(sets, truth, MetalobConfig{});
  EXPECT_EQ(r.split.train, 7000u);
  EXPECT_EQ(r.test_predictions.model_id, "METALOB");
  EXPECT_EQ(r.test_predictions.index.front(), r.split.train + r.split.val);
  const double oracle = f1_points(sets[0], truth, r.split.train + r.split.val);
  EXPECT_DOUBLE_EQ(oracle, 100.0);
  EXPECT_GE(100 * r.test_metrics.f1, oracle - 2);
  EXPECT_NEAR(f1_points(r.test_predictions, truth, 0), 100 * r.test_metrics.f1, 1e-9);
}

TEST(Metalob, IdenticalModelsMatchTheirSource) {
  const std::size_t n = 10'000;
  const auto truth = random_labels(10, n);
  // A 70%-accurate base model, copied three times.
  CounterRng rng(11);
  std::vector<TrendLabel> noisy = truth;
  for (auto& l : noisy) {
    if (rng.uniform() < 0.3) l = static_cast<TrendLabel>(rng.below(3));
  }
  PredictionSet base = one_hot_set(noisy, "BASE");
  for (auto& p : base.probs) {
    for (double& v : p) v = 0.1 + 0.7 * v;
  }
  const std::vector<PredictionSet> sets{base, base, base};
  const MetalobResult r = train_metalob(sets, truth, MetalobConfig{});
  const double source = f1_points(base, truth, r.split.train + r.split.val);
  EXPECT_NEAR(100 * r.test_metrics.f1, source, 1.0);
}

TEST(Metalob, ApplyMatchesHeldOutPredictions) {
  const std::size_t n = 400;
  const auto truth = random_labels(12, n);
  const std::vector<PredictionSet> sets{one_hot_set(truth), random_soft_set(13, n)};
  MetalobConfig cfg;
  cfg.train.epochs = 5;
  const MetalobResult r = train_metalob(sets, truth, cfg);
  const PredictionSet all = apply_metalob(r.model, sets);
  ASSERT_EQ(all.size(), n);
  const std::size_t off = r.split.train + r.split.val;
  for (std::size_t i = 0; i < r.test_predictions.size(); ++i) {
    EXPECT_EQ(all.probs[off + i], r.test_predictions.probs[i]);
  }
}

#include <gtest/gtest.h>

#include <cmath>

#include "lobtrend/error.hpp"
#include "lobtrend/labeling.hpp"
#include "lobtrend/rng.hpp"

using namespace lobtrend;

namespace {

std::vector<double> random_walk(std::uint64_t seed, std::size_t n, double vol = 0.002) {
  CounterRng rng(seed);
  std::vector<double> m{100.0};
  for (std::size_t i = 1; i < n; ++i) m.push_back(m.back() * (1.0 + vol * (2 * rng.uniform() - 1)));
  return m;
}

std::array<std::size_t, 3> counts(const std::vector<TrendLabel>& labels) {
  std::array<std::size_t, 3> c{};
  for (auto l : labels) ++c[index_of(l)];
  return c;
}

double imbalance_at(std::span<const double> mids, int k, double theta) {
  return class_distribution(label_series(mids, {k, theta})).imbalance();
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

}  // namespace

TEST(Label, UpAboveBand) {
  const std::vector<double> m{100.0, 100.30};
  EXPECT_EQ(label(m, 0, {1, 0.002}), TrendLabel::Up);
}

TEST(Label, BoundaryIsStationary) {
  const std::vector<double> up{100.0, 100.20};
  const std::vector<double> down{100.0, 99.80};
  EXPECT_EQ(label(up, 0, {1, 0.002}), TrendLabel::Stationary);
  EXPECT_EQ(label(down, 0, {1, 0.002}), TrendLabel::Stationary);
  const std::vector<double> below{100.0, 99.79};
  EXPECT_EQ(label(below, 0, {1, 0.002}), TrendLabel::Down);
}

TEST(FutureAverage, MeanOfNextK) {
  const std::vector<double> m{1, 2, 3, 4, 5, 6};
  EXPECT_DOUBLE_EQ(future_avg_mid(m, 0, 1), 2.0);
  EXPECT_DOUBLE_EQ(future_avg_mid(m, 1, 4), 4.5);
  EXPECT_EQ(code_of([&] { future_avg_mid(m, 2, 4); }), Errc::HorizonOutOfBounds);
  EXPECT_EQ(label_series(m, {5, 0.002}).size(), 1u);
  EXPECT_TRUE(label_series(m, {6, 0.002}).empty());
}

TEST(Distribution, Shares) {
  const std::vector<TrendLabel> l{TrendLabel::Up, TrendLabel::Up, TrendLabel::Stationary, TrendLabel::Down};
  const auto d = class_distribution(l);
  EXPECT_DOUBLE_EQ(d.shares[0], 50.0);
  EXPECT_DOUBLE_EQ(d.shares[1], 25.0);
  EXPECT_DOUBLE_EQ(d.shares[2], 25.0);
  EXPECT_EQ(d.total, 4u);
  EXPECT_EQ(code_of([] { class_distribution({}); }), Errc::EmptyInput);
}

TEST(Distribution, UniformDrawsNearThirds) {
  CounterRng rng(77);
  std::vector<TrendLabel> l(30'000);
  for (auto& x : l) x = kAllLabels[rng.below(3)];
  const auto d = class_distribution(l);
  double sum = 0;
  for (double s : d.shares) {
    EXPECT_NEAR(s, 100.0 / 3, 2.0);
    sum += s;
  }
  EXPECT_NEAR(sum, 100.0, 1e-9);
}

TEST(BalanceThreshold, AlternatingSeries) {
  const double delta = 0.5;
  std::vector<double> m;
  for (int i = 0; i < 400; ++i) m.push_back(i % 2 ? 100 - delta : 100 + delta);
  const auto r = balance_threshold(m, 1);
  EXPECT_LT(r.theta, delta / 100.0);
  EXPECT_NEAR(r.distribution.shares[0], 50, 0.5);
  EXPECT_NEAR(r.distribution.shares[1], 0, 0.5);
  EXPECT_NEAR(r.distribution.shares[2], 50, 0.5);
  // Exhaustive grid: nothing beats the returned threshold.
  const double best = imbalance_at(m, 1, r.theta);
  for (double th = 1e-6; th < 0.05; th *= 1.01) EXPECT_GE(imbalance_at(m, 1, th), best - 1e-12);
}

TEST(BalanceThreshold, ConstructedExactThirds) {
  // Equal numbers of +0.2%, -0.2% and +-0.05% steps: any theta in
  // [0.0005, 0.002) balances exactly.
  CounterRng rng(5);
  std::vector<double> steps;
  for (int i = 0; i < 300; ++i) {
    steps.push_back(0.002);
    steps.push_back(-0.002);
    steps.push_back(i % 2 ? 0.0005 : -0.0005);
  }
  rng.shuffle(std::span(steps));
  std::vector<double> m{100.0};
  for (double s : steps) m.push_back(m.back() * (1 + s));
  const auto r = balance_threshold(m, 1);
  EXPECT_GT(r.theta, 0.0005);
  EXPECT_LT(r.theta, 0.002);
  for (double s : r.distribution.shares) EXPECT_NEAR(s, 100.0 / 3, 1e-9);
  EXPECT_EQ(label_series(m, {1, 0.001}), label_series(m, {1, r.theta}));
}

TEST(BalanceThreshold, RandomSeriesMatchesExhaustiveGrid) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_walk(seed, 600, 0.003);
    for (int k : {1, 5}) {
      const auto r = balance_threshold(m, k);
      const double best = imbalance_at(m, k, r.theta);
      EXPECT_NEAR(best, r.distribution.imbalance(), 1e-12);
      for (double th = 1e-6; th < 0.05; th *= 1.003) ASSERT_GE(imbalance_at(m, k, th), best - 1e-12) << th;
    }
  }
}

TEST(BalanceThreshold, Errors) {
  const std::vector<double> flat(100, 42.0);
  EXPECT_EQ(code_of([&] { balance_threshold(flat, 1); }), Errc::DegenerateSeries);
  const std::vector<double> tiny{1, 2, 3};
  EXPECT_EQ(code_of([&] { balance_threshold(tiny, 1); }), Errc::SeriesTooShort);
}

TEST(BalanceThreshold, SegmentsNeverLabelAcrossEnds) {
  const auto a = random_walk(1, 300, 0.003);
  auto b = random_walk(2, 300, 0.003);
  for (double& x : b) x *= 3;  // a level jump between segments
  const std::span<const double> parts[] = {a, b};
  const auto r = balance_threshold(parts, 2);
  EXPECT_EQ(r.distribution.total, (a.size() - 2) + (b.size() - 2));
}

TEST(LabelProperties, MonotoneInTheta) {
  const auto m = random_walk(9, 2000, 0.004);
  for (int k : {1, 3, 10}) {
    auto prev = counts(label_series(m, {k, 1e-5}));
    for (double th = 2e-5; th < 0.02; th *= 1.5) {
      const auto cur = counts(label_series(m, {k, th}));
      EXPECT_GE(cur[1], prev[1]);
      EXPECT_LE(cur[0], prev[0]);
      EXPECT_LE(cur[2], prev[2]);
      prev = cur;
    }
  }
}

TEST(LabelProperties, MirrorSwapsUpAndDown) {
  const auto m = random_walk(10, 1500, 0.004);
  for (int k : {1, 2, 5, 10}) {
    const LabelParams p{k, 0.002};
    for (std::size_t t = 0; t + k < m.size(); ++t) {
      std::vector<double> mirror(m.begin() + t, m.begin() + t + k + 1);
      for (std::size_t i = 1; i < mirror.size(); ++i) mirror[i] = 2 * mirror[0] - mirror[i];
      const TrendLabel a = label(m, t, p);
      const TrendLabel b = label(mirror, 0, p);
      const TrendLabel swapped = a == TrendLabel::Up ? TrendLabel::Down : a == TrendLabel::Down ? TrendLabel::Up : a;
      ASSERT_EQ(b, swapped) << "k=" << k << " t=" << t;
    }
  }
}

TEST(LabelProperties, ScaleInvariant) {
  const auto m = random_walk(12, 3000, 0.004);
  for (double c : {2.0, 0.25, 3.7, 1e3}) {
    std::vector<double> s(m);
    for (double& x : s) x *= c;
    for (int k : {1, 5, 10}) EXPECT_EQ(label_series(m, {k, 0.002}), label_series(s, {k, 0.002})) << c;
  }
}

#include <gtest/gtest.h>

#include <cmath>

#include "lobtrend/dataset.hpp"
#include "lobtrend/error.hpp"
#include "lobtrend/rng.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace lobtrend;
using namespace testing_support;

namespace {

/// One-level records around a random-walk mid (cent grid), random volumes.
std::vector<LobRecord> walk_records(std::uint64_t seed, std::size_t n, int levels = 1) {
  CounterRng rng(seed);
  std::vector<LobRecord> out;
  PriceTicks mid = 1'000'000;  // $100, on a half-cent grid so the mid is exact
  for (std::size_t i = 0; i < n; ++i) {
    mid += 50 * (static_cast<PriceTicks>(rng.below(9)) - 4);
    LobRecord r;
    r.t = i;
    r.levels = levels;
    r.complete = true;
    for (int l = 0; l < levels; ++l) {
      r.features.push_back(mid + 50 + 100 * l);
      r.features.push_back(1 + static_cast<std::int64_t>(rng.below(500)));
      r.features.push_back(mid - 50 - 100 * l);
      r.features.push_back(1 + static_cast<std::int64_t>(rng.below(500)));
    }
    out.push_back(r);
  }
  return out;
}

LobRecord flat_record(PriceTicks price, std::int64_t volume) {
  LobRecord r;
  r.levels = 1;
  r.complete = true;
  r.features = {price, volume, price, volume};
  return r;
}


std::vector<std::string> dates(std::size_t n) {
  std::vector<std::string> d;
  for (std::size_t i = 0; i < n; ++i) d.push_back("2024-01-" + std::string(i + 1 < 10 ? "0" : "") + std::to_string(i + 1));
  return d;
}

DatasetBundle tiny_bundle(const std::string& stock, std::size_t train_n, int window = 3, std::uint64_t seed = 1) {
  DatasetBundle b;
  b.meta.window = window;
  b.meta.levels = 1;
  b.meta.horizon = 2;
  b.meta.stocks = {stock};
  b.meta.days = {"2024-01-02"};
  b.meta.split_days = {{{"2024-01-02"}, {}, {}}};
  const auto recs = walk_records(seed, train_n + window - 1 + 2);
  const auto stats = fit_normalization(recs);
  b.meta.stats = NormalizationStats{0, 1, 0, 1};
  b[Split::Train] = make_observations(recs, stats, window, {2, 0.0005}, Origin{0, 0, 0});
  for (Split s : {Split::Val, Split::Test}) b[s] = ObservationSet(window, 4);
  return b;
}

}  // namespace

TEST(Split, SixTwoTwo) {
  const auto d = dates(10);
  const auto a = split_by_days(d, SplitSpec::six_two_two());
  EXPECT_EQ(a[Split::Train], (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(a[Split::Val], (std::vector<std::size_t>{6, 7}));
  EXPECT_EQ(a[Split::Test], (std::vector<std::size_t>{8, 9}));
}

TEST(Split, Fi2010Mode) {
  const auto a = split_by_days(dates(10), SplitSpec::fi2010());
  EXPECT_EQ(a[Split::Train].size(), 7u);
  EXPECT_TRUE(a[Split::Val].empty());
  EXPECT_EQ(a[Split::Test], (std::vector<std::size_t>{7, 8, 9}));
  EXPECT_DOUBLE_EQ(SplitSpec::fi2010().val_fraction, 0.2);
}

TEST(Split, InsufficientDaysAndOrdering) {
  EXPECT_EQ(code_of([] { split_by_days(dates(5), SplitSpec::six_two_two()); }), Errc::InsufficientDays);
  auto d = dates(10);
  std::swap(d[0], d[1]);
  EXPECT_EQ(code_of([&] { split_by_days(d, SplitSpec::six_two_two()); }), Errc::InvalidArgument);
}

TEST(Normalization, ZeroVariance) {
  const std::vector<LobRecord> recs(5, flat_record(1'000'000, 10));
  EXPECT_EQ(code_of([&] { fit_normalization(recs); }), Errc::ZeroVariance);
  EXPECT_EQ(code_of([] { fit_normalization(std::span<const LobRecord>{}); }), Errc::EmptyInput);
}

TEST(Normalization, TwoRecordHandComputation) {
  const std::vector<LobRecord> recs{flat_record(1'000'000, 10), flat_record(1'020'000, 30)};
  const auto s = fit_normalization(recs);
  EXPECT_DOUBLE_EQ(s.price_mean, 101.0);
  EXPECT_DOUBLE_EQ(s.price_std, 1.0);  // population: sqrt(((-1)^2 * 2 + 1^2 * 2) / 4)
  EXPECT_DOUBLE_EQ(s.volume_mean, 20.0);
  EXPECT_DOUBLE_EQ(s.volume_std, 10.0);
}

TEST(Normalization, PooledPartsEqualConcatenation) {
  const auto a = walk_records(1, 200, 10);
  const auto b = walk_records(2, 300, 10);
  std::vector<LobRecord> all(a);
  all.insert(all.end(), b.begin(), b.end());
  const std::span<const LobRecord> parts[] = {a, b};
  const auto s = fit_normalization(parts);
  const auto t = fit_normalization(all);
  EXPECT_NEAR(s.price_mean, t.price_mean, 1e-12);
  EXPECT_NEAR(s.price_std, t.price_std, 1e-12);
}

TEST(Normalization, FittedSetIsStandardized) {
  const auto recs = walk_records(3, 1000, 10);
  const auto s = fit_normalization(recs);
  const auto z = apply_zscore(recs, s);
  std::vector<double> prices, volumes;
  for (std::size_t i = 0; i < z.size(); ++i) (i % 2 == 0 ? prices : volumes).push_back(z[i]);
  auto [pm, ps] = mean_std(prices);
  auto [vm, vs] = mean_std(volumes);
  EXPECT_NEAR(pm, 0, 1e-9);
  EXPECT_NEAR(ps, 1, 1e-9);
  EXPECT_NEAR(vm, 0, 1e-9);
  EXPECT_NEAR(vs, 1, 1e-9);
}

TEST(Zscore, MeanAndOneStd) {
  const NormalizationStats s{101.0, 2.0, 20.0, 5.0};
  const std::vector<LobRecord> recs{flat_record(1'010'000, 20), flat_record(1'030'000, 25)};
  const auto z = apply_zscore(recs, s);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
  EXPECT_EQ(z[4], 1.0);
  EXPECT_EQ(z[5], 1.0);
}

TEST(Zscore, InverseRecoversInputs) {
  const auto recs = walk_records(4, 300, 10);
  const auto s = fit_normalization(recs);
  const auto z = apply_zscore(recs, s);
  const std::size_t w = 40;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto back = invert_zscore(std::span(z).subspan(i * w, w), s);
    for (std::size_t c = 0; c < w; ++c) {
      const double raw = c % 2 == 0 ? recs[i].features[c] / 1e4 : static_cast<double>(recs[i].features[c]);
      ASSERT_NEAR(back[c], raw, 1e-9 * std::abs(raw));
    }
  }
}

TEST(Observations, Counts) {
  const NormalizationStats s{100, 1, 100, 50};
  const auto r20 = walk_records(5, 20);
  EXPECT_EQ(make_observations(r20, s, 10, {5, 0.002}, {}).size(), 6u);
  const auto r15 = walk_records(5, 15);
  EXPECT_EQ(make_observations(r15, s, 10, {5, 0.002}, {}).size(), 1u);
  const auto r14 = walk_records(5, 14);
  EXPECT_EQ(code_of([&] { make_observations(r14, s, 10, {5, 0.002}, {}); }), Errc::SeriesTooShort);
}

TEST(Observations, LabelsAndWindowsMatchIndependentRecomputation) {
  const auto recs = walk_records(6, 400, 2);
  const auto stats = fit_normalization(recs);
  const int h = 12;
  const LabelParams p{4, 0.0003};
  const ObservationSet obs = make_observations(recs, stats, h, p, Origin{3, 7, 0});
  ASSERT_EQ(obs.size(), recs.size() - h - p.k + 1);
  std::vector<double> mids;
  for (const auto& r : recs) mids.push_back((r.features[0] + r.features[2]) / 2.0 / 1e4);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::size_t t = obs.origin(i).sample;
    EXPECT_EQ(obs.origin(i).stock, 3u);
    EXPECT_EQ(obs.origin(i).day, 7u);
    // Temporal integrity: window ends at t, horizon starts after it.
    ASSERT_GE(t + 1, static_cast<std::size_t>(h));
    ASSERT_LT(t + p.k, recs.size());
    double avg = 0;
    for (int j = 1; j <= p.k; ++j) avg += mids[t + j];
    avg /= p.k;
    const TrendLabel expected = avg > mids[t] * (1 + p.theta)   ? TrendLabel::Up
                                : avg < mids[t] * (1 - p.theta) ? TrendLabel::Down
                                                                : TrendLabel::Stationary;
    ASSERT_EQ(obs.label(i), expected) << t;
    const auto w = obs.window(i);
    for (int row = 0; row < h; ++row) {
      const auto& f = recs[t + 1 - h + row].features;
      for (std::size_t c = 0; c < 8; ++c) {
        const double raw = c % 2 == 0 ? f[c] / 1e4 : static_cast<double>(f[c]);
        const double z = c % 2 == 0 ? (raw - stats.price_mean) / stats.price_std
                                    : (raw - stats.volume_mean) / stats.volume_std;
        ASSERT_EQ(w[row * 8 + c], static_cast<float>(z));
      }
    }
  }
}

TEST(Observations, PrecomputedLabelOverload) {
  std::vector<double> rows(10 * 4);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<double>(i);
  std::vector<TrendLabel> labels(10, TrendLabel::Up);
  labels[9] = TrendLabel::Down;
  const auto obs = make_observations(rows, 4, labels, 3, Origin{0, 0, 100});
  ASSERT_EQ(obs.size(), 8u);
  EXPECT_EQ(obs.origin(0).sample, 102u);
  EXPECT_EQ(obs.label(7), TrendLabel::Down);
  EXPECT_EQ(obs.window(7)[0], 28.0f);
}

TEST(Stack, CountsAndOrigins) {
  const DatasetBundle a = tiny_bundle("AAA", 10, 3, 1);
  const DatasetBundle b = tiny_bundle("BBB", 5, 3, 2);
  ASSERT_EQ(a[Split::Train].size(), 10u);
  ASSERT_EQ(b[Split::Train].size(), 5u);
  const DatasetBundle bundles[] = {a, b};
  const DatasetBundle s = stack_stocks(bundles);
  ASSERT_EQ(s[Split::Train].size(), 15u);
  EXPECT_EQ(s.meta.stocks, (std::vector<std::string>{"AAA", "BBB"}));
  for (std::size_t i = 0; i < 15; ++i) {
    const bool first = i < 10;
    const ObservationSet& src = first ? a[Split::Train] : b[Split::Train];
    const std::size_t j = first ? i : i - 10;
    EXPECT_EQ(s[Split::Train].origin(i).stock, first ? 0u : 1u);
    EXPECT_EQ(s[Split::Train].origin(i).sample, src.origin(j).sample);
    EXPECT_EQ(s[Split::Train].label(i), src.label(j));
    const auto x = s[Split::Train].window(i);
    const auto y = src.window(j);
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
  }
}

TEST(Stack, MismatchedParams) {
  const DatasetBundle a = tiny_bundle("AAA", 10, 3);
  DatasetBundle b = tiny_bundle("BBB", 5, 4);
  const DatasetBundle bundles[] = {a, b};
  EXPECT_EQ(code_of([&] { stack_stocks(bundles); }), Errc::IncompatibleParams);
}

TEST(Stack, PerStockSharesSurviveStacking) {
  std::vector<DatasetBundle> parts;
  for (int s = 0; s < 3; ++s) parts.push_back(tiny_bundle("S" + std::to_string(s), 200 + 50 * s, 3, 10 + s));
  const DatasetBundle stacked = stack_stocks(parts);
  for (std::uint32_t s = 0; s < 3; ++s) {
    std::vector<TrendLabel> mine;
    for (std::size_t i = 0; i < stacked[Split::Train].size(); ++i) {
      if (stacked[Split::Train].origin(i).stock == s) mine.push_back(stacked[Split::Train].label(i));
    }
    const auto before = class_distribution(parts[s][Split::Train].labels());
    const auto after = class_distribution(mine);
    EXPECT_EQ(before.counts, after.counts);
  }
}

TEST(ObservationSet, SliceIsIndependentCopy) {
  const auto recs = walk_records(8, 50);
  const auto obs = make_observations(recs, fit_normalization(recs), 5, {2, 0.0005}, {});
  const auto part = obs.slice(10, 20);
  ASSERT_EQ(part.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(part.origin(i), obs.origin(10 + i));
    const auto a = part.window(i);
    const auto b = obs.window(10 + i);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(DaySeries, DropsIncompleteAndStrides) {
  const DayStream day = generate_synthetic(2, 3000);
  const DaySeries s = build_day_series(day, 10, 10);
  const auto snaps = replay(day.events, 10);
  const auto expected = sample_records(snaps, 10);
  ASSERT_EQ(s.records, expected);
  std::size_t complete = 0;
  for (const auto& r : snaps) complete += r.complete;
  EXPECT_EQ(s.event_mids.size(), complete);
}

TEST(DaySeries, VendorRowsMatchReplay) {
  SyntheticConfig cfg;
  cfg.record_snapshots = true;
  const DayStream day = generate_synthetic(8, 4000, cfg);
  DayStream bare = day;
  bare.vendor_snapshots.clear();
  const DaySeries a = build_day_series(day, 5, 10);
  const DaySeries b = build_day_series(bare, 5, 10);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.event_mids, b.event_mids);
}

TEST(DaySeries, OrdersRestingBeforeTheFileUseVendorRows) {
  SyntheticConfig cfg;
  cfg.record_snapshots = true;
  const DayStream full = generate_synthetic(9, 4000, cfg);
  DayStream late = full;
  const std::size_t cut = 1500;
  late.events.erase(late.events.begin(), late.events.begin() + cut);
  late.vendor_snapshots.erase(late.vendor_snapshots.begin(), late.vendor_snapshots.begin() + cut);
  DayStream bare = late;
  bare.vendor_snapshots.clear();
  EXPECT_EQ(code_of([&] { build_day_series(bare, 5, 10); }), Errc::UnknownOrderId);

  const DaySeries s = build_day_series(late, 5, 10);
  const DaySeries ref = build_day_series(full, 5, 10);
  ASSERT_LE(s.event_mids.size(), ref.event_mids.size());
  EXPECT_TRUE(std::equal(s.event_mids.begin(), s.event_mids.end(),
                         ref.event_mids.end() - static_cast<std::ptrdiff_t>(s.event_mids.size())));
}

TEST(DaySeries, VendorRowsNeedEnoughLevels) {
  SyntheticConfig cfg;
  cfg.record_snapshots = true;
  cfg.snapshot_levels = 3;
  const DayStream day = generate_synthetic(4, 500, cfg);
  EXPECT_EQ(code_of([&] { build_day_series(day, 5, 10); }), Errc::DimensionMismatch);
}

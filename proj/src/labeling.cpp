#include "lobtrend/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lobtrend/error.hpp"

namespace lobtrend {

double future_avg_mid(std::span<const double> mids, std::size_t t, int k) {
  if (k < 1) fail(Errc::InvalidArgument, "horizon must be >= 1");
  if (t + static_cast<std::size_t>(k) >= mids.size()) {
    fail(Errc::HorizonOutOfBounds, "t=" + std::to_string(t) + " k=" + std::to_string(k) + " n=" +
                                       std::to_string(mids.size()));
  }
  double sum = 0;
  for (int i = 1; i <= k; ++i) sum += mids[t + i];
  return sum / k;
}

TrendLabel label(std::span<const double> mids, std::size_t t, const LabelParams& params) {
  if (!(params.theta > 0 && params.theta < 1)) fail(Errc::InvalidArgument, "theta must lie in (0, 1)");
  const double avg = future_avg_mid(mids, t, params.k);
  const double m = mids[t];
  if (!(m > 0)) fail(Errc::InvalidArgument, "mid-price must be positive");
  if (avg > m * (1 + params.theta)) return TrendLabel::Up;
  if (avg < m * (1 - params.theta)) return TrendLabel::Down;
  return TrendLabel::Stationary;
}

std::vector<TrendLabel> label_series(std::span<const double> mids, const LabelParams& params) {
  std::vector<TrendLabel> out;
  const std::size_t k = static_cast<std::size_t>(params.k);
  if (mids.size() <= k) return out;
  out.reserve(mids.size() - k);
  for (std::size_t t = 0; t + k < mids.size(); ++t) out.push_back(label(mids, t, params));
  return out;
}

double ClassDistribution::imbalance() const {
  auto [lo, hi] = std::minmax_element(shares.begin(), shares.end());
  return *hi - *lo;
}

ClassDistribution class_distribution(std::span<const TrendLabel> labels) {
  if (labels.empty()) fail(Errc::EmptyInput, "no labels");
  ClassDistribution d;
  for (TrendLabel l : labels) ++d.counts[index_of(l)];
  d.total = labels.size();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    d.shares[c] = 100.0 * static_cast<double>(d.counts[c]) / static_cast<double>(d.total);
  }
  return d;
}

namespace {

/// Ordered breakpoints where the class counts change, with fast counting.
struct RelativeMoves {
  std::vector<double> up;    // a+/m - 1 for samples moving up, ascending
  std::vector<double> down;  // 1 - a+/m for samples moving down, ascending
  std::size_t total = 0;

  std::array<std::size_t, 3> counts(double theta) const {
    const std::size_t u = up.end() - std::upper_bound(up.begin(), up.end(), theta);
    const std::size_t d = down.end() - std::upper_bound(down.begin(), down.end(), theta);
    return {u, total - u - d, d};
  }

  double imbalance(double theta) const {
    auto c = counts(theta);
    auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    return 100.0 * static_cast<double>(*hi - *lo) / static_cast<double>(total);
  }
};

}  // namespace

BalancedThreshold balance_threshold(std::span<const double> mids, int k) {
  const std::span<const double> one[] = {mids};
  return balance_threshold(one, k);
}

BalancedThreshold balance_threshold(std::span<const std::span<const double>> segments, int k) {
  if (k < 1) fail(Errc::InvalidArgument, "horizon must be >= 1");
  const std::size_t kk = static_cast<std::size_t>(k);
  RelativeMoves moves;
  bool varies = false;
  for (const auto& mids : segments) {
    if (mids.size() <= kk) continue;
    varies = varies || std::any_of(mids.begin(), mids.end(), [&](double m) { return m != mids[0]; });
    for (std::size_t t = 0; t + kk < mids.size(); ++t) {
      const double r = future_avg_mid(mids, t, k) / mids[t] - 1.0;
      if (r > 0) moves.up.push_back(r);
      if (r < 0) moves.down.push_back(-r);
      ++moves.total;
    }
  }
  if (moves.total < 3 * kk) fail(Errc::SeriesTooShort, "need at least 3k labelled samples");
  if (!varies) fail(Errc::DegenerateSeries, "constant mid-price series");
  std::sort(moves.up.begin(), moves.up.end());
  std::sort(moves.down.begin(), moves.down.end());

  // Counts are constant between consecutive breakpoints, so scanning every
  // plateau inside the search range is exhaustive.
  std::vector<double> cuts{kThetaSearchMin, kThetaSearchMax};
  for (const auto* v : {&moves.up, &moves.down}) {
    for (double x : *v) {
      if (x > kThetaSearchMin && x < kThetaSearchMax) cuts.push_back(x);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double best_theta = 0;
  double best_imbalance = 1e300;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double theta = 0.5 * (cuts[i] + cuts[i + 1]);
    const double imb = moves.imbalance(theta);
    if (imb < best_imbalance) {
      best_imbalance = imb;
      best_theta = theta;
    }
  }

  BalancedThreshold out;
  out.theta = best_theta;
  std::vector<TrendLabel> labels;
  for (const auto& mids : segments) {
    if (mids.size() <= kk) continue;
    const auto part = label_series(mids, LabelParams{k, best_theta});
    labels.insert(labels.end(), part.begin(), part.end());
  }
  out.distribution = class_distribution(labels);
  return out;
}

}  // namespace lobtrend

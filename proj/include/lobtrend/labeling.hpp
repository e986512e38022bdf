#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lobtrend/types.hpp"

namespace lobtrend {

/// k counts sampled records; theta is a relative band in (0, 1).
struct LabelParams {
  int k = 5;
  double theta = 0.002;
};

/// Mean of the k mid-prices strictly after t. Throws HorizonOutOfBounds.
double future_avg_mid(std::span<const double> mids, std::size_t t, int k);

/// U above m(t)(1+theta), D below m(t)(1-theta), S on the closed band.
TrendLabel label(std::span<const double> mids, std::size_t t, const LabelParams& params);

/// Labels every t with a full horizon; the k trailing samples are dropped.
std::vector<TrendLabel> label_series(std::span<const double> mids, const LabelParams& params);

struct ClassDistribution {
  std::array<std::size_t, kNumClasses> counts{};
  std::array<double, kNumClasses> shares{};  // percent, indexed by TrendLabel
  std::size_t total = 0;

  double imbalance() const;  // max share - min share, percentage points
};

ClassDistribution class_distribution(std::span<const TrendLabel> labels);

struct BalancedThreshold {
  double theta = 0;
  ClassDistribution distribution;
};

inline constexpr double kThetaSearchMin = 1e-6;
inline constexpr double kThetaSearchMax = 0.05;

/// Threshold minimizing max-share minus min-share on (1e-6, 0.05). Ties go to
/// the lowest optimal plateau; the midpoint of that plateau is returned.
/// Throws DegenerateSeries for a constant series, SeriesTooShort when fewer
/// than 3k samples can be labelled.
BalancedThreshold balance_threshold(std::span<const double> mids, int k);
/// Same search over several independent series (e.g. trading days); labels
/// never look across segment ends.
BalancedThreshold balance_threshold(std::span<const std::span<const double>> segments, int k);

}  // namespace lobtrend

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lobtrend/predictions.hpp"
#include "lobtrend/types.hpp"

namespace lobtrend {

/// Rows are true classes, columns predicted classes, both indexed by TrendLabel.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const;
  std::uint64_t trace() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const TrendLabel> predicted, std::span<const TrendLabel> truth);
ConfusionMatrix confusion(const PredictionSet& preds, std::span<const TrendLabel> truth);

struct MacroMetrics {
  double accuracy = 0;
  double precision = 0;  // unweighted means over the three classes
  double recall = 0;
  double f1 = 0;
  std::array<double, kNumClasses> class_precision{};
  std::array<double, kNumClasses> class_recall{};
  std::array<double, kNumClasses> class_f1{};
  /// Set when some precision/recall denominator was zero and defined as 0.
  bool zero_division = false;
};

/// Throws EmptyMatrix for a zero total.
MacroMetrics macro_metrics(const ConfusionMatrix& cm);

/// Fraction of samples where each pair of models emits the same class.
std::vector<std::vector<double>> agreement_matrix(std::span<const PredictionSet> sets);

/// F1 (percentage points) claimed per declared horizon and observed per
/// (horizon, seed).
struct ScoreInputs {
  struct Claim {
    int horizon;
    double f1;
  };
  struct Observation {
    int horizon;
    std::uint64_t seed;
    double f1;
  };
  std::vector<Claim> claimed;
  std::vector<Observation> observed;
};

struct ReliabilityScore {
  double score = 0;
  double mean_difference = 0;  // A
  double std_difference = 0;   // S, population
  std::size_t cells = 0;
};

/// 100 - (|A| + S) over observed - claimed differences on the declared horizons
/// and all seeds. Throws NoDeclaredHorizons.
ReliabilityScore reliability_score(const ScoreInputs& inputs);

}  // namespace lobtrend

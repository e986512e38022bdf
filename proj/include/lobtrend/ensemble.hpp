#pragma once

#include <span>
#include <vector>

#include "lobtrend/metrics.hpp"
#include "lobtrend/mlp.hpp"
#include "lobtrend/predictions.hpp"
#include "lobtrend/trainer.hpp"

namespace lobtrend {

/// M prediction sets over the same samples, plus one non-negative weight per
/// model (its F1).
struct EnsembleInput {
  std::vector<PredictionSet> models;
  std::vector<double> weights;
};

/// Throws MisalignedSets unless all sets share the same index vector.
void check_aligned(std::span<const PredictionSet> sets);

/// Weighted vote over each model's argmax; ties resolve S > U > D. Output
/// triplets are one-hot, model id "MAJORITY".
PredictionSet majority_vote(const EnsembleInput& input);

/// Macro F1 of each model against `truth`, used as voting weights for one horizon.
std::vector<double> f1_weights(std::span<const PredictionSet> sets, std::span<const TrendLabel> truth);

/// Per-model mean of per-horizon weights: weights[h][m] -> result[m].
std::vector<double> global_weights(std::span<const std::vector<double>> per_horizon);

/// n x 3M row-major matrix of probability triplets in model order.
std::vector<double> build_meta_features(std::span<const PredictionSet> sets);

struct ChronologicalSplit {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// Leading fractions of n for train and val; the rest is test.
ChronologicalSplit chronological_split(std::size_t n, double train_fraction, double val_fraction);

struct MetalobConfig {
  std::size_t hidden = 64;
  double train_fraction = 0.70;
  double val_fraction = 0.15;
  TrainConfig train{1e-4, 64, 100, Optimizer::SGD, 0};
};

struct MetalobResult {
  Mlp model;
  ChronologicalSplit split;
  TrainResult training;
  MacroMetrics test_metrics;  // on the held-out tail
  PredictionSet test_predictions;  // model id "METALOB", index into the input samples
};

/// Two-layer meta classifier over stacked base-model probabilities, trained on
/// the leading 70% of samples, selected on the next 15%, scored on the rest.
MetalobResult train_metalob(std::span<const PredictionSet> sets, std::span<const TrendLabel> labels,
                            const MetalobConfig& config);

/// Applies a trained meta model to aligned base predictions.
PredictionSet apply_metalob(const Mlp& model, std::span<const PredictionSet> sets);

}  // namespace lobtrend

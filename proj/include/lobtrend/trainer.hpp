#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lobtrend/dataset.hpp"
#include "lobtrend/mlp.hpp"
#include "lobtrend/predictions.hpp"

namespace lobtrend {

enum class Optimizer { Adam, SGD, RMSprop };

std::string_view optimizer_name(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double rmsprop_alpha = 0.99;

  void validate() const;
};

/// Labeled inputs for training or inference. `gather(i, out)` writes the
/// input_dim values of sample i.
struct Samples {
  std::size_t count = 0;
  std::size_t input_dim = 0;
  std::function<void(std::size_t, double*)> gather;
  std::span<const TrendLabel> labels;
};

Samples samples_of(const ObservationSet& set);
/// Row-major count x input_dim matrix; the matrix must outlive the result.
Samples samples_of(std::span<const double> matrix, std::size_t input_dim, std::span<const TrendLabel> labels);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;  // mean over batches
  double val_f1 = 0;      // macro F1 in [0, 1]
};

struct TrainResult {
  Mlp model;  // best-validation checkpoint
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0;
};

/// Mini-batch softmax cross-entropy training from `initial`. Samples are
/// reshuffled every epoch with a stream keyed by the config seed. Throws
/// DimensionMismatch, EmptyInput or NonFiniteLoss (with epoch and batch).
TrainResult train(const Mlp& initial, const Samples& train_set, const Samples& val_set, const TrainConfig& config);

/// Builds the model with Mlp::init(model_config, config.seed) and trains it.
TrainResult train(const MlpConfig& model_config, const DatasetBundle& bundle, const TrainConfig& config);

std::vector<Probabilities> predict_probabilities(const Mlp& model, const Samples& samples);

/// Probabilities for every observation; index is the position in the set.
PredictionSet predict(const Mlp& model, const ObservationSet& set, std::string model_id, int horizon,
                      std::uint64_t seed);

struct GridCell {
  double learning_rate = 0;
  std::size_t batch_size = 0;
  bool diverged = false;
  std::string error;
  double val_f1 = 0;
  std::size_t best_epoch = 0;
};

/// One training run per (lr, batch) cell with the base seed, cells in parallel
/// on up to `workers` threads. A failing cell is marked diverged and the sweep
/// continues. Rows come back ranked by validation F1, diverged rows last.
/// `run_cell` replaces the trainer when set (used to probe failure isolation).
std::vector<GridCell> grid_search(const MlpConfig& model_config, const DatasetBundle& bundle,
                                  std::span<const double> learning_rates, std::span<const std::size_t> batch_sizes,
                                  const TrainConfig& base, std::size_t workers = 0,
                                  const std::function<TrainResult(const TrainConfig&)>& run_cell = {});

}  // namespace lobtrend

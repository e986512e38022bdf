#include "lobtrend/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lobtrend/error.hpp"
#include "lobtrend/kernels.hpp"
#include "lobtrend/metrics.hpp"
#include "lobtrend/parallel.hpp"
#include "lobtrend/rng.hpp"

namespace lobtrend {

std::string_view optimizer_name(Optimizer o) {
  switch (o) {
    case Optimizer::Adam: return "adam";
    case Optimizer::SGD: return "sgd";
    case Optimizer::RMSprop: return "rmsprop";
  }
  return "?";
}

Optimizer parse_optimizer(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "adam") return Optimizer::Adam;
  if (lower == "sgd") return Optimizer::SGD;
  if (lower == "rmsprop") return Optimizer::RMSprop;
  fail(Errc::ConfigError, "unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) fail(Errc::InvalidArgument, "learning rate must be > 0");
  if (batch_size < 1) fail(Errc::InvalidArgument, "batch size must be >= 1");
  if (epochs < 1) fail(Errc::InvalidArgument, "epochs must be >= 1");
}

Samples samples_of(const ObservationSet& set) {
  Samples s;
  s.count = set.size();
  s.input_dim = set.input_dim();
  s.labels = set.labels();
  s.gather = [&set, widen = kernels::active().widen](std::size_t i, double* out) {
    const auto w = set.window(i);
    widen(w.data(), out, w.size());
  };
  return s;
}

Samples samples_of(std::span<const double> matrix, std::size_t input_dim, std::span<const TrendLabel> labels) {
  if (input_dim == 0 || matrix.size() != labels.size() * input_dim) {
    fail(Errc::DimensionMismatch, "matrix size does not match label count x input dim");
  }
  Samples s;
  s.count = labels.size();
  s.input_dim = input_dim;
  s.labels = labels;
  s.gather = [matrix, input_dim](std::size_t i, double* out) {
    std::copy_n(matrix.data() + i * input_dim, input_dim, out);
  };
  return s;
}

namespace {

constexpr std::size_t kInferenceChunk = 256;

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& c, std::size_t n) : c_(c) {
    if (c.optimizer != Optimizer::SGD) first_.assign(n, 0.0);
    if (c.optimizer == Optimizer::Adam) second_.assign(n, 0.0);
  }

  void step(std::span<double> params, std::span<const double> grad) {
    const auto& k = kernels::active();
    switch (c_.optimizer) {
      case Optimizer::SGD:
        k.axpy(-c_.learning_rate, grad.data(), params.data(), params.size());
        break;
      case Optimizer::Adam: {
        ++t_;
        const kernels::AdamStep s{c_.learning_rate,
                                  c_.beta1,
                                  c_.beta2,
                                  c_.eps,
                                  1.0 - std::pow(c_.beta1, static_cast<double>(t_)),
                                  1.0 - std::pow(c_.beta2, static_cast<double>(t_))};
        k.adam_update(params.data(), first_.data(), second_.data(), grad.data(), params.size(), s);
        break;
      }
      case Optimizer::RMSprop: {
        const kernels::RmspropStep s{c_.learning_rate, c_.rmsprop_alpha, c_.eps};
        k.rmsprop_update(params.data(), first_.data(), grad.data(), params.size(), s);
        break;
      }
    }
  }

 private:
  TrainConfig c_;
  std::vector<double> first_;
  std::vector<double> second_;
  std::uint64_t t_ = 0;
};

double macro_f1(const Mlp& model, const Samples& samples) {
  const auto probs = predict_probabilities(model, samples);
  std::vector<TrendLabel> predicted(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) predicted[i] = argmax_label(probs[i]);
  return macro_metrics(confusion(predicted, samples.labels)).f1;
}

}  // namespace

std::vector<Probabilities> predict_probabilities(const Mlp& model, const Samples& samples) {
  if (samples.input_dim != model.config().input_dim) {
    fail(Errc::DimensionMismatch, "model expects " + std::to_string(model.config().input_dim) + " inputs, samples have " +
                                      std::to_string(samples.input_dim));
  }
  std::vector<Probabilities> out(samples.count);
  std::vector<double> buf(kInferenceChunk * samples.input_dim);
  MlpWorkspace ws;
  for (std::size_t begin = 0; begin < samples.count; begin += kInferenceChunk) {
    const std::size_t n = std::min(kInferenceChunk, samples.count - begin);
    for (std::size_t i = 0; i < n; ++i) samples.gather(begin + i, buf.data() + i * samples.input_dim);
    model.predict(std::span(buf).first(n * samples.input_dim), n, std::span(out).subspan(begin, n), ws);
  }
  return out;
}

TrainResult train(const Mlp& initial, const Samples& train_set, const Samples& val_set, const TrainConfig& config) {
  config.validate();
  const std::size_t dim = initial.config().input_dim;
  if (train_set.input_dim != dim || val_set.input_dim != dim) {
    fail(Errc::DimensionMismatch, "model expects " + std::to_string(dim) + " inputs, samples have " +
                                      std::to_string(train_set.input_dim) + "/" + std::to_string(val_set.input_dim));
  }
  if (train_set.count == 0) fail(Errc::EmptyInput, "empty training split");
  if (val_set.count == 0) fail(Errc::EmptyInput, "empty validation split");

  Mlp model = initial;
  TrainResult result{initial, {}, 0, -1.0};
  OptimizerState opt(config, model.parameters().size());
  std::vector<double> grad(model.parameters().size());
  std::vector<double> inputs(config.batch_size * dim);
  std::vector<TrendLabel> labels(config.batch_size);
  std::vector<std::size_t> order(train_set.count);
  MlpWorkspace ws;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(config.seed, 0x5eed0000ULL + epoch);
    rng.shuffle(std::span(order));

    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - begin);
      for (std::size_t i = 0; i < n; ++i) {
        train_set.gather(order[begin + i], inputs.data() + i * dim);
        labels[i] = train_set.labels[order[begin + i]];
      }
      const double loss = model.loss_and_gradient(std::span(inputs).first(n * dim), std::span(labels).first(n), grad, ws);
      if (!std::isfinite(loss)) {
        fail(Errc::NonFiniteLoss, "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches + 1));
      }
      opt.step(model.parameters(), grad);
      loss_sum += loss;
      ++batches;
    }

    const double val_f1 = macro_f1(model, val_set);
    result.history.push_back({epoch, loss_sum / static_cast<double>(batches), val_f1});
    if (val_f1 > result.best_val_f1) {
      result.best_val_f1 = val_f1;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

TrainResult train(const MlpConfig& model_config, const DatasetBundle& bundle, const TrainConfig& config) {
  const Mlp initial = Mlp::init(model_config, config.seed);
  return train(initial, samples_of(bundle[Split::Train]), samples_of(bundle[Split::Val]), config);
}

PredictionSet predict(const Mlp& model, const ObservationSet& set, std::string model_id, int horizon,
                      std::uint64_t seed) {
  PredictionSet out;
  out.model_id = std::move(model_id);
  out.horizon = horizon;
  out.seed = seed;
  out.probs = predict_probabilities(model, samples_of(set));
  out.index.resize(out.probs.size());
  std::iota(out.index.begin(), out.index.end(), 0);
  return out;
}

std::vector<GridCell> grid_search(const MlpConfig& model_config, const DatasetBundle& bundle,
                                  std::span<const double> learning_rates, std::span<const std::size_t> batch_sizes,
                                  const TrainConfig& base, std::size_t workers,
                                  const std::function<TrainResult(const TrainConfig&)>& run_cell) {
  if (learning_rates.empty() || batch_sizes.empty()) fail(Errc::InvalidArgument, "empty grid");
  std::vector<GridCell> cells;
  for (std::size_t b : batch_sizes) {
    for (double lr : learning_rates) {
      GridCell c;
      c.learning_rate = lr;
      c.batch_size = b;
      cells.push_back(c);
    }
  }
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    GridCell& cell = cells[i];
    TrainConfig cfg = base;
    cfg.learning_rate = cell.learning_rate;
    cfg.batch_size = cell.batch_size;
    try {
      const TrainResult r = run_cell ? run_cell(cfg) : train(model_config, bundle, cfg);
      cell.val_f1 = r.best_val_f1;
      cell.best_epoch = r.best_epoch;
    } catch (const Error& e) {
      cell.diverged = true;
      cell.error = e.what();
    }
  });
  std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    if (a.diverged != b.diverged) return !a.diverged;
    return a.val_f1 > b.val_f1;
  });
  return cells;
}

}  // namespace lobtrend

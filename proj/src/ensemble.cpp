#include "lobtrend/ensemble.hpp"

#include <cmath>
#include <numeric>

#include "lobtrend/error.hpp"

namespace lobtrend {

void check_aligned(std::span<const PredictionSet> sets) {
  if (sets.empty()) fail(Errc::EmptyInput, "no prediction sets");
  for (std::size_t m = 0; m < sets.size(); ++m) {
    if (sets[m].index.size() != sets[m].probs.size()) {
      fail(Errc::MisalignedSets, "model " + sets[m].model_id + " has mismatched index/probabilities");
    }
    if (m > 0 && sets[m].index != sets[0].index) {
      fail(Errc::MisalignedSets, "model " + sets[m].model_id + " is not aligned with " + sets[0].model_id);
    }
  }
}

PredictionSet majority_vote(const EnsembleInput& input) {
  check_aligned(input.models);
  if (input.weights.size() != input.models.size()) fail(Errc::InvalidArgument, "one weight per model required");
  double total = 0;
  for (double w : input.weights) {
    if (!(w >= 0) || !std::isfinite(w)) fail(Errc::InvalidArgument, "weights must be finite and >= 0");
    total += w;
  }
  if (total <= 0) fail(Errc::InvalidArgument, "weights are all zero");

  const PredictionSet& first = input.models.front();
  PredictionSet out;
  out.model_id = "MAJORITY";
  out.horizon = first.horizon;
  out.seed = first.seed;
  out.dataset_hash = first.dataset_hash;
  out.extra["tie_break"] = "S>U>D";
  out.extra["members"] = std::to_string(input.models.size());
  out.index = first.index;
  out.probs.resize(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    Probabilities score{};
    for (std::size_t m = 0; m < input.models.size(); ++m) {
      score[index_of(input.models[m].predicted(i))] += input.weights[m];
    }
    Probabilities onehot{};
    onehot[index_of(argmax_label(score))] = 1.0;
    out.probs[i] = onehot;
  }
  return out;
}

std::vector<double> f1_weights(std::span<const PredictionSet> sets, std::span<const TrendLabel> truth) {
  check_aligned(sets);
  std::vector<double> w;
  w.reserve(sets.size());
  for (const auto& s : sets) w.push_back(macro_metrics(confusion(s, truth)).f1);
  return w;
}

std::vector<double> global_weights(std::span<const std::vector<double>> per_horizon) {
  if (per_horizon.empty()) fail(Errc::EmptyInput, "no horizons");
  std::vector<double> out(per_horizon.front().size(), 0.0);
  for (const auto& row : per_horizon) {
    if (row.size() != out.size()) fail(Errc::MisalignedSets, "model count differs across horizons");
    for (std::size_t m = 0; m < row.size(); ++m) out[m] += row[m];
  }
  for (double& v : out) v /= static_cast<double>(per_horizon.size());
  return out;
}

std::vector<double> build_meta_features(std::span<const PredictionSet> sets) {
  check_aligned(sets);
  const std::size_t n = sets.front().size();
  const std::size_t width = kNumClasses * sets.size();
  std::vector<double> out(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < sets.size(); ++m) {
      for (std::size_t c = 0; c < kNumClasses; ++c) out[i * width + m * kNumClasses + c] = sets[m].probs[i][c];
    }
  }
  return out;
}

ChronologicalSplit chronological_split(std::size_t n, double train_fraction, double val_fraction) {
  if (!(train_fraction > 0) || !(val_fraction >= 0) || train_fraction + val_fraction >= 1) {
    fail(Errc::InvalidArgument, "split fractions must leave a test share");
  }
  // The epsilon keeps exact products such as 0.15 * 100 from rounding down.
  const auto part = [n](double f) { return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9)); };
  ChronologicalSplit s;
  s.train = part(train_fraction);
  s.val = part(val_fraction);
  s.test = n - s.train - s.val;
  return s;
}

namespace {

MlpConfig meta_config(std::size_t models, std::size_t hidden) {
  MlpConfig c;
  c.input_dim = kNumClasses * models;
  c.hidden = {hidden};
  return c;
}

}  // namespace

MetalobResult train_metalob(std::span<const PredictionSet> sets, std::span<const TrendLabel> labels,
                            const MetalobConfig& config) {
  check_aligned(sets);
  const std::size_t n = sets.front().size();
  if (labels.size() != n) fail(Errc::MisalignedSets, "labels do not match prediction count");
  const ChronologicalSplit split = chronological_split(n, config.train_fraction, config.val_fraction);
  if (split.train == 0 || split.val == 0 || split.test == 0) {
    fail(Errc::EmptyInput, "too few samples for a 3-way meta split: " + std::to_string(n));
  }
  const std::size_t width = kNumClasses * sets.size();
  const std::vector<double> features = build_meta_features(sets);
  auto part = [&](std::size_t begin, std::size_t count) {
    return samples_of(std::span(features).subspan(begin * width, count * width), width, labels.subspan(begin, count));
  };

  const Mlp initial = Mlp::init(meta_config(sets.size(), config.hidden), config.train.seed);
  TrainResult trained = train(initial, part(0, split.train), part(split.train, split.val), config.train);

  const std::size_t test_begin = split.train + split.val;
  const Samples test = part(test_begin, split.test);
  PredictionSet preds;
  preds.model_id = "METALOB";
  preds.horizon = sets.front().horizon;
  preds.seed = config.train.seed;
  preds.dataset_hash = sets.front().dataset_hash;
  preds.extra["members"] = std::to_string(sets.size());
  preds.probs = predict_probabilities(trained.model, test);
  preds.index.assign(sets.front().index.begin() + static_cast<std::ptrdiff_t>(test_begin), sets.front().index.end());

  MetalobResult r{trained.model, split, std::move(trained), {}, std::move(preds)};
  r.test_metrics = macro_metrics(confusion(r.test_predictions, labels.subspan(test_begin)));
  return r;
}

PredictionSet apply_metalob(const Mlp& model, std::span<const PredictionSet> sets) {
  check_aligned(sets);
  const std::size_t width = kNumClasses * sets.size();
  if (model.config().input_dim != width) fail(Errc::DimensionMismatch, "meta model expects a different model count");
  const std::vector<double> features = build_meta_features(sets);
  const std::vector<TrendLabel> dummy(sets.front().size(), TrendLabel::Stationary);
  PredictionSet out;
  out.model_id = "METALOB";
  out.horizon = sets.front().horizon;
  out.seed = sets.front().seed;
  out.dataset_hash = sets.front().dataset_hash;
  out.index = sets.front().index;
  out.probs = predict_probabilities(model, samples_of(features, width, dummy));
  return out;
}

}  // namespace lobtrend

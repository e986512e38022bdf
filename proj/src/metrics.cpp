#include "lobtrend/metrics.hpp"

#include <cmath>
#include <string>

#include "lobtrend/error.hpp"

namespace lobtrend {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto v : row) t += v;
  }
  return t;
}

std::uint64_t ConfusionMatrix::trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

ConfusionMatrix confusion(std::span<const TrendLabel> predicted, std::span<const TrendLabel> truth) {
  if (predicted.size() != truth.size()) {
    fail(Errc::MisalignedSets, std::to_string(predicted.size()) + " predictions vs " + std::to_string(truth.size()) +
                                   " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
  return cm;
}

ConfusionMatrix confusion(const PredictionSet& preds, std::span<const TrendLabel> truth) {
  const auto predicted = preds.predicted_labels();
  return confusion(predicted, truth);
}

MacroMetrics macro_metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) fail(Errc::EmptyMatrix, "no samples");
  MacroMetrics m;
  m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto tp = static_cast<double>(cm.counts[c][c]);
    double predicted = 0, actual = 0;
    for (std::size_t o = 0; o < kNumClasses; ++o) {
      predicted += static_cast<double>(cm.counts[o][c]);
      actual += static_cast<double>(cm.counts[c][o]);
    }
    double p = 0, r = 0;
    if (predicted > 0) {
      p = tp / predicted;
    } else {
      m.zero_division = true;
    }
    if (actual > 0) {
      r = tp / actual;
    } else {
      m.zero_division = true;
    }
    m.class_precision[c] = p;
    m.class_recall[c] = r;
    m.class_f1[c] = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    m.precision += m.class_precision[c] / kNumClasses;
    m.recall += m.class_recall[c] / kNumClasses;
    m.f1 += m.class_f1[c] / kNumClasses;
  }
  return m;
}

std::vector<std::vector<double>> agreement_matrix(std::span<const PredictionSet> sets) {
  const std::size_t m = sets.size();
  std::vector<std::vector<TrendLabel>> votes;
  for (const auto& s : sets) {
    if (s.size() != sets[0].size() || s.index != sets[0].index) {
      fail(Errc::MisalignedSets, "model " + s.model_id + " is not aligned with " + sets[0].model_id);
    }
    votes.push_back(s.predicted_labels());
  }
  std::vector<std::vector<double>> out(m, std::vector<double>(m, 1.0));
  const std::size_t n = m ? sets[0].size() : 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      std::size_t same = 0;
      for (std::size_t s = 0; s < n; ++s) same += votes[i][s] == votes[j][s];
      const double f = n ? static_cast<double>(same) / static_cast<double>(n) : 1.0;
      out[i][j] = out[j][i] = f;
    }
  }
  return out;
}

ReliabilityScore reliability_score(const ScoreInputs& inputs) {
  if (inputs.claimed.empty()) fail(Errc::NoDeclaredHorizons, "no claimed horizons");
  std::vector<double> diffs;
  for (const auto& claim : inputs.claimed) {
    bool seen = false;
    for (const auto& obs : inputs.observed) {
      if (obs.horizon != claim.horizon) continue;
      diffs.push_back(obs.f1 - claim.f1);
      seen = true;
    }
    if (!seen) {
      fail(Errc::NoDeclaredHorizons, "no observations for declared horizon " + std::to_string(claim.horizon));
    }
  }
  const double n = static_cast<double>(diffs.size());
  double mean = 0;
  for (double d : diffs) mean += d;
  mean /= n;
  double var = 0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= n;
  ReliabilityScore s;
  s.mean_difference = mean;
  s.std_difference = std::sqrt(var);
  s.score = 100.0 - (std::abs(mean) + s.std_difference);
  s.cells = diffs.size();
  return s;
}

}  // namespace lobtrend

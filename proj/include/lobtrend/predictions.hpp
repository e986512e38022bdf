#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lobtrend/types.hpp"

namespace lobtrend {

inline constexpr double kSimplexTolerance = 1e-6;

/// Per-sample class probabilities of one (model, horizon, seed) run. `index`
/// is the observation index within the evaluated split, ascending.
struct PredictionSet {
  std::string model_id;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::map<std::string, std::string> extra;  // additional "# key=value" lines
  std::vector<std::size_t> index;
  std::vector<Probabilities> probs;

  std::size_t size() const { return probs.size(); }
  TrendLabel predicted(std::size_t i) const { return argmax_label(probs[i]); }
  std::vector<TrendLabel> predicted_labels() const;
};

bool is_simplex(const Probabilities& p, double tolerance = kSimplexTolerance);

/// CSV: "# model=", "# horizon=", "# seed=", "# dataset_hash=" comments, then
/// "index,p_up,p_stationary,p_down" and rows sorted by index, 9 significant digits.
void write_predictions(const PredictionSet& set, const std::filesystem::path& path);
std::string format_predictions(const PredictionSet& set);

/// Throws MissingHeader, RowProbabilityInvalid, DuplicateIndex or MalformedRow.
/// Rows are returned sorted by index.
PredictionSet read_predictions(const std::filesystem::path& path);
PredictionSet parse_predictions(std::string_view text);

}  // namespace lobtrend

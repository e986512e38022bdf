#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace lobtrend {

class Mlp;
class ObservationSet;

struct LatencyStats {
  std::size_t repetitions = 0;
  std::size_t batch = 0;
  double median_ms = 0;  // per observation
  double p95_ms = 0;
};

/// Times `infer(batch)` `repetitions` times after `warmup` untimed calls and
/// reports per-observation milliseconds (batch time / batch). Throws
/// InvalidArgument for fewer than 30 repetitions.
LatencyStats measure_latency(const std::function<void(std::size_t batch)>& infer, std::size_t batch,
                             std::size_t repetitions = 30, std::size_t warmup = 3);

/// Inference latency of `model` on the first `batch` observations of `set`.
LatencyStats measure_latency(const Mlp& model, const ObservationSet& set, std::size_t batch,
                             std::size_t repetitions = 30, std::size_t warmup = 3);

/// Nearest-rank percentile, q in [0, 100].
double percentile(std::span<const double> values, double q);

}  // namespace lobtrend

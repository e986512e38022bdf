#include "lobtrend/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "lobtrend/dataset.hpp"
#include "lobtrend/error.hpp"
#include "lobtrend/kernels.hpp"
#include "lobtrend/mlp.hpp"

namespace lobtrend {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) fail(Errc::EmptyInput, "percentile of nothing");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double rank = std::ceil(q / 100.0 * static_cast<double>(v.size()));
  const std::size_t i = rank < 1 ? 0 : static_cast<std::size_t>(rank) - 1;
  return v[std::min(i, v.size() - 1)];
}

LatencyStats measure_latency(const std::function<void(std::size_t)>& infer, std::size_t batch,
                             std::size_t repetitions, std::size_t warmup) {
  if (repetitions < 30) fail(Errc::InvalidArgument, "at least 30 repetitions required");
  if (batch < 1) fail(Errc::InvalidArgument, "batch must be >= 1");
  for (std::size_t i = 0; i < warmup; ++i) infer(batch);
  std::vector<double> ms(repetitions);
  for (auto& t : ms) {
    const auto start = std::chrono::steady_clock::now();
    infer(batch);
    const auto stop = std::chrono::steady_clock::now();
    t = std::chrono::duration<double, std::milli>(stop - start).count() / static_cast<double>(batch);
  }
  return {repetitions, batch, percentile(ms, 50), percentile(ms, 95)};
}

LatencyStats measure_latency(const Mlp& model, const ObservationSet& set, std::size_t batch, std::size_t repetitions,
                             std::size_t warmup) {
  if (set.size() < batch) fail(Errc::InvalidArgument, "batch larger than the observation set");
  if (set.input_dim() != model.config().input_dim) fail(Errc::DimensionMismatch, "model/observation dims differ");
  const auto& k = kernels::active();
  std::vector<double> inputs(batch * set.input_dim());
  std::vector<Probabilities> out(batch);
  MlpWorkspace ws;
  return measure_latency(
      [&](std::size_t b) {
        for (std::size_t i = 0; i < b; ++i) k.widen(set.window(i).data(), inputs.data() + i * set.input_dim(), set.input_dim());
        model.predict(inputs, b, out, ws);
      },
      batch, repetitions, warmup);
}

}  // namespace lobtrend

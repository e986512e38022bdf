#pragma once

// Small random inputs shared by several test files.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lobtrend/backtest.hpp"
#include "lobtrend/dataset.hpp"
#include "lobtrend/error.hpp"
#include "lobtrend/metrics.hpp"
#include "lobtrend/mlp.hpp"
#include "lobtrend/rng.hpp"

namespace testing_support {

using namespace lobtrend;

/// Sliding windows over a random arena; labels uniform unless `label_of` says otherwise.
inline ObservationSet random_set(std::uint64_t seed, std::size_t n, std::size_t window, std::size_t width,
                                 std::uint32_t stock = 0) {
  CounterRng rng(seed);
  ObservationSet s(window, width);
  std::vector<float> rows((n + window - 1) * width);
  for (float& x : rows) x = static_cast<float>(rng.uniform(-2, 2));
  const std::size_t base = s.add_rows(rows);
  for (std::size_t i = 0; i < n; ++i) {
    s.add(base + i * width, static_cast<TrendLabel>(rng.below(3)), Origin{stock, 0, i + window - 1});
  }
  return s;
}

inline DatasetBundle random_bundle(std::uint64_t seed, std::size_t n = 40, std::size_t window = 5, int levels = 2) {
  DatasetBundle b;
  b.meta.window = static_cast<int>(window);
  b.meta.levels = levels;
  b.meta.horizon = 5;
  b.meta.theta = 0.0004;
  b.meta.theta_mode = "balanced";
  b.meta.stats = NormalizationStats{100.5, 0.25, 180, 90};
  b.meta.stocks = {"AAA"};
  b.meta.days = {"2024-01-02", "2024-01-03", "2024-01-04"};
  b.meta.split_days = {{{"2024-01-02"}, {"2024-01-03"}, {"2024-01-04"}}};
  const std::size_t width = 4 * static_cast<std::size_t>(levels);
  b[Split::Train] = random_set(seed, n, window, width);
  b[Split::Val] = random_set(seed + 1, n / 2, window, width);
  b[Split::Test] = random_set(seed + 2, n / 2, window, width);
  return b;
}

inline Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

/// Independent replay of the long-only rule: returns (final equity, trade count).
struct SimOutcome {
  std::int64_t final_micros = 0;
  std::size_t trades = 0;
  std::int64_t max_position = 0;
  std::int64_t min_position = 0;
};

inline SimOutcome simulate(const std::vector<TrendLabel>& sig, const std::vector<double>& open,
                           const std::vector<double>& close, double capital, std::int64_t shares) {
  auto micros = [](double d) { return static_cast<std::int64_t>(std::llround(d * 1e6)); };
  SimOutcome o;
  std::int64_t cash = micros(capital);
  std::int64_t pos = 0;
  for (std::size_t b = 0; b + 1 < sig.size(); ++b) {
    if (pos == 0 && sig[b] == TrendLabel::Up) {
      cash -= shares * micros(open[b + 1]);
      pos = shares;
      ++o.trades;
    } else if (pos > 0 && sig[b] == TrendLabel::Down) {
      cash += pos * micros(open[b + 1]);
      pos = 0;
      ++o.trades;
    }
    o.max_position = std::max(o.max_position, pos);
    o.min_position = std::min(o.min_position, pos);
  }
  if (pos > 0) {
    cash += pos * micros(close.back());
    ++o.trades;
  }
  o.final_micros = cash;
  return o;
}

/// Reliability score recomputed in long double from a flat difference list.
inline double score_oracle(const ScoreInputs& in) {
  std::vector<long double> d;
  for (const auto& o : in.observed) {
    for (const auto& c : in.claimed) {
      if (c.horizon == o.horizon) d.push_back(static_cast<long double>(o.f1) - c.f1);
    }
  }
  long double mean = 0;
  for (auto x : d) mean += x;
  mean /= d.size();
  long double ss = 0;
  for (auto x : d) ss += (x - mean) * (x - mean);
  return static_cast<double>(100.0L - (std::fabs(mean) + std::sqrt(ss / d.size())));
}

inline ScoreInputs random_score_inputs(CounterRng& rng) {
  ScoreInputs in;
  const int horizons[] = {1, 2, 3, 5, 10};
  const std::size_t seeds = 1 + rng.below(5);
  for (int k : horizons) {
    const bool declared = rng.uniform() < 0.7 || (k == 10 && in.claimed.empty());
    const double claim = rng.uniform(30, 90);
    if (declared) in.claimed.push_back({k, claim});
    for (std::uint64_t s = 0; s < seeds; ++s) in.observed.push_back({k, s, claim + rng.uniform(-25, 10)});
  }
  return in;
}

/// Three Gaussian-free clusters separated by a wide margin along distinct axes.
struct ToySet {
  std::size_t dim = 6;
  std::vector<double> x;
  std::vector<TrendLabel> y;
};

inline ToySet separable_toy(std::uint64_t seed, std::size_t n = 300, std::size_t dim = 6) {
  ToySet t;
  t.dim = dim;
  CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % 3;
    for (std::size_t d = 0; d < dim; ++d) t.x.push_back(rng.uniform(-0.5, 0.5) + (d == c ? 3.0 : 0.0));
    t.y.push_back(static_cast<TrendLabel>(c));
  }
  return t;
}

/// Naive forward pass written from the parameter layout alone.
inline double naive_loss(const Mlp& m, std::span<const double> x, std::span<const TrendLabel> y) {
  const MlpConfig& c = m.config();
  const std::size_t batch = y.size();
  double total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> a(x.begin() + static_cast<std::ptrdiff_t>(b * c.input_dim),
                          x.begin() + static_cast<std::ptrdiff_t>((b + 1) * c.input_dim));
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
      const auto w = m.weights(l);
      const auto bias = m.bias(l);
      std::vector<double> z(m.layer_outputs(l));
      for (std::size_t o = 0; o < z.size(); ++o) {
        double s = bias[o];
        for (std::size_t i = 0; i < a.size(); ++i) s += w[o * a.size() + i] * a[i];
        const bool last = l + 1 == m.layer_count();
        const double slope = c.activation == Activation::ReLU ? 0.0 : c.leaky_slope;
        z[o] = last || s > 0 ? s : slope * s;
      }
      a = std::move(z);
    }
    const double mx = *std::max_element(a.begin(), a.end());
    double se = 0;
    for (double v : a) se += std::exp(v - mx);
    total += -(a[index_of(y[b])] - mx - std::log(se));
  }
  return total / static_cast<double>(batch);
}

struct GradientCheck {
  double worst_relative = 0;
  std::size_t checked = 0;
};

/// Central differences on every parameter of a random 10x8x3 net.
inline GradientCheck gradient_check(std::uint64_t seed, std::size_t batch = 4, double h = 1e-5) {
  MlpConfig cfg{10, {8}};
  Mlp m = Mlp::init(cfg, seed);
  CounterRng rng(seed, 1);
  std::vector<double> x(batch * cfg.input_dim);
  for (double& v : x) v = rng.uniform(-1, 1);
  std::vector<TrendLabel> y(batch);
  for (auto& l : y) l = static_cast<TrendLabel>(rng.below(3));
  std::vector<double> grad(m.parameters().size());
  MlpWorkspace ws;
  m.loss_and_gradient(x, y, grad, ws);
  GradientCheck out;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double keep = m.parameters()[i];
    m.parameters()[i] = keep + h;
    const double up = naive_loss(m, x, y);
    m.parameters()[i] = keep - h;
    const double down = naive_loss(m, x, y);
    m.parameters()[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
    out.worst_relative = std::max(out.worst_relative, std::abs(numeric - grad[i]) / denom);
    ++out.checked;
  }
  return out;
}

}  // namespace testing_support

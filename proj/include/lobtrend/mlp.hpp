#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lobtrend/types.hpp"

namespace lobtrend {

enum class Activation { ReLU, LeakyReLU };

struct MlpConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{256};
  Activation activation = Activation::LeakyReLU;
  double leaky_slope = 0.01;
  std::size_t output_dim = kNumClasses;

  /// Flattened h x 4L input, one 256-unit LeakyReLU layer, 3-way softmax.
  static MlpConfig baseline(std::size_t input_dim) { return MlpConfig{input_dim}; }

  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const MlpConfig&) const = default;
};

/// Per-thread scratch buffers for forward/backward passes.
struct MlpWorkspace {
  std::vector<std::vector<double>> pre;   // per layer, batch x width (pre-activation)
  std::vector<std::vector<double>> post;  // per layer, batch x width (activation; logits for the last)
  std::vector<std::vector<double>> delta;
  std::vector<double> input;
};

/// Fully connected classifier. All parameters live in one contiguous vector:
/// for each layer, row-major weights (out x in) followed by the bias.
class Mlp {
 public:
  explicit Mlp(MlpConfig config);  // all-zero parameters

  /// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static Mlp init(const MlpConfig& config, std::uint64_t seed);

  const MlpConfig& config() const { return config_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::size_t layer_count() const { return layers_.size(); }
  std::size_t layer_inputs(std::size_t l) const { return layers_[l].in; }
  std::size_t layer_outputs(std::size_t l) const { return layers_[l].out; }
  std::span<const double> weights(std::size_t l) const {
    return {params_.data() + layers_[l].offset, layers_[l].in * layers_[l].out};
  }
  std::span<const double> bias(std::size_t l) const {
    return {params_.data() + layers_[l].offset + layers_[l].in * layers_[l].out, layers_[l].out};
  }

  /// Softmax outputs for `batch` inputs laid out row-major in `inputs`.
  void predict(std::span<const double> inputs, std::size_t batch, std::span<Probabilities> out, MlpWorkspace& ws) const;

  /// Mean softmax cross-entropy over the batch; writes d(loss)/d(params) into `grad`.
  double loss_and_gradient(std::span<const double> inputs, std::span<const TrendLabel> labels, std::span<double> grad,
                           MlpWorkspace& ws) const;

  /// Mean cross-entropy only.
  double loss(std::span<const double> inputs, std::span<const TrendLabel> labels, MlpWorkspace& ws) const;

  bool operator==(const Mlp& other) const { return config_ == other.config_ && params_ == other.params_; }

 private:
  struct Layer {
    std::size_t in, out, offset;
  };
  void forward(std::span<const double> inputs, std::size_t batch, MlpWorkspace& ws) const;

  MlpConfig config_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
};

/// Binary model file: "LOBM", u16 version, u32 JSON length, JSON config,
/// little-endian float64 parameters, CRC32C.
void write_model(const Mlp& model, const std::filesystem::path& path);
Mlp read_model(const std::filesystem::path& path);

}  // namespace lobtrend

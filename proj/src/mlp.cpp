#include "lobtrend/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "lobtrend/checksum.hpp"
#include "lobtrend/error.hpp"
#include "lobtrend/kernels.hpp"
#include "lobtrend/rng.hpp"

namespace lobtrend {

void MlpConfig::validate() const {
  if (input_dim == 0) fail(Errc::InvalidArgument, "input_dim must be > 0");
  if (hidden.empty()) fail(Errc::InvalidArgument, "at least one hidden layer required");
  if (std::find(hidden.begin(), hidden.end(), 0u) != hidden.end()) fail(Errc::InvalidArgument, "empty hidden layer");
  if (output_dim != kNumClasses) fail(Errc::InvalidArgument, "output must be 3-way");
}

std::size_t MlpConfig::parameter_count() const {
  std::size_t total = 0;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    total += in * h + h;
    in = h;
  }
  return total + in * output_dim + output_dim;
}

Mlp::Mlp(MlpConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t in = config_.input_dim;
  std::size_t offset = 0;
  auto push = [&](std::size_t out) {
    layers_.push_back(Layer{in, out, offset});
    offset += in * out + out;
    in = out;
  };
  for (std::size_t h : config_.hidden) push(h);
  push(config_.output_dim);
  params_.assign(offset, 0.0);
}

Mlp Mlp::init(const MlpConfig& config, std::uint64_t seed) {
  Mlp m(config);
  for (std::size_t l = 0; l < m.layers_.size(); ++l) {
    const Layer& layer = m.layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    CounterRng rng(seed, l);
    double* p = m.params_.data() + layer.offset;
    for (std::size_t i = 0; i < layer.in * layer.out + layer.out; ++i) p[i] = rng.uniform(-bound, bound);
  }
  return m;
}

void Mlp::forward(std::span<const double> inputs, std::size_t batch, MlpWorkspace& ws) const {
  const auto& k = kernels::active();
  const std::size_t n_layers = layers_.size();
  ws.pre.resize(n_layers);
  ws.post.resize(n_layers);
  const double slope = config_.activation == Activation::LeakyReLU ? config_.leaky_slope : 0.0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = layers_[l];
    const double* x = l == 0 ? inputs.data() : ws.post[l - 1].data();
    const double* w = params_.data() + layer.offset;
    const double* b = w + layer.in * layer.out;
    auto& z = ws.pre[l];
    auto& a = ws.post[l];
    z.resize(batch * layer.out);
    a.resize(batch * layer.out);
    // Row-outer order keeps one weight row hot across the batch.
    for (std::size_t j = 0; j < layer.out; ++j) {
      const double* row = w + j * layer.in;
      for (std::size_t s = 0; s < batch; ++s) z[s * layer.out + j] = k.dot(row, x + s * layer.in, layer.in) + b[j];
    }
    if (l + 1 < n_layers) {
      for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0 ? z[i] : slope * z[i];
    } else {
      a = z;
    }
  }
}

namespace {

/// Softmax of one logit row; returns log-sum-exp.
double softmax_row(const double* logits, std::size_t n, double* out) {
  double mx = logits[0];
  for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, logits[c]);
  double sum = 0;
  for (std::size_t c = 0; c < n; ++c) {
    out[c] = std::exp(logits[c] - mx);
    sum += out[c];
  }
  for (std::size_t c = 0; c < n; ++c) out[c] /= sum;
  return mx + std::log(sum);
}

}  // namespace

void Mlp::predict(std::span<const double> inputs, std::size_t batch, std::span<Probabilities> out,
                  MlpWorkspace& ws) const {
  if (inputs.size() != batch * config_.input_dim || out.size() < batch) {
    fail(Errc::DimensionMismatch, "input size " + std::to_string(inputs.size()) + " for batch " +
                                      std::to_string(batch) + " x " + std::to_string(config_.input_dim));
  }
  forward(inputs, batch, ws);
  const auto& logits = ws.post.back();
  for (std::size_t s = 0; s < batch; ++s) softmax_row(logits.data() + s * kNumClasses, kNumClasses, out[s].data());
}

double Mlp::loss(std::span<const double> inputs, std::span<const TrendLabel> labels, MlpWorkspace& ws) const {
  const std::size_t batch = labels.size();
  if (inputs.size() != batch * config_.input_dim) fail(Errc::DimensionMismatch, "input/label count mismatch");
  forward(inputs, batch, ws);
  const auto& logits = ws.post.back();
  double total = 0;
  Probabilities p;
  for (std::size_t s = 0; s < batch; ++s) {
    const double lse = softmax_row(logits.data() + s * kNumClasses, kNumClasses, p.data());
    total += lse - logits[s * kNumClasses + index_of(labels[s])];
  }
  return total / static_cast<double>(batch);
}

double Mlp::loss_and_gradient(std::span<const double> inputs, std::span<const TrendLabel> labels,
                              std::span<double> grad, MlpWorkspace& ws) const {
  const std::size_t batch = labels.size();
  if (inputs.size() != batch * config_.input_dim) fail(Errc::DimensionMismatch, "input/label count mismatch");
  if (grad.size() != params_.size()) fail(Errc::DimensionMismatch, "gradient buffer size");
  const auto& k = kernels::active();
  forward(inputs, batch, ws);
  std::fill(grad.begin(), grad.end(), 0.0);

  const std::size_t n_layers = layers_.size();
  ws.delta.resize(n_layers);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0;
  {
    auto& d = ws.delta[n_layers - 1];
    d.resize(batch * kNumClasses);
    const auto& logits = ws.post.back();
    for (std::size_t s = 0; s < batch; ++s) {
      double* row = d.data() + s * kNumClasses;
      const double lse = softmax_row(logits.data() + s * kNumClasses, kNumClasses, row);
      const std::size_t y = index_of(labels[s]);
      total += lse - logits[s * kNumClasses + y];
      row[y] -= 1.0;
      for (std::size_t c = 0; c < kNumClasses; ++c) row[c] *= inv_batch;
    }
  }

  const double slope = config_.activation == Activation::LeakyReLU ? config_.leaky_slope : 0.0;
  for (std::size_t l = n_layers; l-- > 0;) {
    const Layer& layer = layers_[l];
    const double* x = l == 0 ? inputs.data() : ws.post[l - 1].data();
    const double* w = params_.data() + layer.offset;
    double* gw = grad.data() + layer.offset;
    double* gb = gw + layer.in * layer.out;
    const auto& d = ws.delta[l];
    std::vector<double>* back = nullptr;
    if (l > 0) {
      back = &ws.delta[l - 1];
      back->assign(batch * layer.in, 0.0);
    }
    for (std::size_t j = 0; j < layer.out; ++j) {
      const double* row = w + j * layer.in;
      double* grow = gw + j * layer.in;
      for (std::size_t s = 0; s < batch; ++s) {
        const double dj = d[s * layer.out + j];
        if (dj == 0.0) continue;
        k.axpy(dj, x + s * layer.in, grow, layer.in);
        gb[j] += dj;
        if (back) k.axpy(dj, row, back->data() + s * layer.in, layer.in);
      }
    }
    if (back) {
      const auto& z = ws.pre[l - 1];
      for (std::size_t i = 0; i < back->size(); ++i) (*back)[i] *= z[i] > 0 ? 1.0 : slope;
    }
  }
  return total * inv_batch;
}

// --- model file ----------------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'L', 'O', 'B', 'M'};
constexpr std::uint16_t kModelVersion = 1;

void append_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(const std::byte* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void write_model(const Mlp& model, const std::filesystem::path& path) {
  const MlpConfig& c = model.config();
  nlohmann::json j{{"input_dim", c.input_dim},
                   {"hidden", c.hidden},
                   {"activation", c.activation == Activation::ReLU ? "relu" : "leaky_relu"},
                   {"leaky_slope", c.leaky_slope},
                   {"output_dim", c.output_dim}};
  const std::string meta = j.dump();
  std::vector<std::byte> out;
  for (char ch : kModelMagic) out.push_back(static_cast<std::byte>(ch));
  out.push_back(static_cast<std::byte>(kModelVersion & 0xff));
  out.push_back(static_cast<std::byte>(kModelVersion >> 8));
  append_u32(out, static_cast<std::uint32_t>(meta.size()));
  for (char ch : meta) out.push_back(static_cast<std::byte>(ch));
  for (double p : model.parameters()) {
    const auto bits = std::bit_cast<std::uint64_t>(p);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xff));
  }
  append_u32(out, crc32c(out));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(Errc::IoError, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) fail(Errc::IoError, "write failed for " + path.string());
}

Mlp read_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) fail(Errc::IoError, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(f.tellg());
  f.seekg(0);
  std::vector<std::byte> bytes(size);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (size < 14) fail(Errc::TruncatedPayload, path.string());
  if (std::memcmp(bytes.data(), kModelMagic, 4) != 0) fail(Errc::BadMagic, "not a LOBM model file");
  if ((static_cast<unsigned>(bytes[4]) | (static_cast<unsigned>(bytes[5]) << 8)) != kModelVersion) {
    fail(Errc::VersionUnsupported, path.string());
  }
  if (crc32c(std::span(bytes).first(size - 4)) != read_u32(bytes.data() + size - 4)) {
    fail(Errc::ChecksumMismatch, path.string());
  }
  const std::size_t meta_len = read_u32(bytes.data() + 6);
  if (10 + meta_len + 4 > size) fail(Errc::TruncatedPayload, path.string());
  const char* meta_ptr = reinterpret_cast<const char*>(bytes.data() + 10);
  const auto j = nlohmann::json::parse(meta_ptr, meta_ptr + meta_len);
  MlpConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.activation = j.at("activation").get<std::string>() == "relu" ? Activation::ReLU : Activation::LeakyReLU;
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.output_dim = j.at("output_dim").get<std::size_t>();
  Mlp m(c);
  auto params = m.parameters();
  if (10 + meta_len + params.size() * 8 + 4 != size) fail(Errc::TruncatedPayload, path.string());
  const std::byte* p = bytes.data() + 10 + meta_len;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[8 * i + b]) << (8 * b);
    params[i] = std::bit_cast<double>(bits);
  }
  return m;
}

}  // namespace lobtrend

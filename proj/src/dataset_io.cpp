#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "lobtrend/checksum.hpp"
#include "lobtrend/dataset.hpp"
#include "lobtrend/error.hpp"

namespace lobtrend {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'L', 'O', 'B', 'D'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 4;

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xff));
  out.push_back(static_cast<std::byte>(v >> 8));
}

void put_u32(std::byte* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(const std::byte* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

json stats_json(const std::optional<NormalizationStats>& s) {
  if (!s) return nullptr;
  return {{"price_mean", s->price_mean}, {"price_std", s->price_std},
          {"volume_mean", s->volume_mean}, {"volume_std", s->volume_std}};
}

/// Run-length encoding of origins: consecutive samples of one stock-day.
json origin_segments(const ObservationSet& set) {
  json segs = json::array();
  std::size_t i = 0;
  while (i < set.size()) {
    const Origin& o = set.origin(i);
    std::size_t j = i + 1;
    while (j < set.size()) {
      const Origin& p = set.origin(j);
      if (p.stock != o.stock || p.day != o.day || p.sample != o.sample + (j - i)) break;
      ++j;
    }
    segs.push_back({o.stock, o.day, o.sample, j - i});
    i = j;
  }
  return segs;
}

json metadata_json(const DatasetBundle& b) {
  const DatasetMetadata& m = b.meta;
  json j;
  j["schema_version"] = 1;
  j["format"] = {{"dtype", "float32"}, {"byte_order", "little"}, {"layout", "n x window x row_width"},
                 {"labels", {{"U", 0}, {"S", 1}, {"D", 2}}}, {"checksum", "crc32c"}};
  j["horizon"] = m.horizon;
  j["theta"] = m.theta;
  j["theta_mode"] = m.theta_mode;
  j["window"] = m.window;
  j["stride"] = m.stride;
  j["levels"] = m.levels;
  j["row_width"] = 4 * m.levels;
  j["source"] = m.source;
  j["normalization"] = {{"stats", stats_json(m.stats)}, {"fitted_on", m.stats_fitted_on},
                        {"std", m.std_convention}};
  j["stocks"] = m.stocks;
  j["days"] = m.days;
  json splits = json::object();
  for (Split s : kAllSplits) {
    const ObservationSet& set = b[s];
    splits[std::string(split_name(s))] = {{"count", set.size()},
                                          {"days", m.split_days[static_cast<int>(s)]},
                                          {"origins", origin_segments(set)}};
  }
  j["splits"] = splits;
  return j;
}

}  // namespace

std::uint32_t serialize_dataset(const DatasetBundle& bundle,
                                const std::function<void(std::span<const std::byte>)>& sink) {
  const std::size_t dim = 4 * static_cast<std::size_t>(bundle.meta.levels) * static_cast<std::size_t>(bundle.meta.window);
  for (Split s : kAllSplits) {
    if (!bundle[s].empty() && bundle[s].input_dim() != dim) {
      fail(Errc::DimensionMismatch, "observation shape disagrees with metadata");
    }
  }
  Crc32c crc;
  auto emit = [&](std::span<const std::byte> bytes) {
    crc.update(bytes);
    sink(bytes);
  };

  const std::string meta = metadata_json(bundle).dump();
  std::vector<std::byte> head;
  for (char c : kMagic) head.push_back(static_cast<std::byte>(c));
  put_u16(head, kDatasetVersion);
  head.resize(head.size() + 4);
  put_u32(head.data() + 6, static_cast<std::uint32_t>(meta.size()));
  emit(head);
  emit(std::as_bytes(std::span(meta.data(), meta.size())));

  std::vector<std::byte> buf(dim * 4);
  for (Split s : kAllSplits) {
    const ObservationSet& set = bundle[s];
    for (std::size_t i = 0; i < set.size(); ++i) {
      auto w = set.window(i);
      for (std::size_t e = 0; e < dim; ++e) put_u32(buf.data() + 4 * e, std::bit_cast<std::uint32_t>(w[e]));
      emit(buf);
    }
  }
  for (Split s : kAllSplits) {
    const ObservationSet& set = bundle[s];
    std::vector<std::byte> labels(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) labels[i] = static_cast<std::byte>(index_of(set.label(i)));
    emit(labels);
  }
  const std::uint32_t value = crc.value();
  std::byte tail[4];
  put_u32(tail, value);
  sink(std::span<const std::byte>(tail, 4));
  return value;
}

std::uint32_t write_dataset(const DatasetBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  const std::uint32_t crc = serialize_dataset(bundle, [&](std::span<const std::byte> b) {
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  });
  out.close();
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
  return crc;
}

std::uint32_t dataset_checksum(const DatasetBundle& bundle) {
  return serialize_dataset(bundle, [](std::span<const std::byte>) {});
}

DatasetBundle decode_dataset(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderBytes + 4) fail(Errc::TruncatedPayload, "file shorter than header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(Errc::BadMagic, "not a LOBD file");
  const std::uint16_t version = static_cast<std::uint16_t>(static_cast<unsigned>(bytes[4]) |
                                                           (static_cast<unsigned>(bytes[5]) << 8));
  if (version != kDatasetVersion) fail(Errc::VersionUnsupported, "version " + std::to_string(version));
  const std::size_t meta_len = get_u32(bytes.data() + 6);
  if (kHeaderBytes + meta_len + 4 > bytes.size()) fail(Errc::TruncatedPayload, "metadata block exceeds file");

  auto checksum_ok = [&] {
    return crc32c(bytes.first(bytes.size() - 4)) == get_u32(bytes.data() + bytes.size() - 4);
  };

  json j;
  try {
    const char* meta_ptr = reinterpret_cast<const char*>(bytes.data() + kHeaderBytes);
    j = json::parse(meta_ptr, meta_ptr + meta_len);
  } catch (const json::exception& e) {
    if (!checksum_ok()) fail(Errc::ChecksumMismatch, "metadata unreadable and checksum mismatch");
    fail(Errc::VersionUnsupported, std::string("metadata unreadable: ") + e.what());
  }

  DatasetBundle b;
  std::array<std::size_t, 3> counts{};
  std::size_t dim = 0;
  try {
    DatasetMetadata& m = b.meta;
    m.horizon = j.at("horizon").get<int>();
    m.theta = j.at("theta").get<double>();
    m.theta_mode = j.at("theta_mode").get<std::string>();
    m.window = j.at("window").get<int>();
    m.stride = j.at("stride").get<int>();
    m.levels = j.at("levels").get<int>();
    m.source = j.at("source").get<std::string>();
    const json& norm = j.at("normalization");
    if (!norm.at("stats").is_null()) {
      const json& s = norm.at("stats");
      m.stats = NormalizationStats{s.at("price_mean").get<double>(), s.at("price_std").get<double>(),
                                   s.at("volume_mean").get<double>(), s.at("volume_std").get<double>()};
    }
    m.stats_fitted_on = norm.at("fitted_on").get<std::string>();
    m.std_convention = norm.at("std").get<std::string>();
    m.stocks = j.at("stocks").get<std::vector<std::string>>();
    m.days = j.at("days").get<std::vector<std::string>>();
    for (Split s : kAllSplits) {
      const json& sj = j.at("splits").at(std::string(split_name(s)));
      counts[static_cast<int>(s)] = sj.at("count").get<std::size_t>();
      m.split_days[static_cast<int>(s)] = sj.at("days").get<std::vector<std::string>>();
    }
    dim = 4 * static_cast<std::size_t>(m.levels) * static_cast<std::size_t>(m.window);
  } catch (const json::exception& e) {
    if (!checksum_ok()) fail(Errc::ChecksumMismatch, "metadata invalid and checksum mismatch");
    fail(Errc::VersionUnsupported, std::string("metadata schema: ") + e.what());
  }

  const std::size_t n = counts[0] + counts[1] + counts[2];
  const std::size_t expected = kHeaderBytes + meta_len + n * dim * 4 + n + 4;
  if (bytes.size() != expected) {
    fail(Errc::TruncatedPayload, std::to_string(bytes.size()) + " bytes, expected " + std::to_string(expected));
  }
  if (!checksum_ok()) fail(Errc::ChecksumMismatch, "crc32c mismatch");

  const std::byte* tensor = bytes.data() + kHeaderBytes + meta_len;
  const std::byte* labels = tensor + n * dim * 4;
  std::size_t global = 0;
  for (Split s : kAllSplits) {
    const std::size_t count = counts[static_cast<int>(s)];
    ObservationSet set(static_cast<std::size_t>(b.meta.window), 4 * static_cast<std::size_t>(b.meta.levels));
    std::vector<float> values(count * dim);
    for (std::size_t e = 0; e < values.size(); ++e) {
      values[e] = std::bit_cast<float>(get_u32(tensor + 4 * (global * dim + e)));
    }
    const std::size_t base = set.add_rows(values);
    std::vector<Origin> origins;
    for (const json& seg : j.at("splits").at(std::string(split_name(s))).at("origins")) {
      const auto stock = seg.at(0).get<std::uint32_t>();
      const auto day = seg.at(1).get<std::uint32_t>();
      const auto first = seg.at(2).get<std::uint64_t>();
      const auto len = seg.at(3).get<std::size_t>();
      for (std::size_t r = 0; r < len; ++r) origins.push_back(Origin{stock, day, first + r});
    }
    if (origins.size() != count) fail(Errc::TruncatedPayload, "origin table does not match sample count");
    for (std::size_t i = 0; i < count; ++i) {
      const auto raw = static_cast<unsigned>(labels[global + i]);
      if (raw > 2) fail(Errc::LabelOutOfRange, "label byte " + std::to_string(raw));
      set.add(base + i * dim, static_cast<TrendLabel>(raw), origins[i]);
    }
    global += count;
    b[s] = std::move(set);
  }
  return b;
}

DatasetBundle read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) fail(Errc::IoError, "read failed for " + path.string());
  return decode_dataset(bytes);
}

}  // namespace lobtrend

#include "lobtrend/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "lobtrend/error.hpp"
#include "lobtrend/kernels.hpp"

namespace lobtrend {

DaySeries build_day_series(const DayStream& day, int levels, std::size_t stride) {
  if (stride == 0) fail(Errc::InvalidArgument, "stride must be >= 1");
  DaySeries out;
  out.stock = day.symbol;
  out.date = day.date;
  std::size_t complete = 0;
  auto keep = [&](LobRecord r) {
    out.event_mids.push_back(mid_price(r));
    if (++complete % stride == 0) out.records.push_back(std::move(r));
  };

  if (day.has_vendor_snapshots()) {
    // Vendor rows already hold the book after each event, including orders that
    // rested before the file starts and so cannot be replayed.
    const std::size_t width = 4 * static_cast<std::size_t>(levels);
    for (std::size_t i = 0; i < day.vendor_snapshots.size(); ++i) {
      const LobRecord& v = day.vendor_snapshots[i];
      if (v.levels < levels) {
        fail(Errc::DimensionMismatch, "vendor rows carry " + std::to_string(v.levels) + " levels, need " +
                                          std::to_string(levels));
      }
      bool full = true;
      for (int l = 0; l < levels; ++l) {
        full = full && v.features[4 * l] != kAskSentinel && v.features[4 * l + 2] != kBidSentinel;
      }
      if (!full) continue;
      LobRecord r;
      r.t = i;
      r.levels = levels;
      r.complete = true;
      r.features.assign(v.features.begin(), v.features.begin() + static_cast<std::ptrdiff_t>(width));
      keep(std::move(r));
    }
    return out;
  }

  OrderBook book;
  for (std::size_t i = 0; i < day.events.size(); ++i) {
    book.apply(day.events[i]);
    if (book.level_count(Side::Bid) < static_cast<std::size_t>(levels) ||
        book.level_count(Side::Ask) < static_cast<std::size_t>(levels)) {
      continue;
    }
    keep(book.snapshot(levels, i));
  }
  return out;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

SplitAssignment split_by_days(std::span<const std::string> dates, const SplitSpec& spec) {
  if (dates.size() < spec.total_days()) {
    fail(Errc::InsufficientDays, std::to_string(dates.size()) + " days, split needs " +
                                     std::to_string(spec.total_days()));
  }
  if (!std::is_sorted(dates.begin(), dates.end())) fail(Errc::InvalidArgument, "days must be chronological");
  SplitAssignment a;
  std::size_t d = 0;
  for (std::size_t i = 0; i < spec.train_days; ++i) a.days[0].push_back(d++);
  for (std::size_t i = 0; i < spec.val_days; ++i) a.days[1].push_back(d++);
  for (std::size_t i = 0; i < spec.test_days; ++i) a.days[2].push_back(d++);
  return a;
}

namespace {

struct FieldMoments {
  double sum = 0;
  double sq = 0;
  std::size_t n = 0;
};

}  // namespace

NormalizationStats fit_normalization(std::span<const std::span<const LobRecord>> parts) {
  // Two passes: means first, then squared deviations.
  FieldMoments price, volume;
  for (auto part : parts) {
    for (const LobRecord& r : part) {
      for (std::size_t c = 0; c < r.features.size(); ++c) {
        FieldMoments& f = (c % 2 == 0) ? price : volume;
        f.sum += (c % 2 == 0) ? static_cast<double>(r.features[c]) / kTicksPerUnit : static_cast<double>(r.features[c]);
        ++f.n;
      }
    }
  }
  if (price.n == 0) fail(Errc::EmptyInput, "no records to fit normalization");
  const double pm = price.sum / static_cast<double>(price.n);
  const double vm = volume.sum / static_cast<double>(volume.n);
  for (auto part : parts) {
    for (const LobRecord& r : part) {
      for (std::size_t c = 0; c < r.features.size(); ++c) {
        if (c % 2 == 0) {
          const double d = static_cast<double>(r.features[c]) / kTicksPerUnit - pm;
          price.sq += d * d;
        } else {
          const double d = static_cast<double>(r.features[c]) - vm;
          volume.sq += d * d;
        }
      }
    }
  }
  NormalizationStats s;
  s.price_mean = pm;
  s.volume_mean = vm;
  s.price_std = std::sqrt(price.sq / static_cast<double>(price.n));
  s.volume_std = std::sqrt(volume.sq / static_cast<double>(volume.n));
  if (!(s.price_std > 0)) fail(Errc::ZeroVariance, "constant prices");
  if (!(s.volume_std > 0)) fail(Errc::ZeroVariance, "constant volumes");
  return s;
}

NormalizationStats fit_normalization(std::span<const LobRecord> records) {
  std::array<std::span<const LobRecord>, 1> parts{records};
  return fit_normalization(parts);
}

namespace {

void stats_rows(std::size_t width, const NormalizationStats& stats, std::vector<double>& mean,
                std::vector<double>& scale) {
  mean.resize(width);
  scale.resize(width);
  for (std::size_t c = 0; c < width; ++c) {
    mean[c] = (c % 2 == 0) ? stats.price_mean : stats.volume_mean;
    scale[c] = (c % 2 == 0) ? stats.price_std : stats.volume_std;
  }
}

}  // namespace

std::vector<double> apply_zscore(std::span<const LobRecord> records, const NormalizationStats& stats) {
  if (records.empty()) return {};
  const std::size_t width = records[0].features.size();
  std::vector<double> mean, scale;
  stats_rows(width, stats, mean, scale);
  std::vector<double> raw(width);
  std::vector<double> out(records.size() * width);
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& f = records[i].features;
    if (f.size() != width) fail(Errc::DimensionMismatch, "records with differing level counts");
    for (std::size_t c = 0; c < width; ++c) {
      raw[c] = (c % 2 == 0) ? static_cast<double>(f[c]) / kTicksPerUnit : static_cast<double>(f[c]);
    }
    k.standardize(raw.data(), mean.data(), scale.data(), out.data() + i * width, width);
  }
  return out;
}

std::vector<double> invert_zscore(std::span<const double> row, const NormalizationStats& stats) {
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    out[c] = (c % 2 == 0) ? row[c] * stats.price_std + stats.price_mean : row[c] * stats.volume_std + stats.volume_mean;
  }
  return out;
}

std::size_t ObservationSet::add_rows(std::span<const float> rows) {
  const std::size_t offset = arena_.size();
  arena_.insert(arena_.end(), rows.begin(), rows.end());
  return offset;
}

void ObservationSet::add(std::size_t offset, TrendLabel label, Origin origin) {
  if (offset + input_dim() > arena_.size()) fail(Errc::Internal, "observation window outside arena");
  offsets_.push_back(offset);
  labels_.push_back(label);
  origins_.push_back(origin);
}

void ObservationSet::append(const ObservationSet& other, const std::function<Origin(const Origin&)>& remap) {
  if (other.empty()) return;
  if (empty() && arena_.empty()) {
    window_ = other.window_;
    width_ = other.width_;
  }
  if (other.window_ != window_ || other.width_ != width_) {
    fail(Errc::IncompatibleParams, "observation shapes differ");
  }
  const std::size_t base = arena_.size();
  arena_.insert(arena_.end(), other.arena_.begin(), other.arena_.end());
  for (std::size_t i = 0; i < other.size(); ++i) {
    offsets_.push_back(base + other.offsets_[i]);
    labels_.push_back(other.labels_[i]);
    origins_.push_back(remap(other.origins_[i]));
  }
}

ObservationSet ObservationSet::slice(std::size_t begin, std::size_t end) const {
  ObservationSet out(window_, width_);
  if (begin >= end) return out;
  const std::size_t lo = *std::min_element(offsets_.begin() + begin, offsets_.begin() + end);
  const std::size_t hi = *std::max_element(offsets_.begin() + begin, offsets_.begin() + end) + input_dim();
  out.arena_.assign(arena_.begin() + lo, arena_.begin() + hi);
  for (std::size_t i = begin; i < end; ++i) {
    out.offsets_.push_back(offsets_[i] - lo);
    out.labels_.push_back(labels_[i]);
    out.origins_.push_back(origins_[i]);
  }
  return out;
}

bool ObservationSet::operator==(const ObservationSet& other) const {
  if (size() != other.size() || labels_ != other.labels_ || origins_ != other.origins_) return false;
  if (empty()) return true;
  if (window_ != other.window_ || width_ != other.width_) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    auto a = window(i);
    auto b = other.window(i);
    if (std::memcmp(a.data(), b.data(), a.size_bytes()) != 0) return false;
  }
  return true;
}

ObservationSet make_observations(std::span<const double> rows, std::size_t width, std::span<const TrendLabel> labels,
                                 int window, Origin origin_base) {
  if (window < 1) fail(Errc::InvalidArgument, "window must be >= 1");
  const std::size_t h = static_cast<std::size_t>(window);
  const std::size_t n = rows.size() / width;
  if (n < h) fail(Errc::SeriesTooShort, std::to_string(n) + " rows for window " + std::to_string(h));
  if (labels.size() < n) fail(Errc::DimensionMismatch, "fewer labels than rows");
  ObservationSet out(h, width);
  std::vector<float> narrow(rows.size());
  std::transform(rows.begin(), rows.end(), narrow.begin(), [](double v) { return static_cast<float>(v); });
  const std::size_t base = out.add_rows(narrow);
  for (std::size_t t = h - 1; t < n; ++t) {
    Origin o = origin_base;
    o.sample = origin_base.sample + t;
    out.add(base + (t + 1 - h) * width, labels[t], o);
  }
  return out;
}

ObservationSet make_observations(std::span<const LobRecord> records, const NormalizationStats& stats, int window,
                                 const LabelParams& params, Origin origin_base) {
  if (window < 1 || params.k < 1) fail(Errc::InvalidArgument, "window and horizon must be >= 1");
  const std::size_t h = static_cast<std::size_t>(window);
  const std::size_t k = static_cast<std::size_t>(params.k);
  const std::size_t n = records.size();
  if (n < h + k) {
    fail(Errc::SeriesTooShort, std::to_string(n) + " records for window " + std::to_string(h) + " + horizon " +
                                   std::to_string(k));
  }
  std::vector<double> mids(n);
  for (std::size_t i = 0; i < n; ++i) mids[i] = mid_price(records[i]);
  const std::vector<double> rows = apply_zscore(records, stats);
  const std::size_t width = records[0].features.size();

  ObservationSet out(h, width);
  // Rows past n - k only feed labels, never windows.
  std::vector<float> narrow(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>((n - k) * width));
  const std::size_t base = out.add_rows(narrow);
  for (std::size_t t = h - 1; t + k < n; ++t) {
    Origin o = origin_base;
    o.sample = origin_base.sample + t;
    out.add(base + (t + 1 - h) * width, label(mids, t, params), o);
  }
  return out;
}

DatasetBundle stack_stocks(std::span<const DatasetBundle> bundles) {
  if (bundles.empty()) fail(Errc::EmptyInput, "no bundles to stack");
  DatasetBundle out;
  const DatasetMetadata& first = bundles[0].meta;
  out.meta = first;
  out.meta.stocks.clear();
  out.meta.days.clear();
  for (auto& d : out.meta.split_days) d.clear();

  auto index_in = [](std::vector<std::string>& list, const std::string& v) {
    auto it = std::find(list.begin(), list.end(), v);
    if (it != list.end()) return static_cast<std::uint32_t>(it - list.begin());
    list.push_back(v);
    return static_cast<std::uint32_t>(list.size() - 1);
  };

  for (const DatasetBundle& b : bundles) {
    const DatasetMetadata& m = b.meta;
    if (m.horizon != first.horizon || m.theta != first.theta || m.window != first.window ||
        m.stride != first.stride || m.levels != first.levels) {
      fail(Errc::IncompatibleParams, "bundle parameters differ (k, theta, h, stride, L)");
    }
    if (m.stats != first.stats) fail(Errc::IncompatibleParams, "bundles normalized with different statistics");
    std::vector<std::uint32_t> stock_map, day_map;
    for (const auto& s : m.stocks) stock_map.push_back(index_in(out.meta.stocks, s));
    for (const auto& d : m.days) day_map.push_back(index_in(out.meta.days, d));
    for (std::size_t s = 0; s < 3; ++s) {
      for (const auto& d : m.split_days[s]) {
        auto& list = out.meta.split_days[s];
        if (std::find(list.begin(), list.end(), d) == list.end()) list.push_back(d);
      }
      out.splits[s].append(b.splits[s], [&](const Origin& o) {
        return Origin{stock_map.at(o.stock), day_map.at(o.day), o.sample};
      });
    }
  }
  for (std::size_t s = 0; s < 3; ++s) {
    if (out.splits[s].empty() && out.splits[s].window_rows() == 0) {
      out.splits[s] = ObservationSet(static_cast<std::size_t>(first.window), 4 * static_cast<std::size_t>(first.levels));
    }
  }
  return out;
}

}  // namespace lobtrend

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lobtrend/book.hpp"
#include "lobtrend/ingest.hpp"
#include "lobtrend/labeling.hpp"
#include "lobtrend/types.hpp"

namespace lobtrend {

/// Sampled, complete records of one stock-day plus the per-event mid-prices
/// (complete records only, before striding) used for OHLC bars.
struct DaySeries {
  std::string stock;
  std::string date;
  std::vector<LobRecord> records;
  std::vector<double> event_mids;
};

/// Reconstructs the book (or takes the vendor rows when the day has them),
/// drops incomplete records and samples every `stride`.
DaySeries build_day_series(const DayStream& day, int levels, std::size_t stride);

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };
inline constexpr std::array<Split, 3> kAllSplits{Split::Train, Split::Val, Split::Test};
std::string_view split_name(Split s);

enum class SplitMode {
  DayBased,  // whole days: train | val | test
  Fi2010,    // first days hold train+val, split by sample (last fraction to val)
};

struct SplitSpec {
  SplitMode mode = SplitMode::DayBased;
  std::size_t train_days = 6;
  std::size_t val_days = 2;
  std::size_t test_days = 2;
  double val_fraction = 0.2;  // Fi2010 mode only

  static SplitSpec six_two_two() { return {}; }
  static SplitSpec fi2010() { return {SplitMode::Fi2010, 7, 0, 3, 0.2}; }
  std::size_t total_days() const { return train_days + val_days + test_days; }
};

/// Day indices per split, chronological. In Fi2010 mode `train` holds the
/// train+val days and `val` is empty until observations are carved.
struct SplitAssignment {
  std::array<std::vector<std::size_t>, 3> days;
  const std::vector<std::size_t>& operator[](Split s) const { return days[static_cast<int>(s)]; }
};

/// `dates` must be chronologically ordered (ISO dates compare lexically).
SplitAssignment split_by_days(std::span<const std::string> dates, const SplitSpec& spec);

struct NormalizationStats {
  double price_mean = 0;
  double price_std = 1;
  double volume_mean = 0;
  double volume_std = 1;

  bool operator==(const NormalizationStats&) const = default;
};

/// Population statistics over every price (and every volume) entry of the
/// given records; prices in price units. Throws EmptyInput or ZeroVariance.
NormalizationStats fit_normalization(std::span<const std::span<const LobRecord>> parts);
NormalizationStats fit_normalization(std::span<const LobRecord> records);

/// z-scores each record into a row of 4L doubles (prices in price units).
std::vector<double> apply_zscore(std::span<const LobRecord> records, const NormalizationStats& stats);

/// Inverse of apply_zscore for one row.
std::vector<double> invert_zscore(std::span<const double> row, const NormalizationStats& stats);

struct Origin {
  std::uint32_t stock = 0;  // index into DatasetMetadata::stocks
  std::uint32_t day = 0;    // index into DatasetMetadata::days
  std::uint64_t sample = 0;

  bool operator==(const Origin&) const = default;
};

/// Observations of one split. Windows are h consecutive rows of a shared
/// row arena, so sliding windows over a day share storage.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(std::size_t window, std::size_t width) : window_(window), width_(width) {}

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t window_rows() const { return window_; }
  std::size_t row_width() const { return width_; }
  std::size_t input_dim() const { return window_ * width_; }

  std::span<const float> window(std::size_t i) const { return {arena_.data() + offsets_[i], input_dim()}; }
  TrendLabel label(std::size_t i) const { return labels_[i]; }
  const Origin& origin(std::size_t i) const { return origins_[i]; }
  std::span<const TrendLabel> labels() const { return labels_; }
  std::span<const Origin> origins() const { return origins_; }

  /// Appends `rows` (n x width) and returns the arena offset of its first row.
  std::size_t add_rows(std::span<const float> rows);
  /// Registers an observation whose window starts at arena offset `offset`.
  void add(std::size_t offset, TrendLabel label, Origin origin);

  /// Appends all observations of `other`, remapping origins.
  void append(const ObservationSet& other, const std::function<Origin(const Origin&)>& remap);

  /// Subset [begin, end) sharing no storage with this set.
  ObservationSet slice(std::size_t begin, std::size_t end) const;

  /// Value equality: window contents (bitwise), labels and origins.
  bool operator==(const ObservationSet& other) const;

 private:
  std::size_t window_ = 0;
  std::size_t width_ = 0;
  std::vector<float> arena_;
  std::vector<std::size_t> offsets_;
  std::vector<TrendLabel> labels_;
  std::vector<Origin> origins_;
};

struct DatasetMetadata {
  int horizon = 5;
  double theta = 0.002;
  std::string theta_mode = "fixed";  // fixed | balanced
  int window = 100;
  int stride = 10;
  int levels = kDefaultLevels;
  std::string source = "lobster";
  /// Absent when features were consumed already normalized (FI-2010).
  std::optional<NormalizationStats> stats;
  std::string stats_fitted_on = "train+val";
  std::string std_convention = "population";
  std::vector<std::string> stocks;
  std::vector<std::string> days;
  std::array<std::vector<std::string>, 3> split_days;

  bool operator==(const DatasetMetadata&) const = default;
};

struct DatasetBundle {
  DatasetMetadata meta;
  std::array<ObservationSet, 3> splits;

  ObservationSet& operator[](Split s) { return splits[static_cast<int>(s)]; }
  const ObservationSet& operator[](Split s) const { return splits[static_cast<int>(s)]; }
  bool operator==(const DatasetBundle&) const = default;
};

/// Normalizes a sampled series and cuts one observation per t with h rows of
/// history ending at t and k future samples. Labels use raw mid-prices.
/// Throws SeriesTooShort when the series has fewer than h + k records.
ObservationSet make_observations(std::span<const LobRecord> records, const NormalizationStats& stats, int window,
                                 const LabelParams& params, Origin origin_base);

/// Same windowing over already normalized rows with precomputed labels.
ObservationSet make_observations(std::span<const double> rows, std::size_t width, std::span<const TrendLabel> labels,
                                 int window, Origin origin_base);

/// Concatenates per-stock bundles split by split in the given order.
/// Throws IncompatibleParams if (k, theta, h, stride, L) differ.
DatasetBundle stack_stocks(std::span<const DatasetBundle> bundles);

// --- LOBD binary format ----------------------------------------------------------

inline constexpr std::uint16_t kDatasetVersion = 1;

/// Streams the serialized file through `sink`; returns its trailing CRC32C.
std::uint32_t serialize_dataset(const DatasetBundle& bundle,
                                const std::function<void(std::span<const std::byte>)>& sink);
std::uint32_t write_dataset(const DatasetBundle& bundle, const std::filesystem::path& path);
DatasetBundle read_dataset(const std::filesystem::path& path);
DatasetBundle decode_dataset(std::span<const std::byte> bytes);
/// CRC32C of the serialized bundle without writing it.
std::uint32_t dataset_checksum(const DatasetBundle& bundle);

}  // namespace lobtrend

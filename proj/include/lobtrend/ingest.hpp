#pragma once

#include <cstdint>
#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "lobtrend/book.hpp"
#include "lobtrend/types.hpp"

namespace lobtrend {

/// One trading day of one stock.
struct DayStream {
  std::string symbol;
  std::string date;
  std::vector<LobEvent> events;
  /// 1-based line number of each retained event in the source file (0 when generated).
  std::vector<std::size_t> source_rows;
  /// Vendor snapshots, row-aligned with `events` when present.
  std::vector<LobRecord> vendor_snapshots;

  bool has_vendor_snapshots() const { return !vendor_snapshots.empty(); }
};

/// Reads a LOBSTER message/orderbook file pair. Keeps submissions (1),
/// partial (2) and full (3) deletions and visible executions (4); hidden
/// executions, crosses and halts are dropped together with their snapshot row.
DayStream parse_lobster_day(const std::filesystem::path& message_path,
                            const std::filesystem::path& orderbook_path);

/// Writes a LOBSTER-format pair. Requires vendor snapshots.
void write_lobster_day(const DayStream& day, const std::filesystem::path& message_path,
                       const std::filesystem::path& orderbook_path);

/// Formats nanoseconds after midnight as a LOBSTER decimal timestamp.
std::string format_timestamp(std::int64_t ns);
/// Parses "34200.000123456" exactly into nanoseconds; nullopt on malformed input.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

// --- FI-2010 -----------------------------------------------------------------

inline constexpr std::size_t kFi2010Rows = 149;
inline constexpr std::size_t kFi2010LobRows = 40;
inline constexpr std::size_t kFi2010LabelRows = 5;
inline constexpr std::array<int, 5> kFi2010Horizons{1, 2, 3, 5, 10};

enum class Fi2010Split { Train, Test };

struct Fi2010Set {
  Fi2010Split split = Fi2010Split::Train;
  std::size_t samples = 0;
  /// samples x 40, row-major, level-major (P_ask, V_ask, P_bid, V_bid).
  std::vector<double> features;
  /// samples x 5; column h is the label at kFi2010Horizons[h].
  std::vector<TrendLabel> labels;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * kFi2010LobRows, kFi2010LobRows};
  }
  TrendLabel label(std::size_t i, std::size_t horizon_index) const {
    return labels[i * kFi2010LabelRows + horizon_index];
  }
  bool operator==(const Fi2010Set&) const = default;
};

/// Parses a 149-row FI-2010 matrix file (samples as columns, whitespace or comma separated).
Fi2010Set parse_fi2010(const std::filesystem::path& path, Fi2010Split split);

/// Debug writer: emits the 149-row layout with zeros in the unused feature rows.
void write_fi2010(const Fi2010Set& set, const std::filesystem::path& path);

// --- synthetic order flow ----------------------------------------------------

struct SyntheticConfig {
  std::string symbol = "SYN";
  std::string date = "2024-01-02";
  PriceTicks initial_mid = 100 * 10'000;  // $100.00
  PriceTicks tick = 100;                  // $0.01
  int seed_levels = 10;                   // initial depth per side
  double p_submission = 0.6;
  double p_deletion = 0.3;
  double p_execution = 0.1;
  int max_offset_ticks = 12;
  Shares max_size = 500;
  double fair_value_vol_ticks = 0.35;  // per-event stdev of the latent fair price
  double max_lean_ticks = 2;           // submissions anchor at mid +/- this toward the fair price
  double fair_value_pull = 0.03;       // per-event reversion of the fair price toward the book mid
  double mean_interarrival_s = 0.02;
  int snapshot_levels = kDefaultLevels;
  bool record_snapshots = false;
};

/// Streaming generator; each event is derived from a counter-based PRNG keyed
/// on (seed, event index). The generator keeps its own order-level bookkeeping
/// and can emit an independently computed top-L snapshot per event.
class SyntheticFlow {
 public:
  SyntheticFlow(std::uint64_t seed, SyntheticConfig config);
  ~SyntheticFlow();
  SyntheticFlow(SyntheticFlow&&) noexcept;
  SyntheticFlow& operator=(SyntheticFlow&&) noexcept;

  LobEvent next();
  /// Snapshot of the generator's own bookkeeping after the last event.
  LobRecord reference_snapshot() const;
  std::uint64_t emitted() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

DayStream generate_synthetic(std::uint64_t seed, std::size_t n_events, const SyntheticConfig& config = {});

}  // namespace lobtrend

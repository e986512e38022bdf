#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lobtrend/types.hpp"

namespace lobtrend {

struct OhlcBar {
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  std::size_t index = 0;
  std::size_t first_event = 0;  // span [first_event, first_event + period)

  bool operator==(const OhlcBar&) const = default;
};

/// Non-overlapping windows of `period` mids; a trailing partial window is
/// dropped. Throws EmptySeries when no full window exists.
std::vector<OhlcBar> ohlc_aggregate(std::span<const double> mids, std::size_t period);

/// Money is kept in integer micro-dollars so the accounting identity is exact.
using Micros = std::int64_t;
inline constexpr Micros kMicrosPerDollar = 1'000'000;
Micros to_micros(double dollars);
double to_dollars(Micros m);

enum class TradeAction { Buy, Sell, Liquidate };
std::string_view action_name(TradeAction a);

struct Trade {
  std::size_t bar = 0;  // bar whose price filled the order
  TradeAction action = TradeAction::Buy;
  Micros fill = 0;
  Micros equity_after = 0;
};

struct EquityCurve {
  Micros initial = 0;
  std::vector<Micros> equity;  // per bar, marked to close
  std::vector<Trade> trades;
  Micros final_equity = 0;

  double return_pct() const;
};

struct StrategyConfig {
  double capital = 10'000.0;
  std::int64_t shares_per_trade = 1;
};

/// Long-only, one position at a time: flat + U buys at the next bar's open,
/// long + D sells at the next bar's open, an open position is liquidated at
/// the final close. Throws SignalBarMismatch or InvalidArgument.
EquityCurve run_strategy(std::span<const TrendLabel> signals, std::span<const OhlcBar> bars,
                         const StrategyConfig& config = {});

/// "bar_index,action,fill_price,equity_after" rows.
std::string format_trade_log(const EquityCurve& curve);

struct ReturnSummary {
  std::string stock;
  std::size_t runs = 0;
  double min = 0;
  double median = 0;
  double max = 0;
};

/// Min / median / max of each stock's return percentages (one per seed).
/// Median of an even count is the mean of the middle pair.
std::vector<ReturnSummary> returns_report(const std::vector<std::pair<std::string, std::vector<double>>>& per_stock);
std::string format_returns_csv(std::span<const ReturnSummary> rows);
std::string format_returns_json(std::span<const ReturnSummary> rows);

}  // namespace lobtrend

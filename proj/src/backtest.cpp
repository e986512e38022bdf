#include "lobtrend/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "lobtrend/error.hpp"

namespace lobtrend {

std::vector<OhlcBar> ohlc_aggregate(std::span<const double> mids, std::size_t period) {
  if (period < 1) fail(Errc::InvalidArgument, "period must be >= 1");
  const std::size_t n_bars = mids.size() / period;
  if (n_bars == 0) fail(Errc::EmptySeries, std::to_string(mids.size()) + " mids for period " + std::to_string(period));
  std::vector<OhlcBar> bars(n_bars);
  for (std::size_t b = 0; b < n_bars; ++b) {
    const auto w = mids.subspan(b * period, period);
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    bars[b] = OhlcBar{w.front(), *hi, *lo, w.back(), b, b * period};
  }
  return bars;
}

Micros to_micros(double dollars) { return static_cast<Micros>(std::llround(dollars * kMicrosPerDollar)); }
double to_dollars(Micros m) { return static_cast<double>(m) / kMicrosPerDollar; }

std::string_view action_name(TradeAction a) {
  switch (a) {
    case TradeAction::Buy: return "BUY";
    case TradeAction::Sell: return "SELL";
    case TradeAction::Liquidate: return "LIQUIDATE";
  }
  return "?";
}

double EquityCurve::return_pct() const {
  return 100.0 * static_cast<double>(final_equity - initial) / static_cast<double>(initial);
}

EquityCurve run_strategy(std::span<const TrendLabel> signals, std::span<const OhlcBar> bars,
                         const StrategyConfig& config) {
  if (signals.size() != bars.size()) {
    fail(Errc::SignalBarMismatch, std::to_string(signals.size()) + " signals for " + std::to_string(bars.size()) + " bars");
  }
  if (!(config.capital > 0)) fail(Errc::InvalidArgument, "capital must be > 0");
  if (config.shares_per_trade < 1) fail(Errc::InvalidArgument, "shares per trade must be >= 1");

  EquityCurve curve;
  curve.initial = to_micros(config.capital);
  Micros cash = curve.initial;
  std::int64_t shares = 0;
  const std::int64_t q = config.shares_per_trade;
  curve.equity.reserve(bars.size());

  // A signal observed at bar b executes at bar b+1's open.
  enum class Pending { None, Buy, Sell } pending = Pending::None;
  for (std::size_t b = 0; b < bars.size(); ++b) {
    const Micros open = to_micros(bars[b].open);
    const Micros close = to_micros(bars[b].close);
    if (pending == Pending::Buy) {
      cash -= q * open;
      shares = q;
      curve.trades.push_back({b, TradeAction::Buy, open, cash + shares * open});
    } else if (pending == Pending::Sell) {
      cash += shares * open;
      shares = 0;
      curve.trades.push_back({b, TradeAction::Sell, open, cash});
    }
    pending = Pending::None;
    if (shares == 0 && signals[b] == TrendLabel::Up) pending = Pending::Buy;
    if (shares > 0 && signals[b] == TrendLabel::Down) pending = Pending::Sell;
    curve.equity.push_back(cash + shares * close);
  }
  if (shares > 0) {
    const Micros close = to_micros(bars.back().close);
    cash += shares * close;
    shares = 0;
    curve.trades.push_back({bars.size() - 1, TradeAction::Liquidate, close, cash});
  }
  curve.final_equity = bars.empty() ? curve.initial : cash;
  return curve;
}

std::string format_trade_log(const EquityCurve& curve) {
  std::string out = "bar_index,action,fill_price,equity_after\n";
  char buf[128];
  for (const Trade& t : curve.trades) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.6f\n", t.bar, std::string(action_name(t.action)).c_str(),
                  to_dollars(t.fill), to_dollars(t.equity_after));
    out += buf;
  }
  return out;
}

std::vector<ReturnSummary> returns_report(const std::vector<std::pair<std::string, std::vector<double>>>& per_stock) {
  if (per_stock.empty()) fail(Errc::EmptyInput, "no return series");
  std::vector<ReturnSummary> out;
  for (const auto& [stock, returns] : per_stock) {
    if (returns.empty()) fail(Errc::EmptyInput, "no runs for " + stock);
    std::vector<double> v = returns;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    out.push_back({stock, n, v.front(), median, v.back()});
  }
  return out;
}

std::string format_returns_csv(std::span<const ReturnSummary> rows) {
  std::string out = "stock,runs,min_return_pct,median_return_pct,max_return_pct\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f\n", r.stock.c_str(), r.runs, r.min, r.median, r.max);
    out += buf;
  }
  return out;
}

std::string format_returns_json(std::span<const ReturnSummary> rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"stock", r.stock}, {"runs", r.runs}, {"min_return_pct", r.min}, {"median_return_pct", r.median},
                 {"max_return_pct", r.max}});
  }
  return j.dump(2);
}

}  // namespace lobtrend

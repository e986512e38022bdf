#include "lobtrend/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "lobtrend/error.hpp"
#include "lobtrend/rng.hpp"

namespace lobtrend {

// The generator tracks individual resting orders per price level in its own
// structures, sharing no code with OrderBook, so its snapshot is an
// independent reference.
struct SyntheticFlow::State {
  std::uint64_t seed;
  SyntheticConfig cfg;
  std::uint64_t index = 0;
  OrderId next_id = 1;
  std::int64_t clock_ns = 34'200LL * 1'000'000'000LL;  // 09:30
  double fair = 0;

  struct Order {
    Side side;
    PriceTicks price;
    Shares remaining;
    std::size_t slot;  // position in `live`
  };
  // Time-ordered queue of one price; `total` is kept alongside because the
  // order count grows with the stream and summing queues per event is quadratic.
  struct Level {
    std::vector<OrderId> queue;
    Shares total = 0;
  };
  std::unordered_map<OrderId, Order> orders;
  std::vector<OrderId> live;
  std::map<PriceTicks, Level, std::greater<>> bid_levels;
  std::map<PriceTicks, Level> ask_levels;

  std::optional<PriceTicks> best(Side s) const {
    if (s == Side::Bid) return bid_levels.empty() ? std::nullopt : std::optional(bid_levels.begin()->first);
    return ask_levels.empty() ? std::nullopt : std::optional(ask_levels.begin()->first);
  }

  void add(OrderId id, Side side, PriceTicks price, Shares size) {
    orders.emplace(id, Order{side, price, size, live.size()});
    live.push_back(id);
    if (side == Side::Bid) {
      auto& lv = bid_levels[price];
      lv.queue.push_back(id);
      lv.total += size;
    } else {
      auto& lv = ask_levels[price];
      lv.queue.push_back(id);
      lv.total += size;
    }
  }

  void reduce(OrderId id, Shares amount) {
    auto it = orders.find(id);
    Order& o = it->second;
    const Shares taken = std::min(amount, o.remaining);
    o.remaining -= taken;
    auto update = [&](auto& levels) {
      auto lv = levels.find(o.price);
      lv->second.total -= taken;
      if (o.remaining > 0) return;
      auto& queue = lv->second.queue;
      queue.erase(std::find(queue.begin(), queue.end(), id));
      if (queue.empty()) levels.erase(lv);
    };
    if (o.side == Side::Bid) {
      update(bid_levels);
    } else {
      update(ask_levels);
    }
    if (o.remaining > 0) return;
    const std::size_t slot = o.slot;
    const OrderId moved = live.back();
    live[slot] = moved;
    orders[moved].slot = slot;
    live.pop_back();
    orders.erase(id);
  }

  PriceTicks submission_price(Side side, CounterRng& rng) const {
    const PriceTicks tick = cfg.tick;
    // Offsets concentrate near the touch.
    const double u = rng.uniform();
    const PriceTicks offset = static_cast<PriceTicks>(u * u * cfg.max_offset_ticks);
    // Anchor at the book mid, leaning at most two ticks toward the latent value.
    double anchor = fair;
    const double lean_ticks = cfg.max_lean_ticks;
    const auto bid = best(Side::Bid);
    const auto ask = best(Side::Ask);
    if (bid && ask) {
      const double mid = 0.5 * static_cast<double>(*bid + *ask);
      anchor = mid + std::clamp(fair - mid, -lean_ticks * tick, lean_ticks * tick);
    }
    const PriceTicks fair_ticks = static_cast<PriceTicks>(std::llround(anchor / tick)) * tick;
    if (side == Side::Bid) {
      PriceTicks p = fair_ticks - tick * (1 + offset);
      if (auto a = best(Side::Ask)) p = std::min(p, *a - tick);
      return std::max(p, tick);
    }
    PriceTicks p = fair_ticks + tick * (1 + offset);
    if (auto b = best(Side::Bid)) p = std::max(p, *b + tick);
    return p;
  }
};

SyntheticFlow::SyntheticFlow(std::uint64_t seed, SyntheticConfig config) : state_(std::make_unique<State>()) {
  state_->seed = seed;
  state_->cfg = std::move(config);
  state_->fair = static_cast<double>(state_->cfg.initial_mid);
}

SyntheticFlow::~SyntheticFlow() = default;
SyntheticFlow::SyntheticFlow(SyntheticFlow&&) noexcept = default;
SyntheticFlow& SyntheticFlow::operator=(SyntheticFlow&&) noexcept = default;

std::uint64_t SyntheticFlow::emitted() const { return state_->index; }

LobEvent SyntheticFlow::next() {
  State& s = *state_;
  const SyntheticConfig& cfg = s.cfg;
  CounterRng rng(s.seed, s.index);
  LobEvent e;
  s.clock_ns += static_cast<std::int64_t>(rng.exponential(cfg.mean_interarrival_s) * 1e9);
  e.timestamp_ns = s.clock_ns;

  const std::uint64_t seed_events = 2 * static_cast<std::uint64_t>(cfg.seed_levels);
  if (s.index < seed_events) {
    // Initial ladder: alternate bid/ask, one level further out each pair.
    const PriceTicks level = static_cast<PriceTicks>(s.index / 2) + 1;
    e.kind = EventKind::Submission;
    e.side = (s.index % 2 == 0) ? Side::Bid : Side::Ask;
    e.price = cfg.initial_mid + (e.side == Side::Bid ? -level : level) * cfg.tick;
    e.size = 1 + static_cast<Shares>(rng.below(static_cast<std::uint64_t>(cfg.max_size)));
    e.order_id = s.next_id++;
    s.add(e.order_id, e.side, e.price, e.size);
    ++s.index;
    return e;
  }

  // Latent fair value random walk; aggressive flow follows it.
  s.fair += cfg.fair_value_vol_ticks * cfg.tick * (2.0 * rng.uniform() - 1.0) * std::sqrt(3.0);
  if (auto b = s.best(Side::Bid), a = s.best(Side::Ask); b && a) {
    s.fair += cfg.fair_value_pull * (0.5 * static_cast<double>(*b + *a) - s.fair);
  }

  const double u = rng.uniform();
  EventKind kind = EventKind::Submission;
  if (u >= cfg.p_submission) {
    kind = (u < cfg.p_submission + cfg.p_deletion) ? EventKind::Deletion : EventKind::Execution;
  }

  if (kind == EventKind::Execution) {
    const auto bid = s.best(Side::Bid);
    const auto ask = s.best(Side::Ask);
    Side hit;
    if (bid && ask) {
      const double mid = 0.5 * static_cast<double>(*bid + *ask);
      const double p_hit_ask = s.fair > mid ? 0.8 : (s.fair < mid ? 0.2 : 0.5);
      hit = rng.uniform() < p_hit_ask ? Side::Ask : Side::Bid;
    } else if (bid) {
      hit = Side::Bid;
    } else if (ask) {
      hit = Side::Ask;
    } else {
      kind = EventKind::Submission;
      hit = Side::Bid;
    }
    if (kind == EventKind::Execution) {
      const auto& ids = hit == Side::Bid ? s.bid_levels.begin()->second.queue : s.ask_levels.begin()->second.queue;
      const OrderId id = ids.front();  // oldest order at the touch
      const auto& o = s.orders.at(id);
      e.kind = kind;
      e.order_id = id;
      e.side = o.side;
      e.price = o.price;
      e.size = rng.uniform() < 0.5 ? o.remaining : 1 + static_cast<Shares>(rng.below(static_cast<std::uint64_t>(o.remaining)));
      s.reduce(id, e.size);
      ++s.index;
      return e;
    }
  }

  if (kind == EventKind::Deletion && !s.live.empty()) {
    OrderId id;
    if (rng.uniform() < 0.5) {
      id = s.live[rng.below(s.live.size())];
    } else {
      // Cancellation at the touch, mostly on the side the latent value moves toward.
      double p_bid = 0.5;
      if (!s.bid_levels.empty() && !s.ask_levels.empty()) {
        const double mid = 0.5 * static_cast<double>(*s.best(Side::Bid) + *s.best(Side::Ask));
        p_bid = s.fair < mid ? 0.8 : (s.fair > mid ? 0.2 : 0.5);
      }
      const bool use_bid = !s.bid_levels.empty() && (s.ask_levels.empty() || rng.uniform() < p_bid);
      const auto& ids = use_bid ? s.bid_levels.begin()->second.queue : s.ask_levels.begin()->second.queue;
      id = ids[rng.below(ids.size())];
    }
    const auto& o = s.orders.at(id);
    e.kind = EventKind::Deletion;
    e.order_id = id;
    e.side = o.side;
    e.price = o.price;
    if (o.remaining > 1 && rng.uniform() < 0.3) {
      e.size = 1 + static_cast<Shares>(rng.below(static_cast<std::uint64_t>(o.remaining - 1)));
    } else {
      e.size = o.remaining;
    }
    s.reduce(id, e.size);
    ++s.index;
    return e;
  }

  e.kind = EventKind::Submission;
  e.side = rng.uniform() < 0.5 ? Side::Bid : Side::Ask;
  e.price = s.submission_price(e.side, rng);
  e.size = 1 + static_cast<Shares>(rng.below(static_cast<std::uint64_t>(cfg.max_size)));
  e.order_id = s.next_id++;
  s.add(e.order_id, e.side, e.price, e.size);
  ++s.index;
  return e;
}

LobRecord SyntheticFlow::reference_snapshot() const {
  const State& s = *state_;
  const int levels = s.cfg.snapshot_levels;
  LobRecord r;
  r.t = s.index == 0 ? 0 : s.index - 1;
  r.levels = levels;
  r.features.assign(4 * static_cast<std::size_t>(levels), 0);
  r.complete = true;

  auto ask = s.ask_levels.begin();
  auto bid = s.bid_levels.begin();
  for (int l = 0; l < levels; ++l) {
    if (ask != s.ask_levels.end()) {
      r.features[4 * l] = ask->first;
      r.features[4 * l + 1] = ask->second.total;
      ++ask;
    } else {
      r.features[4 * l] = kAskSentinel;
      r.complete = false;
    }
    if (bid != s.bid_levels.end()) {
      r.features[4 * l + 2] = bid->first;
      r.features[4 * l + 3] = bid->second.total;
      ++bid;
    } else {
      r.features[4 * l + 2] = kBidSentinel;
      r.complete = false;
    }
  }
  return r;
}

DayStream generate_synthetic(std::uint64_t seed, std::size_t n_events, const SyntheticConfig& config) {
  if (n_events == 0) fail(Errc::InvalidArgument, "n_events must be >= 1");
  DayStream day;
  day.symbol = config.symbol;
  day.date = config.date;
  day.events.reserve(n_events);
  day.source_rows.assign(n_events, 0);
  SyntheticFlow flow(seed, config);
  for (std::size_t i = 0; i < n_events; ++i) {
    day.events.push_back(flow.next());
    if (config.record_snapshots) {
      day.vendor_snapshots.push_back(flow.reference_snapshot());
      day.vendor_snapshots.back().t = i;
    }
  }
  return day;
}

}  // namespace lobtrend

#include "lobtrend/book.hpp"

#include <string>

#include "lobtrend/error.hpp"

namespace lobtrend {

namespace {

template <typename Map>
void add_depth(Map& side, PriceTicks price, Shares amount) {
  side[price] += amount;
}

template <typename Map>
void remove_depth(Map& side, PriceTicks price, Shares amount) {
  auto it = side.find(price);
  if (it == side.end()) fail(Errc::Internal, "missing level " + std::to_string(price));
  it->second -= amount;
  if (it->second <= 0) side.erase(it);
}

}  // namespace

void OrderBook::apply(const LobEvent& e) {
  switch (e.kind) {
    case EventKind::Submission: {
      if (e.size <= 0 || e.price <= 0) fail(Errc::InvalidArgument, "submission with non-positive size or price");
      if (orders_.contains(e.order_id)) {
        fail(Errc::InvalidArgument, "duplicate order id " + std::to_string(e.order_id));
      }
      if (e.side == Side::Bid && !asks_.empty() && e.price >= asks_.begin()->first) {
        fail(Errc::CrossedBookAfterApply, "bid " + std::to_string(e.price) + " >= best ask");
      }
      if (e.side == Side::Ask && !bids_.empty() && e.price <= bids_.begin()->first) {
        fail(Errc::CrossedBookAfterApply, "ask " + std::to_string(e.price) + " <= best bid");
      }
      orders_.emplace(e.order_id, RestingOrder{e.side, e.price, e.size});
      if (e.side == Side::Bid) {
        add_depth(bids_, e.price, e.size);
      } else {
        add_depth(asks_, e.price, e.size);
      }
      return;
    }
    case EventKind::Deletion:
    case EventKind::Execution: {
      auto it = orders_.find(e.order_id);
      if (it == orders_.end()) fail(Errc::UnknownOrderId, "order " + std::to_string(e.order_id));
      if (e.size <= 0) fail(Errc::InvalidArgument, "non-positive size for order " + std::to_string(e.order_id));
      reduce(it, e.size);
      return;
    }
  }
}

void OrderBook::reduce(std::unordered_map<OrderId, RestingOrder>::iterator it, Shares amount) {
  RestingOrder& o = it->second;
  Shares removed = amount >= o.remaining ? o.remaining : amount;
  if (o.side == Side::Bid) {
    remove_depth(bids_, o.price, removed);
  } else {
    remove_depth(asks_, o.price, removed);
  }
  o.remaining -= removed;
  if (o.remaining == 0) orders_.erase(it);
}

LobRecord OrderBook::snapshot(int levels, std::uint64_t t) const {
  LobRecord r;
  r.t = t;
  r.levels = levels;
  r.features.resize(4 * static_cast<std::size_t>(levels));
  bool complete = true;
  auto ask = asks_.begin();
  auto bid = bids_.begin();
  for (int l = 0; l < levels; ++l) {
    std::int64_t* row = r.features.data() + 4 * l;
    if (ask != asks_.end()) {
      row[0] = ask->first;
      row[1] = ask->second;
      ++ask;
    } else {
      row[0] = kAskSentinel;
      row[1] = 0;
      complete = false;
    }
    if (bid != bids_.end()) {
      row[2] = bid->first;
      row[3] = bid->second;
      ++bid;
    } else {
      row[2] = kBidSentinel;
      row[3] = 0;
      complete = false;
    }
  }
  r.complete = complete;
  return r;
}

std::optional<PriceTicks> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<PriceTicks> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

Shares OrderBook::depth(Side side, PriceTicks price) const {
  if (side == Side::Bid) {
    auto it = bids_.find(price);
    return it == bids_.end() ? 0 : it->second;
  }
  auto it = asks_.find(price);
  return it == asks_.end() ? 0 : it->second;
}

const OrderBook::RestingOrder* OrderBook::find(OrderId id) const {
  auto it = orders_.find(id);
  return it == orders_.end() ? nullptr : &it->second;
}

bool OrderBook::check_invariants() const {
  if (!bids_.empty() && !asks_.empty() && bids_.begin()->first >= asks_.begin()->first) return false;
  std::map<PriceTicks, Shares> bid_sum;
  std::map<PriceTicks, Shares> ask_sum;
  for (const auto& [id, o] : orders_) {
    if (o.remaining <= 0) return false;
    (o.side == Side::Bid ? bid_sum : ask_sum)[o.price] += o.remaining;
  }
  if (bid_sum.size() != bids_.size() || ask_sum.size() != asks_.size()) return false;
  for (const auto& [p, v] : bids_) {
    if (v <= 0 || bid_sum[p] != v) return false;
  }
  for (const auto& [p, v] : asks_) {
    if (v <= 0 || ask_sum[p] != v) return false;
  }
  return true;
}

double mid_price(const LobRecord& r) {
  if (r.levels < 1 || r.ask_volume(0) <= 0 || r.bid_volume(0) <= 0 || r.ask_price(0) == kAskSentinel ||
      r.bid_price(0) == kBidSentinel) {
    fail(Errc::IncompleteRecord, "level 1 missing at t=" + std::to_string(r.t));
  }
  return (static_cast<double>(r.ask_price(0)) + static_cast<double>(r.bid_price(0))) * 0.5 / kTicksPerUnit;
}

std::vector<LobRecord> sample_records(std::span<const LobRecord> records, std::size_t stride) {
  if (stride == 0) fail(Errc::InvalidArgument, "stride must be >= 1");
  std::vector<LobRecord> out;
  std::size_t seen = 0;
  for (const LobRecord& r : records) {
    if (!r.complete) continue;
    if (++seen % stride == 0) out.push_back(r);
  }
  return out;
}

std::vector<LobRecord> replay(std::span<const LobEvent> events, int levels) {
  OrderBook book;
  std::vector<LobRecord> out;
  out.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    book.apply(events[i]);
    out.push_back(book.snapshot(levels, i));
  }
  return out;
}

}  // namespace lobtrend

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace lobtrend {

/// Prices are integer ticks: dollars x 10^4.
using PriceTicks = std::int64_t;
using Shares = std::int64_t;
using OrderId = std::int64_t;

inline constexpr double kTicksPerUnit = 10'000.0;
inline constexpr PriceTicks kAskSentinel = 9'999'999'999;
inline constexpr PriceTicks kBidSentinel = -9'999'999'999;
inline constexpr int kDefaultLevels = 10;

enum class Side : std::uint8_t { Bid, Ask };
enum class EventKind : std::uint8_t { Submission, Deletion, Execution };

struct LobEvent {
  std::int64_t timestamp_ns = 0;  // nanoseconds after midnight
  EventKind kind = EventKind::Submission;
  OrderId order_id = 0;
  Shares size = 0;
  PriceTicks price = 0;
  Side side = Side::Bid;

  bool operator==(const LobEvent&) const = default;
};

/// Top-L snapshot in (P_ask, V_ask, P_bid, V_bid) level-major layout.
struct LobRecord {
  std::uint64_t t = 0;  // index of the event that produced it
  int levels = 0;
  bool complete = false;
  std::vector<std::int64_t> features;  // 4 * levels

  PriceTicks ask_price(int level) const { return features[4 * level]; }
  Shares ask_volume(int level) const { return features[4 * level + 1]; }
  PriceTicks bid_price(int level) const { return features[4 * level + 2]; }
  Shares bid_volume(int level) const { return features[4 * level + 3]; }

  bool operator==(const LobRecord&) const = default;
};

/// Single-writer book state: aggregate depth per price and a resting-order index.
class OrderBook {
 public:
  struct RestingOrder {
    Side side;
    PriceTicks price;
    Shares remaining;
  };

  /// Applies one event. Throws UnknownOrderId or CrossedBookAfterApply; on
  /// throw the book is unchanged.
  void apply(const LobEvent& e);

  LobRecord snapshot(int levels, std::uint64_t t = 0) const;

  std::optional<PriceTicks> best_bid() const;
  std::optional<PriceTicks> best_ask() const;
  Shares depth(Side side, PriceTicks price) const;
  std::size_t level_count(Side side) const { return side == Side::Bid ? bids_.size() : asks_.size(); }
  std::size_t order_count() const { return orders_.size(); }
  const RestingOrder* find(OrderId id) const;

  /// Full consistency check of the invariants; intended for tests and debug.
  bool check_invariants() const;

 private:
  void reduce(std::unordered_map<OrderId, RestingOrder>::iterator it, Shares amount);

  std::map<PriceTicks, Shares, std::greater<>> bids_;
  std::map<PriceTicks, Shares> asks_;
  std::unordered_map<OrderId, RestingOrder> orders_;
};

/// Mid-price in price units. Throws IncompleteRecord when either best level is missing.
double mid_price(const LobRecord& r);

/// Drops incomplete records, then keeps indices stride-1, 2*stride-1, ...
std::vector<LobRecord> sample_records(std::span<const LobRecord> records, std::size_t stride);

/// Replays a stream from an empty book and returns the snapshot after every event.
std::vector<LobRecord> replay(std::span<const LobEvent> events, int levels);

}  // namespace lobtrend

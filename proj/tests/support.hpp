#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond plain data types.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lobtrend/book.hpp"

namespace testing_support {

using namespace lobtrend;

/// Rebuilds a book from scratch by replaying every order, then aggregates.
inline LobRecord rebuild_snapshot(const std::vector<LobEvent>& events, std::size_t upto, int levels) {
  struct Order {
    Side side;
    PriceTicks price;
    Shares left;
  };
  std::map<OrderId, Order> live;
  for (std::size_t i = 0; i < upto; ++i) {
    const LobEvent& e = events[i];
    if (e.kind == EventKind::Submission) {
      live[e.order_id] = {e.side, e.price, e.size};
    } else {
      auto& o = live.at(e.order_id);
      o.left -= std::min(o.left, e.size);
      if (o.left == 0) live.erase(e.order_id);
    }
  }
  std::map<PriceTicks, Shares> bid, ask;
  for (const auto& [id, o] : live) (o.side == Side::Bid ? bid : ask)[o.price] += o.left;
  LobRecord r;
  r.levels = levels;
  r.t = upto == 0 ? 0 : upto - 1;
  r.features.assign(4 * levels, 0);
  auto a = ask.begin();
  auto b = bid.rbegin();
  for (int l = 0; l < levels; ++l) {
    if (a != ask.end()) {
      r.features[4 * l] = a->first;
      r.features[4 * l + 1] = a->second;
      ++a;
    } else {
      r.features[4 * l] = kAskSentinel;
    }
    if (b != bid.rend()) {
      r.features[4 * l + 2] = b->first;
      r.features[4 * l + 3] = b->second;
      ++b;
    } else {
      r.features[4 * l + 2] = kBidSentinel;
    }
  }
  r.complete = ask.size() >= static_cast<std::size_t>(levels) && bid.size() >= static_cast<std::size_t>(levels);
  return r;
}

inline LobEvent submit(OrderId id, Side side, PriceTicks price, Shares size, std::int64_t ts = 0) {
  return LobEvent{ts, EventKind::Submission, id, size, price, side};
}
inline LobEvent cancel(OrderId id, Side side, PriceTicks price, Shares size, std::int64_t ts = 0) {
  return LobEvent{ts, EventKind::Deletion, id, size, price, side};
}
inline LobEvent execute(OrderId id, Side side, PriceTicks price, Shares size, std::int64_t ts = 0) {
  return LobEvent{ts, EventKind::Execution, id, size, price, side};
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lobtrend_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Mean and population standard deviation, two-pass.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  const long double m = s / v.size();
  long double q = 0;
  for (double x : v) q += (x - m) * (x - m);
  return {static_cast<double>(m), static_cast<double>(std::sqrt(q / v.size()))};
}

}  // namespace testing_support

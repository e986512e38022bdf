#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace lobtrend {

/// Ternary trend class. Numeric values are the on-disk label byte.
enum class TrendLabel : std::uint8_t { Up = 0, Stationary = 1, Down = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<TrendLabel, kNumClasses> kAllLabels{TrendLabel::Up, TrendLabel::Stationary,
                                                                TrendLabel::Down};

constexpr std::size_t index_of(TrendLabel l) { return static_cast<std::size_t>(l); }

constexpr char label_char(TrendLabel l) {
  switch (l) {
    case TrendLabel::Up: return 'U';
    case TrendLabel::Stationary: return 'S';
    case TrendLabel::Down: return 'D';
  }
  return '?';
}

using Probabilities = std::array<double, kNumClasses>;

/// Class with the highest probability. Exact ties resolve S > U > D, the
/// no-trade preference shared with majority voting.
constexpr TrendLabel argmax_label(const Probabilities& p) {
  constexpr std::array<TrendLabel, 3> priority{TrendLabel::Stationary, TrendLabel::Up, TrendLabel::Down};
  TrendLabel best = priority[0];
  for (TrendLabel c : priority) {
    if (p[index_of(c)] > p[index_of(best)]) best = c;
  }
  return best;
}

/// Default horizon set, in sampled steps.
inline constexpr std::array<int, 5> kDefaultHorizons{1, 2, 3, 5, 10};

}  // namespace lobtrend

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace spip {

/// A state of the system: a point of the integer lattice Z².
struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr bool operator==(const LatticePoint&, const LatticePoint&) = default;
  friend constexpr auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const LatticePoint& p) {
  return os << '(' << p.x << ", " << p.y << ')';
}

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(p.y) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Closed axis-aligned integer box [x_min, x_max] × [y_min, y_max].
struct Box {
  std::int64_t x_min = 0;
  std::int64_t x_max = -1;
  std::int64_t y_min = 0;
  std::int64_t y_max = -1;

  static constexpr Box around(LatticePoint p, std::int64_t radius) {
    return {p.x - radius, p.x + radius, p.y - radius, p.y + radius};
  }
  static constexpr Box point(LatticePoint p) { return {p.x, p.x, p.y, p.y}; }

  constexpr bool empty() const { return x_min > x_max || y_min > y_max; }
  constexpr bool contains(LatticePoint p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  constexpr std::uint64_t width() const { return empty() ? 0 : static_cast<std::uint64_t>(x_max - x_min + 1); }
  constexpr std::uint64_t height() const { return empty() ? 0 : static_cast<std::uint64_t>(y_max - y_min + 1); }
  constexpr std::uint64_t cells() const { return width() * height(); }

  /// Smallest box containing both.
  constexpr Box hull(const Box& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    return {x_min < o.x_min ? x_min : o.x_min, x_max > o.x_max ? x_max : o.x_max,
            y_min < o.y_min ? y_min : o.y_min, y_max > o.y_max ? y_max : o.y_max};
  }
  constexpr Box intersect(const Box& o) const {
    return {x_min > o.x_min ? x_min : o.x_min, x_max < o.x_max ? x_max : o.x_max,
            y_min > o.y_min ? y_min : o.y_min, y_max < o.y_max ? y_max : o.y_max};
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::int64_t x = x_min; x <= x_max; ++x)
      for (std::int64_t y = y_min; y <= y_max; ++y) f(LatticePoint{x, y});
  }

  friend constexpr bool operator==(const Box&, const Box&) = default;
};

}  // namespace spip

template <>
struct std::hash<spip::LatticePoint> : spip::LatticePointHash {};

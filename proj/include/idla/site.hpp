#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>

namespace idla {

/// A vertex of the square lattice. `y` is the level.
struct Site {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Site&, const Site&) = default;

  // Levels first, then the horizontal coordinate.
  friend std::strong_ordering operator<=>(const Site& a, const Site& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }

  friend std::ostream& operator<<(std::ostream& os, const Site& s) {
    return os << '(' << s.x << ',' << s.y << ')';
  }
};

enum class Direction : std::uint8_t { east = 0, west = 1, north = 2, south = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::east, Direction::west,
                                                      Direction::north, Direction::south};

constexpr Site displacement(Direction d) {
  switch (d) {
    case Direction::east: return {1, 0};
    case Direction::west: return {-1, 0};
    case Direction::north: return {0, 1};
    case Direction::south: return {0, -1};
  }
  return {0, 0};
}

constexpr Site step(Site s, Direction d) {
  const Site v = displacement(d);
  return {s.x + v.x, s.y + v.y};
}

constexpr std::array<Site, 4> neighbors(Site s) {
  return {step(s, Direction::east), step(s, Direction::west), step(s, Direction::north),
          step(s, Direction::south)};
}

constexpr bool adjacent(Site a, Site b) {
  const auto dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const auto dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx + dy == 1;
}

/// The source of level `i`, on the vertical axis.
constexpr Site source(std::int64_t level) { return {0, level}; }

/// Axis-aligned box of sites with inclusive bounds. Unbounded sides use the
/// integer limits, so strips, rectangles and half-planes are all boxes.
struct Region {
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

  std::int64_t x_lo = -kInf;
  std::int64_t x_hi = kInf;
  std::int64_t y_lo = -kInf;
  std::int64_t y_hi = kInf;

  constexpr bool contains(Site s) const {
    return s.x >= x_lo && s.x <= x_hi && s.y >= y_lo && s.y <= y_hi;
  }

  friend bool operator==(const Region&, const Region&) = default;

  static constexpr Region everything() { return {}; }
  /// Z x [-half_height, half_height].
  static constexpr Region strip(std::int64_t half_height) {
    return {-kInf, kInf, -half_height, half_height};
  }
  /// [-half_width, half_width] x Z.
  static constexpr Region rectangle(std::int64_t half_width) {
    return {-half_width, half_width, -kInf, kInf};
  }
  /// Sites with y >= level.
  static constexpr Region upper_half_plane(std::int64_t level) { return {-kInf, kInf, level, kInf}; }
  static constexpr Region row(std::int64_t level) { return {-kInf, kInf, level, level}; }
  static constexpr Region single(Site s) { return {s.x, s.x, s.y, s.y}; }
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(s.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(s.y) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace idla

template <>
struct std::hash<idla::Site> : idla::SiteHash {};

#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>

namespace skelforge {

/// Integer pixel coordinate, origin top-left, y pointing down.
///
/// Points order in raster order (row first, then column); every "smallest
/// point" or "lexicographic" tie-break in the library uses this order.
struct Point {
    int x = 0;
    int y = 0;

    friend constexpr bool operator==(const Point&, const Point&) = default;
    friend constexpr std::strong_ordering operator<=>(const Point& a, const Point& b) {
        if (auto c = a.y <=> b.y; c != 0) return c;
        return a.x <=> b.x;
    }
};

constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }

constexpr std::int64_t squared_distance(Point a, Point b) {
    const std::int64_t dx = a.x - b.x;
    const std::int64_t dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(Point a, Point b) {
    return std::sqrt(static_cast<double>(squared_distance(a, b)));
}

/// 8-neighborhood offsets in counterclockwise screen order starting east.
inline constexpr std::array<Point, 8> kNeighbors8 = {{
    {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1},
}};

inline constexpr std::array<Point, 4> kNeighbors4 = {{{1, 0}, {0, -1}, {-1, 0}, {0, 1}}};

constexpr bool adjacent8(Point a, Point b) {
    const int dx = a.x - b.x;
    const int dy = a.y - b.y;
    return (dx != 0 || dy != 0) && dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1;
}

/// Length of a single 8-neighborhood step: 1 or sqrt(2).
inline double step_length(Point a, Point b) {
    return (a.x != b.x && a.y != b.y) ? std::sqrt(2.0) : 1.0;
}

/// Axis-aligned pixel rectangle, inclusive on all sides.
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    constexpr bool contains(Point p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
    friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

struct PointHash {
    std::size_t operator()(Point p) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
                                          static_cast<std::uint32_t>(p.y));
    }
};

}  // namespace skelforge

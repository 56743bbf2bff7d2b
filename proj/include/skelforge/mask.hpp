#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "skelforge/geometry.hpp"

namespace skelforge {

/// Row-major boolean raster. `true` marks foreground.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    /// Build a mask from rows of '#' (foreground) and '.' (background).
    static BinaryMask from_ascii(std::span<const char* const> rows);
    static BinaryMask from_points(int width, int height, std::span<const Point> points);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty_grid() const noexcept { return width_ == 0 || height_ == 0; }

    bool in_bounds(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool in_bounds(Point p) const noexcept { return in_bounds(p.x, p.y); }

    bool at(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
    bool at(Point p) const noexcept { return at(p.x, p.y); }
    /// Out-of-grid reads return background.
    bool get(int x, int y) const noexcept { return in_bounds(x, y) && at(x, y); }
    bool get(Point p) const noexcept { return get(p.x, p.y); }

    void set(int x, int y, bool value = true) noexcept { bits_[index(x, y)] = value ? 1 : 0; }
    void set(Point p, bool value = true) noexcept { set(p.x, p.y, value); }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }
    Point point_at(std::size_t i) const noexcept {
        return {static_cast<int>(i % static_cast<std::size_t>(width_)), static_cast<int>(i / static_cast<std::size_t>(width_))};
    }

    /// Foreground area in pixels.
    std::size_t area() const noexcept;
    /// Foreground pixels in raster order.
    std::vector<Point> points() const;

    bool is_subset_of(const BinaryMask& other) const;
    BinaryMask united(const BinaryMask& other) const;
    BinaryMask intersected(const BinaryMask& other) const;
    BinaryMask inverted() const;

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

}  // namespace skelforge

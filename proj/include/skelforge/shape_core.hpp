#pragma once

#include <cstdint>
#include <vector>

#include "skelforge/mask.hpp"

namespace skelforge {

/// Ordered boundary pixels. Consecutive points are 8-adjacent; a closed
/// contour's last point is 8-adjacent to its first.
struct Contour {
    std::vector<Point> points;
    bool closed = true;

    std::size_t size() const noexcept { return points.size(); }
    /// Polygon perimeter through the points (closing segment included when closed).
    double length() const;
};

/// Exact Euclidean distance from each foreground pixel to the nearest
/// background pixel. Squared distances are kept as integers so that disc
/// membership tests stay exact.
class DistanceField {
public:
    DistanceField() = default;
    DistanceField(int width, int height, std::vector<std::int64_t> squared);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    double at(int x, int y) const noexcept { return values_[index(x, y)]; }
    double at(Point p) const noexcept { return at(p.x, p.y); }
    std::int64_t squared_at(Point p) const noexcept { return squared_[index(p.x, p.y)]; }
    double max_value() const noexcept;

    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::int64_t> squared_;
    std::vector<double> values_;
};

/// Connected foreground regions, largest first; equal areas are ordered by
/// their first pixel in raster order.
std::vector<BinaryMask> connected_components(const BinaryMask& mask, int connectivity = 8);

/// Fill background regions that are not 4-connected to the grid border.
BinaryMask fill_holes(const BinaryMask& mask);

/// Outer boundary of a single 8-connected component, traced counterclockwise
/// on screen starting at the first foreground pixel in raster order. Every
/// foreground pixel that 8-touches the outer background is visited.
Contour trace_boundary(const BinaryMask& mask);

/// Rasterize a contour back into a mask of the given size.
BinaryMask rasterize(const Contour& contour, int width, int height);

/// Exact EDT; pixels outside the grid count as background.
DistanceField distance_transform(const BinaryMask& mask);

/// Squared Euclidean distance from every pixel to the nearest `sites` pixel,
/// without any border rule. Returns -1 everywhere when there are no sites.
std::vector<std::int64_t> squared_distance_to_sites(const BinaryMask& sites);

/// Nearest-background feature transform: for every foreground pixel, the
/// background pixel (possibly outside the grid) realizing its distance.
std::vector<Point> feature_transform(const BinaryMask& mask);

// Digital topology helpers (8-connected foreground, 4-connected background).

/// True when removing `p` from `set` changes neither the number of
/// foreground components nor the number of holes.
bool is_simple_point(const BinaryMask& set, Point p);

/// Number of 8-connected foreground neighbors.
int neighbor_count(const BinaryMask& set, Point p);

/// Euler number (components minus holes) from 2x2 quad counts, 8-connectivity.
long euler_number8(const BinaryMask& set);

std::size_t count_components8(const BinaryMask& set);

}  // namespace skelforge

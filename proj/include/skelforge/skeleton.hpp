#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skelforge/mask.hpp"
#include "skelforge/shape_core.hpp"

namespace skelforge {

/// One-pixel-wide skeleton: sorted, unique points plus optional radii.
///
/// `radii`, when present, is aligned with `points` and holds the radius of
/// the maximal disc centred at each point.
struct SkeletonRaster {
    int width = 0;
    int height = 0;
    std::vector<Point> points;
    std::vector<double> radii;

    bool has_radii() const noexcept { return radii.size() == points.size(); }
    bool empty() const noexcept { return points.empty(); }
    std::size_t size() const noexcept { return points.size(); }

    bool contains(Point p) const;
    std::optional<double> radius_of(Point p) const;
    BinaryMask mask() const;

    /// Points of `mask`, without radii.
    static SkeletonRaster from_mask(const BinaryMask& mask);
    /// Points of `mask` with radii attached from `field`.
    static SkeletonRaster from_mask(const BinaryMask& mask, const DistanceField& field);

    friend bool operator==(const SkeletonRaster& a, const SkeletonRaster& b) {
        return a.width == b.width && a.height == b.height && a.points == b.points;
    }
};

/// Radius of the largest closed lattice disc centred at `p` that contains no
/// background pixel: sqrt(d^2 - 1), where d is the distance transform value.
double inscribed_radius(const DistanceField& field, Point p);

/// Stable digest of a skeleton's pixel set (FNV-1a over dimensions and the
/// sorted point list), as 16 lowercase hex digits.
std::string skeleton_digest(const SkeletonRaster& skeleton);

/// True when no 2x2 window is entirely skeleton.
bool is_thin(const BinaryMask& set);

/// Repeatedly delete simple pixels that have at least two neighbors, visiting
/// candidates in ascending `priority` (ties by raster order). Only pixels in
/// `candidates` (or all set pixels when empty) are considered.
void remove_redundant_pixels(BinaryMask& set, const std::vector<double>& priority,
                             const std::vector<Point>& candidates = {});

}  // namespace skelforge

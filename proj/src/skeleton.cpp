#include "skelforge/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#include "skelforge/error.hpp"

namespace skelforge {

bool SkeletonRaster::contains(Point p) const {
    return std::binary_search(points.begin(), points.end(), p);
}

std::optional<double> SkeletonRaster::radius_of(Point p) const {
    if (!has_radii()) return std::nullopt;
    const auto it = std::lower_bound(points.begin(), points.end(), p);
    if (it == points.end() || *it != p) return std::nullopt;
    return radii[static_cast<std::size_t>(it - points.begin())];
}

BinaryMask SkeletonRaster::mask() const {
    return BinaryMask::from_points(width, height, points);
}

SkeletonRaster SkeletonRaster::from_mask(const BinaryMask& mask) {
    SkeletonRaster s;
    s.width = mask.width();
    s.height = mask.height();
    s.points = mask.points();
    return s;
}

SkeletonRaster SkeletonRaster::from_mask(const BinaryMask& mask, const DistanceField& field) {
    if (field.width() != mask.width() || field.height() != mask.height()) {
        throw Error(ErrorCode::DimensionMismatch, "distance field does not match skeleton grid");
    }
    SkeletonRaster s = from_mask(mask);
    s.radii.reserve(s.points.size());
    for (Point p : s.points) s.radii.push_back(inscribed_radius(field, p));
    return s;
}

double inscribed_radius(const DistanceField& field, Point p) {
    const std::int64_t d2 = field.squared_at(p);
    return d2 > 0 ? std::sqrt(static_cast<double>(d2 - 1)) : 0.0;
}

std::string skeleton_digest(const SkeletonRaster& skeleton) {
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](std::int64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<std::uint64_t>(v >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    mix(skeleton.width);
    mix(skeleton.height);
    for (Point p : skeleton.points) {
        mix(p.x);
        mix(p.y);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool is_thin(const BinaryMask& set) {
    for (int y = 0; y + 1 < set.height(); ++y) {
        for (int x = 0; x + 1 < set.width(); ++x) {
            if (set.at(x, y) && set.at(x + 1, y) && set.at(x, y + 1) && set.at(x + 1, y + 1)) return false;
        }
    }
    return true;
}

void remove_redundant_pixels(BinaryMask& set, const std::vector<double>& priority, const std::vector<Point>& candidates) {
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    std::vector<std::uint8_t> allowed;
    const bool restricted = !candidates.empty();
    if (restricted) {
        allowed.assign(set.bits().size(), 0);
        for (Point p : candidates) {
            if (set.in_bounds(p)) allowed[set.index(p.x, p.y)] = 1;
        }
    }
    const auto prio = [&](std::size_t i) { return priority.empty() ? 0.0 : priority[i]; };
    const auto consider = [&](Point p) {
        const std::size_t i = set.index(p.x, p.y);
        if (!set.at(p) || (restricted && !allowed[i])) return;
        if (neighbor_count(set, p) >= 2 && is_simple_point(set, p)) queue.push({prio(i), i});
    };
    for (std::size_t i = 0; i < set.bits().size(); ++i) {
        if (set.bits()[i]) consider(set.point_at(i));
    }
    while (!queue.empty()) {
        const auto [_, i] = queue.top();
        queue.pop();
        const Point p = set.point_at(i);
        if (!set.at(p) || neighbor_count(set, p) < 2 || !is_simple_point(set, p)) continue;
        set.set(p, false);
        for (Point d : kNeighbors8) {
            const Point q = p + d;
            if (set.in_bounds(q)) consider(q);
        }
    }
}

}  // namespace skelforge

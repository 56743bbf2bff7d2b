#include "skelforge/dce.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "skelforge/error.hpp"

namespace skelforge {

double dce_relevance(Point prev, Point v, Point next, double total_length) {
    const double ax = v.x - prev.x;
    const double ay = v.y - prev.y;
    const double bx = next.x - v.x;
    const double by = next.y - v.y;
    const double l1 = std::hypot(ax, ay) / total_length;
    const double l2 = std::hypot(bx, by) / total_length;
    if (l1 + l2 <= 0.0) return 0.0;
    const double turn = std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by);
    return turn * l1 * l2 / (l1 + l2);
}

namespace {

/// Doubly linked evolution state with an ordered relevance queue.
class Evolution {
public:
    explicit Evolution(const Contour& contour) : pts_(contour.points) {
        const std::size_t n = pts_.size();
        total_ = contour.length();
        if (total_ <= 0.0) total_ = 1.0;
        prev_.resize(n);
        next_.resize(n);
        rel_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            prev_[i] = (i + n - 1) % n;
            next_[i] = (i + 1) % n;
        }
        for (std::size_t i = 0; i < n; ++i) {
            rel_[i] = relevance(i);
            queue_.insert({rel_[i], i});
        }
        alive_ = n;
    }

    std::size_t alive() const { return alive_; }

    std::size_t remove_least() {
        const auto it = queue_.begin();
        const std::size_t v = it->second;
        queue_.erase(it);
        const std::size_t p = prev_[v];
        const std::size_t q = next_[v];
        next_[p] = q;
        prev_[q] = p;
        --alive_;
        refresh(p);
        refresh(q);
        return v;
    }

    DcePolygon snapshot() const {
        DcePolygon poly;
        for (const auto& [r, i] : queue_) poly.vertices.push_back(i);
        std::sort(poly.vertices.begin(), poly.vertices.end());
        poly.relevance.reserve(poly.vertices.size());
        for (std::size_t i : poly.vertices) poly.relevance.push_back(rel_[i]);
        return poly;
    }

    /// Remaining vertices by ascending relevance.
    std::vector<std::size_t> remaining_by_relevance() const {
        std::vector<std::size_t> out;
        for (const auto& [r, i] : queue_) out.push_back(i);
        return out;
    }

private:
    double relevance(std::size_t i) const {
        return dce_relevance(pts_[prev_[i]], pts_[i], pts_[next_[i]], total_);
    }

    void refresh(std::size_t i) {
        queue_.erase({rel_[i], i});
        rel_[i] = relevance(i);
        queue_.insert({rel_[i], i});
    }

    const std::vector<Point>& pts_;
    double total_ = 1.0;
    std::vector<std::size_t> prev_;
    std::vector<std::size_t> next_;
    std::vector<double> rel_;
    std::set<std::pair<double, std::size_t>> queue_;
    std::size_t alive_ = 0;
};

void require_closed(const Contour& contour, std::size_t k_min) {
    if (k_min < 3) throw Error(ErrorCode::InvalidArgument, "k_min must be at least 3");
    if (!contour.closed) throw Error(ErrorCode::InvalidArgument, "DCE needs a closed contour");
    if (contour.size() < k_min) throw Error(ErrorCode::ContourTooShort, "contour has fewer vertices than k_min");
}

}  // namespace

std::vector<DcePolygon> dce_evolve(const Contour& contour, std::size_t k_min) {
    require_closed(contour, k_min);
    Evolution evo(contour);
    std::vector<DcePolygon> out;
    out.push_back(evo.snapshot());
    while (evo.alive() > k_min) {
        evo.remove_least();
        out.push_back(evo.snapshot());
    }
    return out;
}

std::vector<std::size_t> dce_removal_order(const Contour& contour) {
    require_closed(contour, 3);
    Evolution evo(contour);
    std::vector<std::size_t> order;
    order.reserve(contour.size());
    while (evo.alive() > 3) order.push_back(evo.remove_least());
    for (std::size_t i : evo.remaining_by_relevance()) order.push_back(i);
    return order;
}

std::vector<std::size_t> dce_survivors(const std::vector<std::size_t>& removal_order, std::size_t k) {
    const std::size_t n = removal_order.size();
    const std::size_t keep = std::min(k, n);
    std::vector<std::size_t> out(removal_order.end() - static_cast<std::ptrdiff_t>(keep), removal_order.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace skelforge

#include "skelforge/skeletonizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "skelforge/error.hpp"
#include "skelforge/skeleton_graph.hpp"

namespace skelforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTipWindow = 3;
constexpr int kMaxTopUpRounds = 4;

class AxisBuilder {
public:
    AxisBuilder(const BinaryMask& mask, const DistanceField& field)
        : mask_(mask), w_(mask.width()), h_(mask.height()) {
        const std::size_t n = mask.bits().size();
        d2_.resize(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (mask.bits()[i]) d2_[i] = field.squared_at(mask.point_at(i));
        }
        skel_.assign(n, 0);
        covered_.assign(n, 0);
        stamp_.assign(n, 0);
    }

    /// Delete every simple pixel, shallowest first; what remains carries the
    /// topology of the mask (a single pixel, or cycles around holes).
    void thin_to_core() {
        double cx = 0.0;
        double cy = 0.0;
        const auto pts = mask_.points();
        for (Point p : pts) {
            cx += p.x;
            cy += p.y;
        }
        cx /= static_cast<double>(pts.size());
        cy /= static_cast<double>(pts.size());

        BinaryMask set = mask_;
        using Key = std::tuple<std::int64_t, double, std::size_t>;
        std::priority_queue<Key, std::vector<Key>, std::greater<>> queue;
        const auto push = [&](Point p) {
            const double dx = p.x - cx;
            const double dy = p.y - cy;
            const std::size_t i = set.index(p.x, p.y);
            queue.push({d2_[i], -(dx * dx + dy * dy), i});
        };
        for (Point p : pts) {
            if (is_simple_point(set, p)) push(p);
        }
        while (!queue.empty()) {
            const std::size_t i = std::get<2>(queue.top());
            queue.pop();
            const Point p = set.point_at(i);
            if (!set.at(p) || !is_simple_point(set, p)) continue;
            set.set(p, false);
            for (Point d : kNeighbors8) {
                const Point q = p + d;
                if (set.get(q) && is_simple_point(set, q)) push(q);
            }
        }
        std::vector<std::size_t> core;
        for (std::size_t i = 0; i < set.bits().size(); ++i) {
            if (set.bits()[i]) core.push_back(i);
        }
        add(core);
        core_ = std::move(core);
    }

    void build_forest() {
        forest_pred_ = dijkstra(core_, nullptr).second;
    }

    /// Try growing a branch from boundary pixel `tip`; true when accepted.
    bool try_tip(Point tip, const MedialAxisOptions& options) {
        const std::size_t t = index(tip);
        if (skel_[t]) return false;
        std::vector<std::size_t> forest_path;
        for (long cur = static_cast<long>(t); cur >= 0; cur = forest_pred_[static_cast<std::size_t>(cur)]) {
            forest_path.push_back(static_cast<std::size_t>(cur));
        }
        if (gain(forest_path) < options.min_branch_gain) return false;
        std::vector<std::size_t> path = path_to_skeleton(t);
        if (path.empty()) return false;
        const double g = gain(path);
        if (g < options.min_branch_gain) return false;
        // Ripples along flat sides uncover thin strips whose area grows
        // roughly with sqrt(r); demand more than that away from corners.
        if (!is_convex_tip(tip) && g < options.flat_tip_scale * std::sqrt(radius_near(path.front()))) return false;
        add(path);
        return true;
    }

    /// Gain of the branch from `tip`, or 0 when it cannot grow one.
    double tip_gain(Point tip) {
        const std::size_t t = index(tip);
        if (skel_[t]) return 0.0;
        const std::vector<std::size_t> path = path_to_skeleton(t);
        return path.empty() ? 0.0 : gain(path);
    }

    void grow(Point tip) { add(path_to_skeleton(index(tip))); }

    /// Replace the skeleton with `set` and recompute coverage from scratch.
    void reset_to(const BinaryMask& set) {
        std::fill(skel_.begin(), skel_.end(), 0);
        std::fill(covered_.begin(), covered_.end(), 0);
        std::vector<std::size_t> all;
        for (Point p : set.points()) all.push_back(index(p));
        add(all);
    }

    std::size_t uncovered() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < covered_.size(); ++i) n += (mask_.bits()[i] && !covered_[i]) ? 1 : 0;
        return n;
    }

    /// Fill skeleton holes that enclose no background of the mask.
    void fill_pockets() {
        const std::size_t n = skel_.size();
        std::vector<int> label(n, -1);
        int next = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (skel_[s] || label[s] >= 0) continue;
            std::vector<std::size_t> stack{s};
            std::vector<std::size_t> members;
            label[s] = next;
            bool keep_open = false;
            while (!stack.empty()) {
                const std::size_t i = stack.back();
                stack.pop_back();
                members.push_back(i);
                const Point p = mask_.point_at(i);
                if (!mask_.bits()[i] || p.x == 0 || p.y == 0 || p.x == w_ - 1 || p.y == h_ - 1) keep_open = true;
                for (Point d : kNeighbors4) {
                    const Point q = p + d;
                    if (!mask_.in_bounds(q)) continue;
                    const std::size_t j = index(q);
                    if (skel_[j] || label[j] >= 0) continue;
                    label[j] = next;
                    stack.push_back(j);
                }
            }
            if (!keep_open) {
                for (std::size_t i : members) skel_[i] = 1;
            }
            ++next;
        }
    }

    BinaryMask skeleton_mask() const {
        return BinaryMask(w_, h_, std::vector<std::uint8_t>(skel_.begin(), skel_.end()));
    }

    /// Removal order for the final cleanup: pixels whose disc covers little
    /// that no other skeleton disc covers go first, shallower ones on ties.
    std::vector<double> coverage_priority(const BinaryMask& set) const {
        std::vector<int> hits(skel_.size(), 0);
        const auto pts = set.points();
        for (Point p : pts) for_disc(index(p), [&](std::size_t q) { ++hits[q]; });
        std::vector<double> prio(skel_.size(), 0.0);
        for (Point p : pts) {
            const std::size_t i = index(p);
            double unique = 0.0;
            for_disc(i, [&](std::size_t q) { unique += hits[q] == 1 ? 1.0 : 0.0; });
            prio[i] = unique * 1e9 + static_cast<double>(d2_[i]);
        }
        return prio;
    }

private:
    std::size_t index(Point p) const { return mask_.index(p.x, p.y); }

    /// Inscribed radius where a path joins the skeleton.
    double radius_near(std::size_t i) const {
        double r = 0.0;
        const Point p = mask_.point_at(i);
        for (Point d : kNeighbors8) {
            const Point q = p + d;
            if (mask_.get(q) && skel_[index(q)]) r = std::max(r, std::sqrt(static_cast<double>(d2_[index(q)] - 1)));
        }
        return r;
    }

    /// Less than half of the surrounding disc lies inside the shape. Straight
    /// sides fail this, so grid ripples along them do not sprout branches.
    bool is_convex_tip(Point tip) const {
        int inside = 0;
        int total = 0;
        for (int dy = -kTipWindow; dy <= kTipWindow; ++dy) {
            for (int dx = -kTipWindow; dx <= kTipWindow; ++dx) {
                if (dx * dx + dy * dy > kTipWindow * kTipWindow) continue;
                ++total;
                if (mask_.get(tip.x + dx, tip.y + dy)) ++inside;
            }
        }
        return 2 * inside < total;
    }

    double step_cost(std::size_t a, std::size_t b) const {
        const Point pa = mask_.point_at(a);
        const Point pb = mask_.point_at(b);
        const double inv = 0.5 * (1.0 / static_cast<double>(d2_[a]) + 1.0 / static_cast<double>(d2_[b]));
        return step_length(pa, pb) * inv;
    }

    /// Multi-source shortest paths over the mask. Stops at the first settled
    /// skeleton pixel when `reached` is given.
    std::pair<std::vector<double>, std::vector<long>> dijkstra(const std::vector<std::size_t>& sources,
                                                               std::size_t* reached) const {
        const std::size_t n = skel_.size();
        std::vector<double> dist(n, kInf);
        std::vector<long> pred(n, -1);
        std::vector<std::uint8_t> done(n, 0);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        for (std::size_t s : sources) {
            dist[s] = 0.0;
            queue.push({0.0, s});
        }
        while (!queue.empty()) {
            const auto [d, u] = queue.top();
            queue.pop();
            if (done[u]) continue;
            done[u] = 1;
            if (reached != nullptr && skel_[u]) {
                *reached = u;
                break;
            }
            const Point pu = mask_.point_at(u);
            for (Point off : kNeighbors8) {
                const Point q = pu + off;
                if (!mask_.get(q)) continue;
                const std::size_t v = index(q);
                if (done[v]) continue;
                const double nd = d + step_cost(u, v);
                if (nd < dist[v]) {
                    dist[v] = nd;
                    pred[v] = static_cast<long>(u);
                    queue.push({nd, v});
                }
            }
        }
        return {std::move(dist), std::move(pred)};
    }

    /// Cheapest path from `t` to the current skeleton, skeleton pixel excluded.
    std::vector<std::size_t> path_to_skeleton(std::size_t t) const {
        std::size_t reached = skel_.size();
        const auto [dist, pred] = dijkstra({t}, &reached);
        if (reached == skel_.size()) return {};
        std::vector<std::size_t> path;
        for (long cur = pred[reached]; cur >= 0; cur = pred[static_cast<std::size_t>(cur)]) {
            path.push_back(static_cast<std::size_t>(cur));
        }
        return path;
    }

    template <typename Fn>
    void for_disc(std::size_t s, Fn&& fn) const {
        const std::int64_t r2 = d2_[s] - 1;
        const Point c = mask_.point_at(s);
        if (r2 <= 0) {
            fn(s);
            return;
        }
        const int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(r2))));
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (static_cast<std::int64_t>(dx) * dx + static_cast<std::int64_t>(dy) * dy > r2) continue;
                const Point q{c.x + dx, c.y + dy};
                if (mask_.in_bounds(q)) fn(index(q));
            }
        }
    }

    double gain(const std::vector<std::size_t>& path) {
        ++stamp_id_;
        double count = 0.0;
        for (std::size_t s : path) {
            if (skel_[s]) continue;
            for_disc(s, [&](std::size_t q) {
                if (covered_[q] || stamp_[q] == stamp_id_) return;
                stamp_[q] = stamp_id_;
                count += 1.0;
            });
        }
        return count;
    }

    void add(const std::vector<std::size_t>& path) {
        for (std::size_t s : path) {
            skel_[s] = 1;
            for_disc(s, [&](std::size_t q) { covered_[q] = 1; });
        }
    }

    const BinaryMask& mask_;
    int w_;
    int h_;
    std::vector<std::int64_t> d2_;
    std::vector<std::uint8_t> skel_;
    std::vector<std::uint8_t> covered_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t stamp_id_ = 0;
    std::vector<std::size_t> core_;
    std::vector<long> forest_pred_;
};

std::size_t circular_distance(std::size_t a, std::size_t b, std::size_t n) {
    const std::size_t d = a > b ? a - b : b - a;
    return std::min(d, n - d);
}

}  // namespace

MedialAxisResult medial_axis_detailed(const BinaryMask& mask, const MedialAxisOptions& options) {
    const auto components = connected_components(mask, 8);
    if (components.empty()) throw Error(ErrorCode::EmptyMask, "mask has no foreground");
    if (components.size() > 1) throw Error(ErrorCode::MultipleComponents, "mask must be a single component");

    const DistanceField field = distance_transform(mask);
    MedialAxisResult out;
    out.contour = trace_boundary(mask);
    const std::size_t n = out.contour.size();
    if (n >= 3) {
        out.removal_order = dce_removal_order(out.contour);
    } else {
        for (std::size_t i = 0; i < n; ++i) out.removal_order.push_back(i);
    }

    AxisBuilder builder(mask, field);
    builder.thin_to_core();
    builder.build_forest();
    // Most significant boundary vertices first.
    for (auto it = out.removal_order.rbegin(); it != out.removal_order.rend(); ++it) {
        if (builder.try_tip(out.contour.points[*it], options)) out.tips.push_back(*it);
    }
    // The cleanup below can drop pixels whose discs reached the boundary, and
    // many rejected flat tips add up on small shapes. Measure coverage on the
    // cleaned skeleton and grow the best remaining tips until it is in budget.
    const double budget = options.coverage_budget * static_cast<double>(mask.area());
    BinaryMask set;
    for (int round = 0;; ++round) {
        builder.fill_pockets();
        set = builder.skeleton_mask();
        remove_redundant_pixels(set, builder.coverage_priority(set));
        builder.reset_to(set);
        if (round == kMaxTopUpRounds) break;
        bool grew = false;
        while (static_cast<double>(builder.uncovered()) > budget) {
            double best_gain = 0.0;
            std::size_t best = n;
            for (std::size_t i = 0; i < n; ++i) {
                const double g = builder.tip_gain(out.contour.points[i]);
                if (g > best_gain) {
                    best_gain = g;
                    best = i;
                }
            }
            if (best == n || best_gain < options.min_branch_gain) break;
            builder.grow(out.contour.points[best]);
            out.tips.push_back(best);
            grew = true;
        }
        if (!grew) break;
    }
    std::sort(out.tips.begin(), out.tips.end());
    out.tips.erase(std::unique(out.tips.begin(), out.tips.end()), out.tips.end());
    out.skeleton = SkeletonRaster::from_mask(set, field);
    return out;
}

SkeletonRaster medial_axis(const BinaryMask& mask, const MedialAxisOptions& options) {
    return medial_axis_detailed(mask, options).skeleton;
}

std::vector<std::vector<std::size_t>> ladder_tip_sets(const MedialAxisResult& axis, std::size_t k_min,
                                                      std::size_t k_max) {
    const auto& pts = axis.contour.points;
    const std::size_t n = pts.size();
    std::vector<std::vector<std::size_t>> out;
    std::set<std::size_t> kept;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const std::vector<std::size_t> v = dce_survivors(axis.removal_order, k);
        const std::size_t m = v.size();
        // Owner of each tip: the surviving vertex nearest along the contour.
        std::map<std::size_t, std::vector<std::size_t>> owned;
        for (std::size_t t : axis.tips) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < m; ++i) {
                const std::size_t di = circular_distance(t, v[i], n);
                const std::size_t db = circular_distance(t, v[best], n);
                if (di < db) best = i;
            }
            if (m > 0) owned[best].push_back(t);
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (m >= 3) {
                const Point a = pts[v[(i + m - 1) % m]];
                const Point b = pts[v[i]];
                const Point c = pts[v[(i + 1) % m]];
                const long cross = static_cast<long>(b.x - a.x) * (c.y - b.y) - static_cast<long>(b.y - a.y) * (c.x - b.x);
                if (cross > 0) continue;  // reflex in screen orientation
            }
            const auto it = owned.find(i);
            if (it == owned.end()) continue;
            std::size_t best = it->second.front();
            for (std::size_t t : it->second) {
                if (circular_distance(t, v[i], n) < circular_distance(best, v[i], n)) best = t;
            }
            kept.insert(best);
        }
        out.emplace_back(kept.begin(), kept.end());
    }
    return out;
}

CandidateLadder build_ladder(const BinaryMask& mask, const LadderOptions& options) {
    if (options.k_min < 3) throw Error(ErrorCode::InvalidArgument, "k_min must be at least 3");
    if (options.k_max < options.k_min) throw Error(ErrorCode::InvalidArgument, "k_max must not be below k_min");
    const BinaryMask source = options.fill_holes ? fill_holes(mask) : mask;
    const MedialAxisResult axis = medial_axis_detailed(source, {options.min_branch_gain, options.flat_tip_scale, options.coverage_budget});
    if (axis.contour.size() < options.k_min) {
        throw Error(ErrorCode::ContourTooShort, "contour has fewer vertices than k_min");
    }

    std::map<Point, std::size_t> tip_at;
    for (std::size_t t : axis.tips) tip_at.emplace(axis.contour.points[t], t);
    const auto tip_of = [&](Point e) -> std::optional<std::size_t> {
        if (const auto it = tip_at.find(e); it != tip_at.end()) return it->second;
        std::optional<std::size_t> best;
        int best_d = 5;
        for (const auto& [p, t] : tip_at) {
            const int d = static_cast<int>(squared_distance(p, e));
            if (d < best_d) {
                best_d = d;
                best = t;
            }
        }
        return best;
    };

    const auto tip_sets = ladder_tip_sets(axis, options.k_min, options.k_max);
    CandidateLadder ladder;
    ladder.steps.push_back(axis.skeleton);
    ladder.dce_k.push_back(axis.contour.size());
    SkeletonGraph graph = decompose(axis.skeleton);
    for (std::size_t k = options.k_max; k + 1 > options.k_min; --k) {
        std::set<Point> supported;
        for (std::size_t t : tip_sets[k - options.k_min]) supported.insert(axis.contour.points[t]);
        while (true) {
            std::set<BranchId> doomed;
            for (const Branch& b : graph.branches()) {
                if (!graph.is_leaf(b)) continue;
                const Point end = graph.node_kind(b.path.front()) == NodeKind::Endpoint ? b.path.front() : b.path.back();
                const auto tip = tip_of(end);
                if (!tip || !supported.count(axis.contour.points[*tip])) doomed.insert(b.id);
            }
            if (doomed.empty()) break;
            graph = prune_branch(graph, doomed);
        }
        ladder.steps.push_back(graph.raster());
        ladder.dce_k.push_back(k);
    }
    return ladder;
}

CandidateLadder build_ladder(const BinaryMask& mask, std::size_t k_min, std::size_t k_max) {
    LadderOptions options;
    options.k_min = k_min;
    options.k_max = k_max;
    return build_ladder(mask, options);
}

}  // namespace skelforge

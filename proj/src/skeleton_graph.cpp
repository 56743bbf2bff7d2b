#include "skelforge/skeleton_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <queue>

#include "skelforge/error.hpp"

namespace skelforge {

std::string format_branch_id(BranchId id) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id));
    return buf;
}

BranchId parse_branch_id(const std::string& text) {
    if (text.empty() || text.size() > 16) throw Error(ErrorCode::UnknownBranchId, "malformed branch id '" + text + "'");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 16);
    if (end == nullptr || *end != '\0') throw Error(ErrorCode::UnknownBranchId, "malformed branch id '" + text + "'");
    return static_cast<BranchId>(v);
}

namespace {

/// Dense point -> index lookup over the skeleton grid.
class PointIndex {
public:
    explicit PointIndex(const SkeletonRaster& r) : width_(r.width), height_(r.height) {
        slots_.assign(static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height), -1);
        for (std::size_t i = 0; i < r.points.size(); ++i) slots_[slot(r.points[i])] = static_cast<int>(i);
    }
    int find(Point p) const {
        if (p.x < 0 || p.y < 0 || p.x >= width_ || p.y >= height_) return -1;
        return slots_[slot(p)];
    }

private:
    std::size_t slot(Point p) const {
        return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(p.x);
    }
    int width_;
    int height_;
    std::vector<int> slots_;
};

BranchId hash_path(const std::vector<Point>& path, BranchKind kind) {
    std::vector<Point> sorted = path;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(kind));
    for (Point p : sorted) {
        mix(static_cast<std::uint32_t>(p.x));
        mix(static_cast<std::uint32_t>(p.y));
    }
    return h;
}

double path_length(const std::vector<Point>& path, bool closed) {
    double len = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) len += step_length(path[i - 1], path[i]);
    if (closed && path.size() > 2) len += step_length(path.back(), path.front());
    return len;
}

}  // namespace

std::vector<Point> SkeletonGraph::endpoints() const {
    std::vector<Point> out;
    for (const Node& n : nodes_) {
        if (n.kind == NodeKind::Endpoint) out.push_back(n.point);
    }
    return out;
}

std::vector<Point> SkeletonGraph::junctions() const {
    std::vector<Point> out;
    for (const Node& n : nodes_) {
        if (n.kind == NodeKind::Junction) out.push_back(n.point);
    }
    return out;
}

std::optional<NodeKind> SkeletonGraph::node_kind(Point p) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), p,
                                     [](const Node& n, Point q) { return n.point < q; });
    if (it == nodes_.end() || it->point != p) return std::nullopt;
    return it->kind;
}

const Branch* SkeletonGraph::find(BranchId id) const {
    for (const Branch& b : branches_) {
        if (b.id == id) return &b;
    }
    return nullptr;
}

bool SkeletonGraph::is_leaf(const Branch& branch) const {
    if (branch.kind != BranchKind::Open || branch.path.size() < 2) return false;
    const bool a = node_kind(branch.path.front()) == NodeKind::Endpoint;
    const bool b = node_kind(branch.path.back()) == NodeKind::Endpoint;
    return a != b;
}

BinaryMask SkeletonGraph::reassemble() const {
    BinaryMask m(raster_.width, raster_.height);
    for (const Branch& b : branches_) {
        for (Point p : b.path) m.set(p);
    }
    for (const Node& n : nodes_) m.set(n.point);
    return m;
}

SkeletonGraph decompose(const SkeletonRaster& raster) {
    SkeletonGraph g;
    g.raster_ = raster;
    if (raster.points.empty()) return g;

    const PointIndex index(raster);
    const std::size_t n = raster.points.size();
    std::vector<std::vector<int>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (Point d : kNeighbors8) {
            const int j = index.find(raster.points[i] + d);
            if (j >= 0) adj[i].push_back(j);
        }
    }
    const auto is_node = [&](std::size_t i) { return adj[i].size() == 1 || adj[i].size() >= 3; };

    for (std::size_t i = 0; i < n; ++i) {
        if (adj[i].size() == 1) g.nodes_.push_back({raster.points[i], NodeKind::Endpoint});
        if (adj[i].size() >= 3) g.nodes_.push_back({raster.points[i], NodeKind::Junction});
    }

    std::vector<std::uint8_t> visited(n, 0);
    std::set<std::pair<int, int>> direct_edges;
    const auto add_branch = [&](std::vector<Point> path, BranchKind kind) {
        Branch b;
        b.kind = kind;
        if (kind == BranchKind::Open && path.back() < path.front()) std::reverse(path.begin(), path.end());
        b.length = path_length(path, kind == BranchKind::Cycle);
        b.id = hash_path(path, kind);
        b.path = std::move(path);
        g.branches_.push_back(std::move(b));
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (adj[i].empty()) {
            add_branch({raster.points[i]}, BranchKind::Isolated);
            continue;
        }
        if (!is_node(i)) continue;
        for (int m : adj[i]) {
            const auto mi = static_cast<std::size_t>(m);
            if (is_node(mi)) {
                const auto key = std::minmax(static_cast<int>(i), m);
                if (direct_edges.insert(key).second) add_branch({raster.points[i], raster.points[mi]}, BranchKind::Open);
                continue;
            }
            if (visited[mi]) continue;
            std::vector<Point> path{raster.points[i]};
            std::size_t prev = i;
            std::size_t cur = mi;
            while (!is_node(cur)) {
                visited[cur] = 1;
                path.push_back(raster.points[cur]);
                const auto a = static_cast<std::size_t>(adj[cur][0]);
                const auto b = static_cast<std::size_t>(adj[cur][1]);
                const std::size_t nxt = (a == prev) ? b : a;
                prev = cur;
                cur = nxt;
                if (visited[cur] && !is_node(cur)) break;  // defensive: malformed loop
            }
            path.push_back(raster.points[cur]);
            add_branch(std::move(path), BranchKind::Open);
        }
    }

    // Remaining degree-2 pixels form node-free cycles.
    for (std::size_t i = 0; i < n; ++i) {
        if (visited[i] || adj[i].size() != 2) continue;
        std::vector<Point> path;
        std::size_t prev = static_cast<std::size_t>(adj[i][0]);
        std::size_t cur = i;
        while (!visited[cur]) {
            visited[cur] = 1;
            path.push_back(raster.points[cur]);
            const auto a = static_cast<std::size_t>(adj[cur][0]);
            const auto b = static_cast<std::size_t>(adj[cur][1]);
            const std::size_t nxt = (a == prev) ? b : a;
            prev = cur;
            cur = nxt;
        }
        add_branch(std::move(path), BranchKind::Cycle);
    }

    std::sort(g.branches_.begin(), g.branches_.end(), [](const Branch& a, const Branch& b) {
        const Point a0 = std::min(a.path.front(), a.path.back());
        const Point b0 = std::min(b.path.front(), b.path.back());
        if (a0 != b0) return a0 < b0;
        const Point a1 = std::max(a.path.front(), a.path.back());
        const Point b1 = std::max(b.path.front(), b.path.back());
        if (a1 != b1) return a1 < b1;
        return a.path < b.path;
    });
    return g;
}

SkeletonGraph prune_branch(const SkeletonGraph& graph, const std::set<BranchId>& branch_ids) {
    const SkeletonRaster& raster = graph.raster();
    BinaryMask set = raster.mask();
    std::vector<Point> attach;
    for (BranchId id : branch_ids) {
        const Branch* b = graph.find(id);
        if (b == nullptr) throw Error(ErrorCode::UnknownBranchId, format_branch_id(id));
        if (!graph.is_leaf(*b)) throw Error(ErrorCode::NotALeafBranch, format_branch_id(id));
        const bool front_is_end = graph.node_kind(b->path.front()) == NodeKind::Endpoint;
        const Point junction = front_is_end ? b->path.back() : b->path.front();
        for (Point p : b->path) {
            if (p != junction) set.set(p, false);
        }
        attach.push_back(junction);
    }

    // Dissolve what the removal left behind at junctions: dangling stubs and
    // pixels that no longer carry connectivity.
    std::vector<std::uint8_t> former_junction(set.bits().size(), 0);
    for (Point j : graph.junctions()) former_junction[set.index(j.x, j.y)] = 1;
    std::vector<Point> stubs = attach;
    while (!stubs.empty()) {
        std::vector<Point> next;
        for (Point p : stubs) {
            if (!set.at(p) || neighbor_count(set, p) != 1) continue;
            set.set(p, false);
            for (Point d : kNeighbors8) {
                const Point q = p + d;
                if (set.get(q) && former_junction[set.index(q.x, q.y)]) next.push_back(q);
            }
        }
        stubs = std::move(next);
    }
    std::vector<Point> candidates;
    for (std::size_t i = 0; i < former_junction.size(); ++i) {
        if (former_junction[i] && set.bits()[i]) candidates.push_back(set.point_at(i));
    }
    if (!candidates.empty()) remove_redundant_pixels(set, {}, candidates);

    SkeletonRaster out;
    out.width = raster.width;
    out.height = raster.height;
    for (std::size_t i = 0; i < raster.points.size(); ++i) {
        if (!set.at(raster.points[i])) continue;
        out.points.push_back(raster.points[i]);
        if (raster.has_radii()) out.radii.push_back(raster.radii[i]);
    }
    return decompose(out);
}

GeodesicTree geodesic_tree(const SkeletonRaster& raster, std::size_t source_index) {
    const PointIndex index(raster);
    const std::size_t n = raster.points.size();
    GeodesicTree t;
    t.distance.assign(n, -1.0);
    t.pixels.assign(n, 0);
    t.predecessor.assign(n, -1);
    if (source_index >= n) return t;
    constexpr double kTie = 1e-9;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    std::vector<std::uint8_t> done(n, 0);
    t.distance[source_index] = 0.0;
    t.pixels[source_index] = 1;
    queue.push({0.0, source_index});
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (done[u]) continue;
        done[u] = 1;
        const Point pu = raster.points[u];
        for (Point off : kNeighbors8) {
            const int vi = index.find(pu + off);
            if (vi < 0) continue;
            const auto v = static_cast<std::size_t>(vi);
            if (done[v]) continue;
            const double nd = d + step_length(pu, raster.points[v]);
            const bool better = t.distance[v] < 0.0 || nd < t.distance[v] - kTie;
            const bool tie = !better && std::abs(nd - t.distance[v]) <= kTie && t.predecessor[v] >= 0 &&
                             pu < raster.points[static_cast<std::size_t>(t.predecessor[v])];
            if (better || tie) {
                t.distance[v] = better ? nd : t.distance[v];
                t.pixels[v] = t.pixels[u] + 1;
                t.predecessor[v] = static_cast<int>(u);
                if (better) queue.push({nd, v});
            }
        }
    }
    return t;
}

std::vector<Point> geodesic_path(const SkeletonGraph& graph, Point a, Point b) {
    const SkeletonRaster& r = graph.raster();
    const auto ia = std::lower_bound(r.points.begin(), r.points.end(), a);
    const auto ib = std::lower_bound(r.points.begin(), r.points.end(), b);
    if (ia == r.points.end() || *ia != a || ib == r.points.end() || *ib != b) {
        throw Error(ErrorCode::NotSkeletonPoint, "path endpoints must be skeleton points");
    }
    // Grow from b so that walking predecessors yields a..b in order.
    const auto src = static_cast<std::size_t>(ib - r.points.begin());
    const auto dst = static_cast<std::size_t>(ia - r.points.begin());
    const GeodesicTree t = geodesic_tree(r, src);
    if (t.distance[dst] < 0.0) throw Error(ErrorCode::Disconnected, "points lie in different skeleton components");
    std::vector<Point> path;
    for (int cur = static_cast<int>(dst); cur >= 0; cur = t.predecessor[static_cast<std::size_t>(cur)]) {
        path.push_back(r.points[static_cast<std::size_t>(cur)]);
    }
    return path;
}

namespace {

/// Branches lying on a cycle that encloses background, grouped by the
/// 2-edge-connected component they belong to.
std::vector<std::vector<const Branch*>> cycle_groups(const SkeletonGraph& graph) {
    std::vector<std::vector<const Branch*>> groups;
    const auto& branches = graph.branches();
    for (const Branch& b : branches) {
        if (b.kind == BranchKind::Cycle) groups.push_back({&b});
    }
    // Branch-level multigraph over node points.
    std::map<Point, int> node_id;
    for (const Node& n : graph.nodes()) node_id.emplace(n.point, static_cast<int>(node_id.size()));
    std::vector<std::pair<int, int>> edges;
    std::vector<const Branch*> edge_branch;
    for (const Branch& b : branches) {
        if (b.kind != BranchKind::Open) continue;
        edges.emplace_back(node_id.at(b.path.front()), node_id.at(b.path.back()));
        edge_branch.push_back(&b);
    }
    const std::size_t nv = node_id.size();
    std::vector<std::vector<std::pair<int, int>>> adj(nv);  // (neighbor, edge)
    for (std::size_t e = 0; e < edges.size(); ++e) {
        adj[static_cast<std::size_t>(edges[e].first)].emplace_back(edges[e].second, static_cast<int>(e));
        adj[static_cast<std::size_t>(edges[e].second)].emplace_back(edges[e].first, static_cast<int>(e));
    }
    // Tarjan bridge finding.
    std::vector<int> disc(nv, -1);
    std::vector<int> low(nv, 0);
    std::vector<std::uint8_t> bridge(edges.size(), 0);
    int timer = 0;
    std::function<void(int, int)> dfs = [&](int u, int parent_edge) {
        disc[static_cast<std::size_t>(u)] = low[static_cast<std::size_t>(u)] = timer++;
        for (auto [v, e] : adj[static_cast<std::size_t>(u)]) {
            if (e == parent_edge) continue;
            if (disc[static_cast<std::size_t>(v)] < 0) {
                dfs(v, e);
                low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(v)]);
                if (low[static_cast<std::size_t>(v)] > disc[static_cast<std::size_t>(u)]) bridge[static_cast<std::size_t>(e)] = 1;
            } else {
                low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], disc[static_cast<std::size_t>(v)]);
            }
        }
    };
    for (std::size_t v = 0; v < nv; ++v) {
        if (disc[v] < 0) dfs(static_cast<int>(v), -1);
    }
    // Group non-bridge edges by connectivity through non-bridge edges.
    std::vector<int> comp(nv, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < nv; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{static_cast<int>(s)};
        comp[s] = ncomp;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (auto [v, e] : adj[static_cast<std::size_t>(u)]) {
                if (bridge[static_cast<std::size_t>(e)] || comp[static_cast<std::size_t>(v)] >= 0) continue;
                comp[static_cast<std::size_t>(v)] = ncomp;
                stack.push_back(v);
            }
        }
        ++ncomp;
    }
    std::vector<std::vector<const Branch*>> by_comp(static_cast<std::size_t>(ncomp));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!bridge[e]) by_comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(edges[e].first)])].push_back(edge_branch[e]);
    }
    const SkeletonRaster& r = graph.raster();
    for (auto& group : by_comp) {
        if (group.empty()) continue;
        BinaryMask pixels(r.width, r.height);
        for (const Branch* b : group) {
            for (Point p : b->path) pixels.set(p);
        }
        // Junction-cluster triangles are adjacency artifacts, not loops.
        if (euler_number8(pixels) < static_cast<long>(count_components8(pixels))) groups.push_back(std::move(group));
    }
    return groups;
}

}  // namespace

SkeletonGraph prune_by_boxes(const SkeletonGraph& graph, const std::vector<Rect>& boxes) {
    std::vector<Point> preserved;
    for (Point e : graph.endpoints()) {
        if (std::any_of(boxes.begin(), boxes.end(), [e](const Rect& r) { return r.contains(e); })) preserved.push_back(e);
    }
    if (preserved.size() < 2) {
        throw Error(ErrorCode::TooFewPreservedEndpoints, "boxes must cover at least two endpoints");
    }
    const SkeletonRaster& r = graph.raster();
    BinaryMask keep(r.width, r.height);
    for (std::size_t i = 0; i < preserved.size(); ++i) {
        for (std::size_t j = i + 1; j < preserved.size(); ++j) {
            std::vector<Point> path;
            try {
                path = geodesic_path(graph, preserved[i], preserved[j]);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::Disconnected) continue;
                throw;
            }
            for (Point p : path) keep.set(p);
        }
    }
    for (const auto& group : cycle_groups(graph)) {
        const bool touched = std::any_of(group.begin(), group.end(), [&](const Branch* b) {
            return std::any_of(b->path.begin(), b->path.end(), [&](Point p) { return keep.at(p); });
        });
        if (!touched) continue;
        for (const Branch* b : group) {
            for (Point p : b->path) keep.set(p);
        }
    }
    SkeletonRaster out;
    out.width = r.width;
    out.height = r.height;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        if (!keep.at(r.points[i])) continue;
        out.points.push_back(r.points[i]);
        if (r.has_radii()) out.radii.push_back(r.radii[i]);
    }
    return decompose(out);
}

}  // namespace skelforge

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "skelforge/skeleton.hpp"

namespace skelforge {

/// Content-derived branch identifier: identical pixel paths always get the
/// same id, so ids survive re-decomposition of untouched branches.
using BranchId = std::uint64_t;

std::string format_branch_id(BranchId id);
BranchId parse_branch_id(const std::string& text);

enum class NodeKind { Endpoint, Junction };

struct Node {
    Point point;
    NodeKind kind;
};

enum class BranchKind {
    Open,      // runs between two nodes
    Cycle,     // closed loop without nodes
    Isolated,  // a lone skeleton pixel
};

struct Branch {
    BranchId id = 0;
    BranchKind kind = BranchKind::Open;
    /// For open branches: first and last entries are the terminal nodes.
    std::vector<Point> path;
    /// Geodesic length along `path`, diagonal steps count sqrt(2).
    double length = 0.0;
};

class SkeletonGraph {
public:
    SkeletonGraph() = default;

    const SkeletonRaster& raster() const noexcept { return raster_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Branch>& branches() const noexcept { return branches_; }

    std::vector<Point> endpoints() const;
    std::vector<Point> junctions() const;
    std::optional<NodeKind> node_kind(Point p) const;

    const Branch* find(BranchId id) const;
    /// An open branch with exactly one endpoint terminal.
    bool is_leaf(const Branch& branch) const;

    /// Union of all branch paths and nodes.
    BinaryMask reassemble() const;

    friend SkeletonGraph decompose(const SkeletonRaster& raster);

private:
    SkeletonRaster raster_;
    std::vector<Node> nodes_;
    std::vector<Branch> branches_;
};

/// Split a skeleton into endpoints (one neighbor), junctions (three or more
/// neighbors) and maximal branches between them.
SkeletonGraph decompose(const SkeletonRaster& raster);

/// Remove leaf branches (interior and endpoint; the junction stays). Junction
/// pixels left redundant or dangling by the removal are dissolved.
SkeletonGraph prune_branch(const SkeletonGraph& graph, const std::set<BranchId>& branch_ids);

/// Keep only skeleton paths between endpoints covered by `boxes`.
SkeletonGraph prune_by_boxes(const SkeletonGraph& graph, const std::vector<Rect>& boxes);

/// Shortest path along skeleton pixels; equal-length alternatives resolve to
/// the raster-smaller predecessor.
std::vector<Point> geodesic_path(const SkeletonGraph& graph, Point a, Point b);

/// Distances and hop counts from `source` to every skeleton point along
/// shortest paths (hops = pixels on the path, source included). Unreachable
/// points get a negative distance.
struct GeodesicTree {
    std::vector<double> distance;
    std::vector<int> pixels;
    std::vector<int> predecessor;
};
GeodesicTree geodesic_tree(const SkeletonRaster& raster, std::size_t source_index);

}  // namespace skelforge

#pragma once

#include <cstddef>
#include <vector>

#include "skelforge/shape_core.hpp"

namespace skelforge {

/// A polygon obtained by discrete curve evolution: a subsequence of the
/// source contour together with the current relevance of each vertex.
struct DcePolygon {
    std::vector<std::size_t> vertices;  // indices into the source contour, ascending
    std::vector<double> relevance;      // aligned with `vertices`
};

/// Relevance of vertex `v` between `prev` and `next`:
/// turn angle times l1*l2/(l1+l2), lengths divided by `total_length`.
double dce_relevance(Point prev, Point v, Point next, double total_length);

/// Evolve a closed contour by repeatedly deleting the least relevant vertex
/// (ties to the lower contour index) until `k_min` vertices remain. The
/// returned list starts with the full contour and ends with `k_min` vertices.
std::vector<DcePolygon> dce_evolve(const Contour& contour, std::size_t k_min);

/// Contour indices in deletion order down to three vertices, followed by the
/// last three ordered by ascending final relevance. The last entries are the
/// most significant vertices.
std::vector<std::size_t> dce_removal_order(const Contour& contour);

/// Vertices that survive when the evolution stops at `k` vertices, ascending.
std::vector<std::size_t> dce_survivors(const std::vector<std::size_t>& removal_order, std::size_t k);

}  // namespace skelforge

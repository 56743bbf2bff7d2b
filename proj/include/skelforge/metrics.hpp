#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "skelforge/skeleton.hpp"

namespace skelforge {

/// Union of the discs B(s, r(s)); a pixel is inside when its distance to
/// some skeleton point is at most that point's radius.
BinaryMask reconstruct(const SkeletonRaster& skeleton);

/// |area(shape) - area(reconstruction)| / area(shape), clamped to [0, 1].
double reconstruction_error(const SkeletonRaster& skeleton, const BinaryMask& shape);

/// Diagnostic only: symmetric difference area over shape area. Catches
/// reconstructions that leak outside the shape, which the area difference
/// alone can hide.
double reconstruction_error_xor(const SkeletonRaster& skeleton, const BinaryMask& shape);

/// Point count over the mean endpoint-to-endpoint path length (in pixels).
/// With fewer than two endpoints the mean is the point count itself.
double normalized_curve_length(const SkeletonRaster& skeleton);

/// 1 / (Gamma + 1); 1.0 for an empty skeleton.
double simplicity(const SkeletonRaster& skeleton);

/// Mean distance from each detected point to its nearest ground-truth point.
double aep(const SkeletonRaster& detected, const SkeletonRaster& gt);

struct F1Result {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t matched = 0;
};

/// Greedy one-to-one matching, closest pairs first, within `tolerance`.
F1Result f1_score(const SkeletonRaster& detected, const SkeletonRaster& gt, double tolerance);

/// Conventional tolerance: 0.0075 of the image diagonal.
double default_f1_tolerance(int width, int height);

using SimilarityMatrix = std::vector<std::vector<double>>;

/// Percentage of same-class items among the top 2 * per_class ranks of each
/// query (higher similarity ranks first, ties by index). The query itself
/// always holds rank one.
double bulls_eye(const SimilarityMatrix& similarity, const std::vector<std::string>& labels, std::size_t per_class);

SimilarityMatrix load_similarity_csv(const std::string& path);
SimilarityMatrix parse_similarity_csv(const std::string& text);

struct MetricReport {
    double re = 1.0;
    double ss = 1.0;
    double re_xor = 1.0;
    std::size_t point_count = 0;
    std::size_t endpoint_count = 0;
    std::size_t junction_count = 0;
};

MetricReport evaluate(const SkeletonRaster& skeleton, const BinaryMask& shape);

nlohmann::json to_json(const MetricReport& report);

}  // namespace skelforge

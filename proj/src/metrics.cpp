#include "skelforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "skelforge/error.hpp"
#include "skelforge/skeleton_graph.hpp"

namespace skelforge {

namespace {

constexpr double kRadiusSlack = 1e-9;

void require_same_grid(const SkeletonRaster& a, const SkeletonRaster& b) {
    if (a.width != b.width || a.height != b.height) {
        throw Error(ErrorCode::DimensionMismatch, "skeletons live on different grids");
    }
}

std::vector<std::size_t> endpoint_indices(const SkeletonRaster& s) {
    const BinaryMask m = s.mask();
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (neighbor_count(m, s.points[i]) == 1) out.push_back(i);
    }
    return out;
}

}  // namespace

BinaryMask reconstruct(const SkeletonRaster& skeleton) {
    BinaryMask out(std::max(skeleton.width, 1), std::max(skeleton.height, 1));
    if (skeleton.empty()) return out;
    if (!skeleton.has_radii()) throw Error(ErrorCode::MissingRadii, "skeleton has no radii");
    for (std::size_t i = 0; i < skeleton.points.size(); ++i) {
        const double r = skeleton.radii[i];
        if (r < 0.0) continue;
        const double r2 = r * r + kRadiusSlack;
        const int reach = static_cast<int>(std::floor(r + kRadiusSlack));
        const Point c = skeleton.points[i];
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dx = -reach; dx <= reach; ++dx) {
                if (static_cast<double>(dx * dx + dy * dy) > r2) continue;
                if (out.in_bounds(c.x + dx, c.y + dy)) out.set(c.x + dx, c.y + dy);
            }
        }
    }
    return out;
}

double reconstruction_error(const SkeletonRaster& skeleton, const BinaryMask& shape) {
    const double area = static_cast<double>(shape.area());
    if (area <= 0.0) throw Error(ErrorCode::EmptyShape, "shape has no foreground");
    if (skeleton.empty()) return 1.0;
    if (skeleton.width != shape.width() || skeleton.height != shape.height()) {
        throw Error(ErrorCode::DimensionMismatch, "skeleton and shape grids differ");
    }
    const double covered = static_cast<double>(reconstruct(skeleton).area());
    return std::min(1.0, std::abs(area - covered) / area);
}

double reconstruction_error_xor(const SkeletonRaster& skeleton, const BinaryMask& shape) {
    const double area = static_cast<double>(shape.area());
    if (area <= 0.0) throw Error(ErrorCode::EmptyShape, "shape has no foreground");
    if (skeleton.empty()) return 1.0;
    if (skeleton.width != shape.width() || skeleton.height != shape.height()) {
        throw Error(ErrorCode::DimensionMismatch, "skeleton and shape grids differ");
    }
    const BinaryMask r = reconstruct(skeleton);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < r.bits().size(); ++i) diff += (r.bits()[i] != shape.bits()[i]) ? 1 : 0;
    return static_cast<double>(diff) / area;
}

double normalized_curve_length(const SkeletonRaster& skeleton) {
    if (skeleton.empty()) return 0.0;
    const auto ends = endpoint_indices(skeleton);
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a + 1 < ends.size(); ++a) {
        const GeodesicTree tree = geodesic_tree(skeleton, ends[a]);
        for (std::size_t b = a + 1; b < ends.size(); ++b) {
            if (tree.distance[ends[b]] < 0.0) continue;
            total += tree.pixels[ends[b]];
            ++pairs;
        }
    }
    const double n = static_cast<double>(skeleton.size());
    const double mean = pairs > 0 ? total / static_cast<double>(pairs) : n;
    return n / mean;
}

double simplicity(const SkeletonRaster& skeleton) {
    return 1.0 / (normalized_curve_length(skeleton) + 1.0);
}

double aep(const SkeletonRaster& detected, const SkeletonRaster& gt) {
    if (detected.empty() || gt.empty()) throw Error(ErrorCode::EmptySkeleton, "AEP needs two non-empty skeletons");
    require_same_grid(detected, gt);
    const auto d2 = squared_distance_to_sites(gt.mask());
    double sum = 0.0;
    for (Point p : detected.points) {
        sum += std::sqrt(static_cast<double>(d2[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(detected.width) +
                                                 static_cast<std::size_t>(p.x)]));
    }
    return sum / static_cast<double>(detected.size());
}

F1Result f1_score(const SkeletonRaster& detected, const SkeletonRaster& gt, double tolerance) {
    if (tolerance < 0.0 || !std::isfinite(tolerance)) throw Error(ErrorCode::InvalidArgument, "tolerance must be >= 0");
    F1Result out;
    if (detected.empty() || gt.empty()) return out;
    require_same_grid(detected, gt);

    std::vector<int> gt_at(static_cast<std::size_t>(gt.width) * static_cast<std::size_t>(gt.height), -1);
    for (std::size_t j = 0; j < gt.points.size(); ++j) {
        const Point p = gt.points[j];
        gt_at[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(gt.width) + static_cast<std::size_t>(p.x)] = static_cast<int>(j);
    }
    const double tol2 = tolerance * tolerance + kRadiusSlack;
    const int reach = static_cast<int>(std::floor(tolerance + kRadiusSlack));
    std::vector<std::tuple<std::int64_t, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < detected.points.size(); ++i) {
        const Point c = detected.points[i];
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dx = -reach; dx <= reach; ++dx) {
                const std::int64_t d2 = static_cast<std::int64_t>(dx) * dx + static_cast<std::int64_t>(dy) * dy;
                if (static_cast<double>(d2) > tol2) continue;
                const int x = c.x + dx;
                const int y = c.y + dy;
                if (x < 0 || y < 0 || x >= gt.width || y >= gt.height) continue;
                const int j = gt_at[static_cast<std::size_t>(y) * static_cast<std::size_t>(gt.width) + static_cast<std::size_t>(x)];
                if (j >= 0) pairs.emplace_back(d2, i, static_cast<std::size_t>(j));
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::uint8_t> used_d(detected.size(), 0);
    std::vector<std::uint8_t> used_g(gt.size(), 0);
    for (const auto& [d2, i, j] : pairs) {
        if (used_d[i] || used_g[j]) continue;
        used_d[i] = used_g[j] = 1;
        ++out.matched;
    }
    out.precision = static_cast<double>(out.matched) / static_cast<double>(detected.size());
    out.recall = static_cast<double>(out.matched) / static_cast<double>(gt.size());
    if (out.precision + out.recall > 0.0) out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

double default_f1_tolerance(int width, int height) {
    return 0.0075 * std::hypot(static_cast<double>(width), static_cast<double>(height));
}

double bulls_eye(const SimilarityMatrix& similarity, const std::vector<std::string>& labels, std::size_t per_class) {
    const std::size_t n = similarity.size();
    if (labels.size() != n) throw Error(ErrorCode::DimensionMismatch, "label count differs from matrix size");
    for (const auto& row : similarity) {
        if (row.size() != n) throw Error(ErrorCode::DimensionMismatch, "similarity matrix is not square");
    }
    if (n == 0 || per_class == 0) throw Error(ErrorCode::InvalidArgument, "need items and a positive class size");
    const std::size_t window = std::min(n, 2 * per_class);
    std::size_t hits = 0;
    std::vector<std::size_t> order(n);
    for (std::size_t q = 0; q < n; ++q) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if ((a == q) != (b == q)) return a == q;
            if (similarity[q][a] != similarity[q][b]) return similarity[q][a] > similarity[q][b];
            return a < b;
        });
        for (std::size_t r = 0; r < window; ++r) {
            if (labels[order[r]] == labels[q]) ++hits;
        }
    }
    return 100.0 * static_cast<double>(hits) / (static_cast<double>(n) * static_cast<double>(per_class));
}

SimilarityMatrix parse_similarity_csv(const std::string& text) {
    SimilarityMatrix m;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error(ErrorCode::DecodeError, "bad similarity value '" + cell + "'");
            }
        }
        m.push_back(std::move(row));
    }
    for (const auto& row : m) {
        if (row.size() != m.size()) throw Error(ErrorCode::DimensionMismatch, "similarity matrix is not square");
    }
    return m;
}

SimilarityMatrix load_similarity_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_similarity_csv(buf.str());
}

MetricReport evaluate(const SkeletonRaster& skeleton, const BinaryMask& shape) {
    MetricReport r;
    r.re = reconstruction_error(skeleton, shape);
    r.re_xor = reconstruction_error_xor(skeleton, shape);
    r.ss = simplicity(skeleton);
    r.point_count = skeleton.size();
    const BinaryMask m = skeleton.mask();
    for (Point p : skeleton.points) {
        const int k = neighbor_count(m, p);
        if (k == 1) ++r.endpoint_count;
        if (k >= 3) ++r.junction_count;
    }
    return r;
}

nlohmann::json to_json(const MetricReport& report) {
    return {
        {"re", report.re},
        {"ss", report.ss},
        {"re_xor_diagnostic", report.re_xor},
        {"point_count", report.point_count},
        {"endpoint_count", report.endpoint_count},
        {"junction_count", report.junction_count},
    };
}

}  // namespace skelforge

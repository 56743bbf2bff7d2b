#pragma once

// Shape and skeleton generators shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "skelforge/mask.hpp"
#include "skelforge/shape_core.hpp"
#include "skelforge/skeleton.hpp"
#include "skelforge/skeleton_graph.hpp"
#include "skelforge/skeletonizer.hpp"
#include "skelforge/storage.hpp"

namespace fixtures {

using skelforge::BinaryMask;
using skelforge::Point;
using skelforge::SkeletonRaster;

inline BinaryMask disc(int r, int pad = 2) {
    const int n = 2 * (r + pad) + 1;
    const int c = r + pad;
    BinaryMask m(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if ((x - c) * (x - c) + (y - c) * (y - c) <= r * r) m.set(x, y);
        }
    }
    return m;
}

inline BinaryMask rect(int w, int h, int pad = 5) {
    BinaryMask m(w + 2 * pad, h + 2 * pad);
    for (int y = pad; y < pad + h; ++y) {
        for (int x = pad; x < pad + w; ++x) m.set(x, y);
    }
    return m;
}

/// Chain of overlapping discs, holes filled, largest component kept.
inline BinaryMask random_blob(std::mt19937& rng, int size = 96) {
    BinaryMask m(size, size);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int discs = 3 + static_cast<int>(rng() % 4);
    const double margin = 25.0 * size / 112.0 + 3.0;
    double cx = size / 2.0;
    double cy = size / 2.0;
    for (int k = 0; k < discs; ++k) {
        const double r = (8.0 + u(rng) * 14.0) * size / 112.0;
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y);
            }
        }
        const double a = u(rng) * 6.283185307179586;
        cx = std::clamp(cx + std::cos(a) * r * 0.9, margin, size - margin);
        cy = std::clamp(cy + std::sin(a) * r * 0.9, margin, size - margin);
    }
    return skelforge::fill_holes(skelforge::connected_components(m).front());
}

inline BinaryMask random_annulus(std::mt19937& rng) {
    std::uniform_int_distribution<int> outer(12, 20);
    const int r_out = outer(rng);
    std::uniform_int_distribution<int> inner(3, r_out - 6);
    const int r_in = inner(rng);
    std::uniform_int_distribution<int> shift(-2, 2);
    const int n = 2 * r_out + 9;
    const double cx = n / 2 + shift(rng) * 0.5;
    const double cy = n / 2 + shift(rng) * 0.5;
    const double ix = cx + shift(rng);
    const double iy = cy + shift(rng);
    BinaryMask m(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double d_out = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const double d_in = (x - ix) * (x - ix) + (y - iy) * (y - iy);
            if (d_out <= r_out * r_out && d_in > r_in * r_in) m.set(x, y);
        }
    }
    return m;
}

inline BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
    BinaryMask m(w, h);
    std::bernoulli_distribution on(density);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (on(rng)) m.set(x, y);
        }
    }
    return m;
}

inline SkeletonRaster raster_of(const BinaryMask& m) { return SkeletonRaster::from_mask(m); }

/// Three 8-pixel arms (north, south-west, south-east) around (10, 10) on a 21x21 grid.
inline SkeletonRaster y_skeleton() {
    BinaryMask m(21, 21);
    m.set(10, 10);
    for (int i = 1; i <= 8; ++i) {
        m.set(10, 10 - i);
        m.set(10 - i, 10 + i);
        m.set(10 + i, 10 + i);
    }
    return SkeletonRaster::from_mask(m);
}

/// Two vertical bars joined by a horizontal bar; the joining bar is not a leaf.
inline SkeletonRaster h_skeleton() {
    BinaryMask m(21, 21);
    for (int y = 2; y <= 18; ++y) {
        m.set(4, y);
        m.set(16, y);
    }
    for (int x = 5; x <= 15; ++x) m.set(x, 10);
    return SkeletonRaster::from_mask(m);
}

/// Thick Y-shaped region whose full skeleton has three arms.
inline BinaryMask y_shape() {
    BinaryMask m(64, 64);
    const auto stroke = [&](double x0, double y0, double x1, double y1, double half) {
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                const double dx = x1 - x0;
                const double dy = y1 - y0;
                double t = ((x - x0) * dx + (y - y0) * dy) / (dx * dx + dy * dy);
                t = std::clamp(t, 0.0, 1.0);
                const double ex = x - (x0 + t * dx);
                const double ey = y - (y0 + t * dy);
                if (ex * ex + ey * ey <= half * half) m.set(x, y);
            }
        }
    };
    stroke(32, 34, 32, 6, 4.5);
    stroke(32, 34, 10, 56, 4.5);
    stroke(32, 34, 54, 56, 4.5);
    return m;
}

/// Random pixel tree: every pixel added touches exactly one existing pixel,
/// so the 8-adjacency graph is a tree.
inline SkeletonRaster random_pixel_tree(std::mt19937& rng, int w, int h, std::size_t target) {
    BinaryMask m(w, h);
    std::vector<Point> pts{{w / 2, h / 2}};
    m.set(pts.front());
    std::size_t attempts = 0;
    while (pts.size() < target && attempts < target * 200) {
        ++attempts;
        const Point p = pts[rng() % pts.size()];
        const Point q = p + skelforge::kNeighbors8[rng() % 8];
        if (!m.in_bounds(q) || m.at(q)) continue;
        int touching = 0;
        for (Point d : skelforge::kNeighbors8) touching += m.get(q + d) ? 1 : 0;
        if (touching != 1) continue;
        m.set(q);
        pts.push_back(q);
    }
    return SkeletonRaster::from_mask(m);
}

// A GT record on a random blob: random ladder step, provenance and object mask.
inline skelforge::GTRecord random_record(std::mt19937& rng) {
    const BinaryMask shape = random_blob(rng, 32 + static_cast<int>(rng() % 24));
    const skelforge::CandidateLadder ladder = skelforge::build_ladder(shape, 4, 12);
    const SkeletonRaster& s = ladder.steps[rng() % ladder.steps.size()];
    skelforge::Provenance prov;
    prov.source_id = "shape-" + std::to_string(rng() % 1000);
    for (std::size_t i = 0, n = 1 + rng() % 3; i < n; ++i) prov.annotator_ids.push_back("ann" + std::to_string(rng() % 50));
    prov.k_values = {ladder.dce_k[rng() % ladder.dce_k.size()]};
    for (const skelforge::Branch& b : skelforge::decompose(s).branches()) {
        if (rng() % 3 == 0) prov.pruned_branch_ids.push_back(skelforge::format_branch_id(b.id));
    }
    prov.rule = rng() % 2 ? "" : "max_votes(2)";
    std::optional<BinaryMask> object;
    if (rng() % 2) object = shape;
    return skelforge::make_gt_record(s, shape, prov, object);
}

}  // namespace fixtures

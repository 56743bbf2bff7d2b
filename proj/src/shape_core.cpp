#include "skelforge/shape_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

#include "skelforge/error.hpp"

namespace skelforge {

double Contour::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
    if (closed && points.size() > 1) total += distance(points.back(), points.front());
    return total;
}

DistanceField::DistanceField(int width, int height, std::vector<std::int64_t> squared)
    : width_(width), height_(height), squared_(std::move(squared)) {
    if (squared_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::DimensionMismatch, "distance field size");
    }
    values_.resize(squared_.size());
    std::transform(squared_.begin(), squared_.end(), values_.begin(),
                   [](std::int64_t s) { return std::sqrt(static_cast<double>(s)); });
}

double DistanceField::max_value() const noexcept {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------
// Exact EDT: column scan followed by a lower envelope of parabolas per row.
// ---------------------------------------------------------------------------

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct EdtResult {
    std::vector<std::int64_t> squared;
    std::vector<Point> nearest;  // nearest site per pixel
    bool any_site = false;
};

EdtResult edt_with_features(int w, int h, const std::vector<std::uint8_t>& site) {
    const auto W = static_cast<std::size_t>(w);
    EdtResult out;
    out.squared.assign(W * static_cast<std::size_t>(h), kInf);
    out.nearest.assign(W * static_cast<std::size_t>(h), Point{-1, -1});

    // Column pass: vertical distance to the nearest site in the same column.
    std::vector<std::int64_t> col_dist(W * static_cast<std::size_t>(h), kInf);
    std::vector<int> col_row(W * static_cast<std::size_t>(h), -1);
    for (int x = 0; x < w; ++x) {
        int last = -1;
        for (int y = 0; y < h; ++y) {
            const std::size_t i = static_cast<std::size_t>(y) * W + static_cast<std::size_t>(x);
            if (site[i]) last = y;
            if (last >= 0) {
                col_dist[i] = static_cast<std::int64_t>(y - last) * (y - last);
                col_row[i] = last;
            }
        }
        last = -1;
        for (int y = h - 1; y >= 0; --y) {
            const std::size_t i = static_cast<std::size_t>(y) * W + static_cast<std::size_t>(x);
            if (site[i]) last = y;
            if (last >= 0) {
                const std::int64_t d = static_cast<std::int64_t>(last - y) * (last - y);
                if (d < col_dist[i]) {
                    col_dist[i] = d;
                    col_row[i] = last;
                }
            }
        }
    }

    // Row pass: lower envelope over the finite parabolas of the row.
    std::vector<int> v(W);
    std::vector<double> z(W + 1);
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * W;
        auto f = [&](int q) { return col_dist[row + static_cast<std::size_t>(q)]; };
        int k = -1;
        for (int q = 0; q < w; ++q) {
            if (f(q) >= kInf) continue;
            if (k < 0) {
                k = 0;
                v[0] = q;
                z[0] = -std::numeric_limits<double>::infinity();
                z[1] = std::numeric_limits<double>::infinity();
                continue;
            }
            double s = 0.0;
            while (true) {
                const int p = v[static_cast<std::size_t>(k)];
                s = (static_cast<double>(f(q) + static_cast<std::int64_t>(q) * q) -
                     static_cast<double>(f(p) + static_cast<std::int64_t>(p) * p)) /
                    (2.0 * (q - p));
                if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
                    --k;
                } else {
                    break;
                }
            }
            if (s <= z[static_cast<std::size_t>(k)]) {
                // k == 0 and the new parabola dominates everywhere.
                v[0] = q;
                z[1] = std::numeric_limits<double>::infinity();
                continue;
            }
            ++k;
            v[static_cast<std::size_t>(k)] = q;
            z[static_cast<std::size_t>(k)] = s;
            z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
        }
        if (k < 0) continue;
        out.any_site = true;
        int j = 0;
        for (int q = 0; q < w; ++q) {
            while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
            // The envelope breakpoints are real-valued; confirm against the
            // integer neighbors so ties and rounding never pick a worse site.
            int best = v[static_cast<std::size_t>(j)];
            std::int64_t best_d = f(best) + static_cast<std::int64_t>(q - best) * (q - best);
            for (int dj : {-1, 1}) {
                const int jj = j + dj;
                if (jj < 0 || jj > k) continue;
                const int cand = v[static_cast<std::size_t>(jj)];
                const std::int64_t d = f(cand) + static_cast<std::int64_t>(q - cand) * (q - cand);
                if (d < best_d) {
                    best_d = d;
                    best = cand;
                }
            }
            out.squared[row + static_cast<std::size_t>(q)] = best_d;
            out.nearest[row + static_cast<std::size_t>(q)] = Point{best, col_row[row + static_cast<std::size_t>(best)]};
        }
    }
    return out;
}

/// EDT of a mask padded by one background pixel on every side, cropped back.
EdtResult padded_background_edt(const BinaryMask& mask) {
    const int w = mask.width() + 2;
    const int h = mask.height() + 2;
    std::vector<std::uint8_t> site(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            site[static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x + 1)] =
                mask.at(x, y) ? 0 : 1;
        }
    }
    EdtResult padded = edt_with_features(w, h, site);
    EdtResult out;
    out.any_site = true;
    const auto n = static_cast<std::size_t>(mask.width()) * static_cast<std::size_t>(mask.height());
    out.squared.resize(n);
    out.nearest.resize(n);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const std::size_t src = static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x + 1);
            const std::size_t dst = mask.index(x, y);
            out.squared[dst] = padded.squared[src];
            out.nearest[dst] = padded.nearest[src] - Point{1, 1};
        }
    }
    return out;
}

}  // namespace

DistanceField distance_transform(const BinaryMask& mask) {
    EdtResult r = padded_background_edt(mask);
    return DistanceField(mask.width(), mask.height(), std::move(r.squared));
}

std::vector<Point> feature_transform(const BinaryMask& mask) {
    return padded_background_edt(mask).nearest;
}

std::vector<std::int64_t> squared_distance_to_sites(const BinaryMask& sites) {
    std::vector<std::uint8_t> s(sites.bits().begin(), sites.bits().end());
    EdtResult r = edt_with_features(sites.width(), sites.height(), s);
    if (!r.any_site) std::fill(r.squared.begin(), r.squared.end(), -1);
    return std::move(r.squared);
}

// ---------------------------------------------------------------------------
// Components and holes
// ---------------------------------------------------------------------------

namespace {

template <typename Visit>
void flood(const BinaryMask& mask, Point seed, bool value, int connectivity, std::vector<std::uint8_t>& seen, Visit&& visit) {
    std::deque<Point> queue{seed};
    seen[mask.index(seed.x, seed.y)] = 1;
    while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        visit(p);
        const auto step = [&](Point d) {
            const Point q = p + d;
            if (!mask.in_bounds(q) || mask.at(q) != value) return;
            auto& s = seen[mask.index(q.x, q.y)];
            if (s) return;
            s = 1;
            queue.push_back(q);
        };
        if (connectivity == 4) {
            for (Point d : kNeighbors4) step(d);
        } else {
            for (Point d : kNeighbors8) step(d);
        }
    }
}

}  // namespace

std::vector<BinaryMask> connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8) {
        throw Error(ErrorCode::InvalidArgument, "connectivity must be 4 or 8");
    }
    struct Found {
        BinaryMask mask;
        std::size_t area;
        Point first;
    };
    std::vector<Found> found;
    std::vector<std::uint8_t> seen(mask.bits().size(), 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y) || seen[mask.index(x, y)]) continue;
            BinaryMask comp(mask.width(), mask.height());
            std::size_t area = 0;
            flood(mask, {x, y}, true, connectivity, seen, [&](Point p) {
                comp.set(p);
                ++area;
            });
            found.push_back({std::move(comp), area, Point{x, y}});
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
        if (a.area != b.area) return a.area > b.area;
        return a.first < b.first;
    });
    std::vector<BinaryMask> out;
    out.reserve(found.size());
    for (auto& f : found) out.push_back(std::move(f.mask));
    return out;
}

std::size_t count_components8(const BinaryMask& set) {
    std::vector<std::uint8_t> seen(set.bits().size(), 0);
    std::size_t count = 0;
    for (int y = 0; y < set.height(); ++y) {
        for (int x = 0; x < set.width(); ++x) {
            if (!set.at(x, y) || seen[set.index(x, y)]) continue;
            ++count;
            flood(set, {x, y}, true, 8, seen, [](Point) {});
        }
    }
    return count;
}

BinaryMask fill_holes(const BinaryMask& mask) {
    std::vector<std::uint8_t> seen(mask.bits().size(), 0);
    const auto seed = [&](int x, int y) {
        if (!mask.at(x, y) && !seen[mask.index(x, y)]) flood(mask, {x, y}, false, 4, seen, [](Point) {});
    };
    for (int x = 0; x < mask.width(); ++x) {
        seed(x, 0);
        seed(x, mask.height() - 1);
    }
    for (int y = 0; y < mask.height(); ++y) {
        seed(0, y);
        seed(mask.width() - 1, y);
    }
    BinaryMask out = mask;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y) && !seen[mask.index(x, y)]) out.set(x, y);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundary tracing
// ---------------------------------------------------------------------------

namespace {

int direction_index(Point d) {
    for (int i = 0; i < 8; ++i) {
        if (kNeighbors8[static_cast<std::size_t>(i)] == d) return i;
    }
    return -1;
}

}  // namespace

Contour trace_boundary(const BinaryMask& mask) {
    const std::size_t comps = count_components8(mask);
    if (comps == 0) throw Error(ErrorCode::EmptyMask, "no foreground to trace");
    if (comps > 1) throw Error(ErrorCode::MultipleComponents, "boundary tracing needs one component");

    Point start{};
    for (std::size_t i = 0; i < mask.bits().size(); ++i) {
        if (mask.bits()[i]) {
            start = mask.point_at(i);
            break;
        }
    }

    // Moore neighbor tracing, scanning counterclockwise from the backtrack.
    const auto next = [&](Point p, int back) -> std::pair<int, int> {
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (mask.get(p + kNeighbors8[static_cast<std::size_t>(d)])) return {d, (d + 7) % 8};
        }
        return {-1, -1};
    };

    Contour contour;
    contour.closed = true;
    std::vector<Point> moore{start};
    auto [d0, _] = next(start, 2);
    if (d0 < 0) {
        contour.points = moore;
        return contour;
    }
    const Point second = start + kNeighbors8[static_cast<std::size_t>(d0)];

    Point p = start;
    int back = 2;  // north of the raster-first pixel is background
    std::vector<int> moves;
    while (true) {
        auto [d, prev] = next(p, back);
        const Point q = p + kNeighbors8[static_cast<std::size_t>(d)];
        if (p == start && q == second && !moves.empty()) break;
        const Point bg = p + kNeighbors8[static_cast<std::size_t>(prev)];
        moves.push_back(d);
        p = q;
        back = direction_index(bg - p);
        moore.push_back(p);
    }
    moore.pop_back();  // closing return to start

    // Diagonal Moore steps skip concave-corner pixels that touch background
    // only diagonally; put them back so the contour is 4-connected.
    std::vector<Point>& out = contour.points;
    for (std::size_t i = 0; i < moore.size(); ++i) {
        const Point a = moore[i];
        if (out.empty() || out.back() != a) out.push_back(a);
        const int d = moves[i];
        if (d % 2 == 1) {
            const Point inner = a + kNeighbors8[static_cast<std::size_t>((d + 1) % 8)];
            const Point outer = a + kNeighbors8[static_cast<std::size_t>((d + 7) % 8)];
            if (mask.get(inner) && !mask.get(outer)) out.push_back(inner);
        }
    }
    while (out.size() > 1 && out.back() == out.front()) out.pop_back();
    return contour;
}

BinaryMask rasterize(const Contour& contour, int width, int height) {
    BinaryMask m(width, height);
    for (Point p : contour.points) {
        if (m.in_bounds(p)) m.set(p);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Digital topology
// ---------------------------------------------------------------------------

int neighbor_count(const BinaryMask& set, Point p) {
    int n = 0;
    for (Point d : kNeighbors8) n += set.get(p + d) ? 1 : 0;
    return n;
}

bool is_simple_point(const BinaryMask& set, Point p) {
    std::array<bool, 8> fg{};
    for (std::size_t i = 0; i < 8; ++i) fg[i] = set.get(p + kNeighbors8[i]);

    // Foreground ring components under 8-adjacency.
    const auto fg_adjacent = [](std::size_t i, std::size_t j) {
        const std::size_t diff = (i + 8 - j) % 8;
        if (diff == 1 || diff == 7) return true;
        return i % 2 == 0 && j % 2 == 0 && (diff == 2 || diff == 6);
    };
    std::array<int, 8> label{};
    label.fill(-1);
    int fg_components = 0;
    for (std::size_t s = 0; s < 8; ++s) {
        if (!fg[s] || label[s] >= 0) continue;
        std::array<std::size_t, 8> stack{};
        std::size_t top = 0;
        stack[top++] = s;
        label[s] = fg_components;
        while (top > 0) {
            const std::size_t i = stack[--top];
            for (std::size_t j = 0; j < 8; ++j) {
                if (fg[j] && label[j] < 0 && fg_adjacent(i, j)) {
                    label[j] = fg_components;
                    stack[top++] = j;
                }
            }
        }
        ++fg_components;
    }
    if (fg_components != 1) return false;

    // Background ring components under 4-adjacency that touch a 4-neighbor of p.
    label.fill(-1);
    int bg_components = 0;
    for (std::size_t s = 0; s < 8; s += 2) {
        if (fg[s] || label[s] >= 0) continue;
        // Walk both ways around the ring through consecutive background cells.
        label[s] = bg_components;
        for (int dir : {1, 7}) {
            std::size_t i = s;
            while (true) {
                const std::size_t j = (i + static_cast<std::size_t>(dir)) % 8;
                if (fg[j] || label[j] >= 0) break;
                label[j] = bg_components;
                i = j;
            }
        }
        ++bg_components;
    }
    return bg_components == 1;
}

long euler_number8(const BinaryMask& set) {
    long q1 = 0;
    long q3 = 0;
    long qd = 0;
    for (int y = -1; y < set.height(); ++y) {
        for (int x = -1; x < set.width(); ++x) {
            const bool a = set.get(x, y);
            const bool b = set.get(x + 1, y);
            const bool c = set.get(x, y + 1);
            const bool d = set.get(x + 1, y + 1);
            const int n = a + b + c + d;
            if (n == 1) ++q1;
            if (n == 3) ++q3;
            if (n == 2 && ((a && d) || (b && c))) ++qd;
        }
    }
    return (q1 - q3 - 2 * qd) / 4;
}

}  // namespace skelforge

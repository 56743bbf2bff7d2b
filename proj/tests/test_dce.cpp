#include "doctest.h"

#include <set>

#include "fixtures.hpp"
#include "skelforge/dce.hpp"
#include "skelforge/error.hpp"

using namespace skelforge;

namespace {

// Quadratic greedy evolution: rescan every live vertex each round and delete
// the least relevant, lower index on ties.
std::vector<std::vector<std::size_t>> greedy_oracle(const Contour& c, std::size_t k_min) {
    std::vector<std::size_t> live(c.size());
    for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;
    double total = c.length();
    if (total <= 0.0) total = 1.0;
    std::vector<std::vector<std::size_t>> out{live};
    while (live.size() > k_min) {
        std::size_t best = 0;
        double best_rel = 0.0;
        for (std::size_t j = 0; j < live.size(); ++j) {
            const Point prev = c.points[live[(j + live.size() - 1) % live.size()]];
            const Point next = c.points[live[(j + 1) % live.size()]];
            const double rel = dce_relevance(prev, c.points[live[j]], next, total);
            if (j == 0 || rel < best_rel) {
                best = j;
                best_rel = rel;
            }
        }
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(best));
        out.push_back(live);
    }
    return out;
}

double relevance_by_acos(Point a, Point b, Point c, double total) {
    const double ux = b.x - a.x, uy = b.y - a.y, vx = c.x - b.x, vy = c.y - b.y;
    const double l1 = std::hypot(ux, uy), l2 = std::hypot(vx, vy);
    if (l1 == 0.0 || l2 == 0.0) return 0.0;
    const double cosine = std::clamp((ux * vx + uy * vy) / (l1 * l2), -1.0, 1.0);
    const double s1 = l1 / total, s2 = l2 / total;
    return std::acos(cosine) * s1 * s2 / (s1 + s2);
}

}  // namespace

TEST_CASE("relevance is turn angle times normalized length product over sum") {
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> coord(-20, 20);
    for (int i = 0; i < 2000; ++i) {
        const Point a{coord(rng), coord(rng)}, b{coord(rng), coord(rng)}, c{coord(rng), coord(rng)};
        if (a == b || b == c) continue;
        CHECK(dce_relevance(a, b, c, 100.0) == doctest::Approx(relevance_by_acos(a, b, c, 100.0)).epsilon(1e-9));
    }
    CHECK(dce_relevance({0, 0}, {5, 0}, {10, 0}, 10.0) == 0.0);
}

TEST_CASE("evolution matches the quadratic greedy oracle") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        const Contour c = trace_boundary(fixtures::random_blob(rng, 40 + static_cast<int>(rng() % 40)));
        const auto polys = dce_evolve(c, 3);
        const auto oracle = greedy_oracle(c, 3);
        REQUIRE(polys.size() == oracle.size());
        for (std::size_t i = 0; i < polys.size(); ++i) {
            auto want = oracle[i];
            std::sort(want.begin(), want.end());
            REQUIRE(polys[i].vertices == want);
        }
        // removal order and survivors describe the same nested sequence
        const auto order = dce_removal_order(c);
        REQUIRE(order.size() == c.size());
        CHECK(std::set<std::size_t>(order.begin(), order.end()).size() == c.size());
        for (std::size_t k = 3; k <= c.size(); k += 7) {
            auto want = oracle[c.size() - k];
            std::sort(want.begin(), want.end());
            CHECK(dce_survivors(order, k) == want);
        }
    }
}

TEST_CASE("polygon shrinks by one vertex per step down to k_min") {
    const Contour c = trace_boundary(fixtures::rect(20, 10));
    const auto polys = dce_evolve(c, 4);
    CHECK(polys.front().vertices.size() == c.size());
    CHECK(polys.back().vertices.size() == 4);
    for (std::size_t i = 1; i < polys.size(); ++i) {
        CHECK(polys[i].vertices.size() + 1 == polys[i - 1].vertices.size());
        CHECK(std::includes(polys[i - 1].vertices.begin(), polys[i - 1].vertices.end(), polys[i].vertices.begin(),
                            polys[i].vertices.end()));
    }
    // the four corners are what a rectangle reduces to
    std::set<Point> corners;
    for (std::size_t v : polys.back().vertices) corners.insert(c.points[v]);
    CHECK(corners == std::set<Point>{{5, 5}, {24, 5}, {5, 14}, {24, 14}});
}

TEST_CASE("dce argument errors") {
    const Contour c = trace_boundary(fixtures::rect(3, 1));
    CHECK_THROWS_AS(dce_evolve(c, 2), Error);
    CHECK_THROWS_AS(dce_evolve(c, c.size() + 1), Error);
    Contour open = c;
    open.closed = false;
    CHECK_THROWS_AS(dce_evolve(open, 3), Error);
}

TEST_CASE("random 20-gons evolve to five vertices like the greedy oracle") {
    std::mt19937 rng(20);
    std::uniform_real_distribution<double> jitter(0.6, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        // star-shaped polygon: sorted angles, random radii, so no self-intersection
        Contour c;
        for (int i = 0; i < 20; ++i) {
            const double a = 2.0 * M_PI * (i + 0.5 * jitter(rng)) / 20.0;
            const double r = 40.0 * jitter(rng);
            c.points.push_back({static_cast<int>(std::lround(50 + r * std::cos(a))), static_cast<int>(std::lround(50 + r * std::sin(a)))});
        }
        const auto polys = dce_evolve(c, 5);
        const auto oracle = greedy_oracle(c, 5);
        REQUIRE(polys.size() == 16);
        for (std::size_t i = 0; i < polys.size(); ++i) {
            auto want = oracle[i];
            std::sort(want.begin(), want.end());
            REQUIRE(polys[i].vertices == want);
        }
    }
}

TEST_CASE("a collinear vertex goes first") {
    // square with an extra point in the middle of one side
    Contour c;
    c.points = {{0, 0}, {10, 0}, {20, 0}, {20, 20}, {0, 20}};
    CHECK(dce_relevance(c.points[0], c.points[1], c.points[2], c.length()) == 0.0);
    const auto polys = dce_evolve(c, 4);
    CHECK(polys.back().vertices == std::vector<std::size_t>{0, 2, 3, 4});
    CHECK(dce_removal_order(c).front() == 1);
}

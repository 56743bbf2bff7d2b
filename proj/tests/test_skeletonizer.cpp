#include "doctest.h"

#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "skelforge/error.hpp"
#include "skelforge/metrics.hpp"
#include "skelforge/skeleton_graph.hpp"
#include "skelforge/skeletonizer.hpp"

using namespace skelforge;
using namespace oracles;

namespace {

// Holes counted independently, cross-checked against components minus Euler number.
long cycle_count(const SkeletonRaster& s) {
    const long holes = enclosed_regions(s.mask());
    const BinaryMask m = s.mask();
    CHECK(static_cast<long>(count_components8(m)) - euler_number8(m) == holes);
    return holes;
}

void check_raster_invariants(const SkeletonRaster& s, const BinaryMask& shape) {
    const BinaryMask m = s.mask();
    CHECK(m.is_subset_of(shape));
    CHECK(is_thin(m));
    CHECK(count_components8(m) == 1);
    REQUIRE(s.has_radii());
    const DistanceField f = distance_transform(shape);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.radii[i] == doctest::Approx(inscribed_radius(f, s.points[i])));
}

}  // namespace

TEST_CASE("disc r=10 collapses to the centre") {
    const BinaryMask d = fixtures::disc(10);
    const SkeletonRaster s = medial_axis(d);
    REQUIRE(s.size() >= 1);
    CHECK(s.size() <= 4);
    for (Point p : s.points) {
        CHECK(std::abs(p.x - 12) <= 1);
        CHECK(std::abs(p.y - 12) <= 1);
    }
    CHECK(reconstruction_error(s, d) <= 0.05);
    const CandidateLadder ladder = build_ladder(d, 4, 30);
    for (const auto& step : ladder.steps) CHECK(step == s);
}

TEST_CASE("40x10 rectangle: corner branches on the full axis, exactly four at the last step") {
    const BinaryMask r = fixtures::rect(40, 10);
    const SkeletonRaster s = medial_axis(r);
    check_raster_invariants(s, r);
    // An even height leaves one long side a pixel short of the centre line's
    // discs, so the full axis grows short side spurs to stay covered.
    CHECK(reconstruction_error(s, r) <= 0.05);
    const auto near_corner = [](Point e) {
        const bool left = e.x < 25, top = e.y < 10;
        return (left ? e.x - 5 : 44 - e.x) <= 3 && (top ? e.y - 5 : 14 - e.y) <= 3;
    };
    const auto corner_of = [](Point e) { return (e.x < 25 ? 0 : 1) + (e.y < 10 ? 0 : 2); };
    std::set<int> corners;
    for (Point e : decompose(s).endpoints()) {
        if (near_corner(e)) corners.insert(corner_of(e));
    }
    CHECK(corners.size() == 4);
    for (const auto& [kmin, kmax] : {std::pair<std::size_t, std::size_t>{4, 8}, {4, 30}}) {
        const CandidateLadder ladder = build_ladder(r, kmin, kmax);
        const auto ends = decompose(ladder.steps.back()).endpoints();
        REQUIRE(ends.size() == 4);
        std::set<int> last;
        for (Point e : ends) {
            CHECK(near_corner(e));
            last.insert(corner_of(e));
        }
        CHECK(last.size() == 4);
    }
}

TEST_CASE("full medial axis of random blobs reconstructs the blob") {
    std::mt19937 rng(1);
    for (int trial = 0; trial < 25; ++trial) {
        const BinaryMask blob = fixtures::random_blob(rng);
        const SkeletonRaster s = medial_axis(blob);
        check_raster_invariants(s, blob);
        CHECK(cycle_count(s) == 0);
        CHECK(reconstruction_error(s, blob) <= 0.05);
        CHECK(reconstruct(s).is_subset_of(blob));
    }
}

TEST_CASE("ladder steps are nested and trade RE for SS") {
    std::mt19937 rng(2);
    for (int trial = 0; trial < 15; ++trial) {
        const BinaryMask blob = fixtures::random_blob(rng);
        const CandidateLadder ladder = build_ladder(blob, 4, 30);
        REQUIRE(ladder.steps.size() == 28);
        REQUIRE(ladder.dce_k.size() == 28);
        CHECK(ladder.dce_k[1] == 30);
        CHECK(ladder.dce_k.back() == 4);
        for (std::size_t i = 1; i < ladder.steps.size(); ++i) {
            const auto& prev = ladder.steps[i - 1];
            const auto& cur = ladder.steps[i];
            check_raster_invariants(cur, blob);
            CHECK(cur.mask().is_subset_of(prev.mask()));
            CHECK(reconstruction_error(cur, blob) >= reconstruction_error(prev, blob) - 1e-9);
            CHECK(simplicity(cur) >= simplicity(prev) - 1e-9);
        }
    }
}

TEST_CASE("annulus with its hole kept yields exactly one cycle") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const BinaryMask a = fixtures::random_annulus(rng);
        const SkeletonRaster s = medial_axis(a);
        CHECK(is_thin(s.mask()));
        CHECK(count_components8(s.mask()) == 1);
        CHECK(cycle_count(s) == 1);
        LadderOptions opts;
        opts.fill_holes = false;
        const CandidateLadder ladder = build_ladder(a, opts);
        for (const auto& step : ladder.steps) CHECK(cycle_count(step) == 1);
        // filled, the same region has no cycle left
        opts.fill_holes = true;
        for (const auto& step : build_ladder(a, opts).steps) CHECK(cycle_count(step) == 0);
    }
}

TEST_CASE("tip sets grow with k") {
    std::mt19937 rng(4);
    const BinaryMask blob = fixtures::random_blob(rng);
    const MedialAxisResult axis = medial_axis_detailed(blob);
    const auto sets = ladder_tip_sets(axis, 4, 30);
    REQUIRE(sets.size() == 27);
    for (std::size_t i = 1; i < sets.size(); ++i) {
        CHECK(std::includes(sets[i].begin(), sets[i].end(), sets[i - 1].begin(), sets[i - 1].end()));
        CHECK(std::includes(axis.tips.begin(), axis.tips.end(), sets[i].begin(), sets[i].end()));
    }
}

TEST_CASE("medial axis errors") {
    try {
        medial_axis(BinaryMask(5, 5));
        FAIL("expected EmptyMask");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyMask);
    }
    const char* rows[] = {"##..##"};
    try {
        medial_axis(BinaryMask::from_ascii(rows));
        FAIL("expected MultipleComponents");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MultipleComponents);
    }
    CHECK_THROWS_AS(build_ladder(fixtures::disc(5), 2, 8), Error);
    CHECK_THROWS_AS(build_ladder(fixtures::disc(5), 9, 8), Error);
}

TEST_CASE("tiny shapes") {
    const char* dot[] = {"...", ".#.", "..."};
    const SkeletonRaster s = medial_axis(BinaryMask::from_ascii(dot));
    CHECK(s.size() == 1);
    const char* bar[] = {".....", ".###.", "....."};
    const BinaryMask b = BinaryMask::from_ascii(bar);
    const CandidateLadder ladder = build_ladder(b, 3, 4);
    for (const auto& step : ladder.steps) CHECK(step.mask().is_subset_of(b));
}

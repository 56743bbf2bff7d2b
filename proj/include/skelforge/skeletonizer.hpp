#pragma once

#include <cstddef>
#include <vector>

#include "skelforge/dce.hpp"
#include "skelforge/skeleton.hpp"

namespace skelforge {

/// Minimum number of newly covered mask pixels for a branch to be grown.
inline constexpr double kDefaultBranchGain = 3.0;

/// Branches ending on flat or concave boundary stretches must cover at least
/// this times sqrt(radius at the attachment) new pixels.
inline constexpr double kDefaultFlatTipScale = 3.0;

/// If more than this fraction of the mask is still uncovered after the
/// filtered pass, the best remaining tips are grown regardless of the flat-tip
/// rule until coverage is back under budget.
inline constexpr double kDefaultCoverageBudget = 0.02;

struct MedialAxisOptions {
    double min_branch_gain = kDefaultBranchGain;
    double flat_tip_scale = kDefaultFlatTipScale;
    double coverage_budget = kDefaultCoverageBudget;
};

/// Full medial axis plus the boundary bookkeeping the ladder needs.
struct MedialAxisResult {
    SkeletonRaster skeleton;
    Contour contour;                         // outer boundary
    std::vector<std::size_t> removal_order;  // DCE deletion order over `contour`
    std::vector<std::size_t> tips;           // contour indices that grew a branch, ascending
};

/// Topology-preserving thinning of a single-component mask. Holes present in
/// the mask survive as skeleton cycles; branches are grown from boundary
/// points that add coverage, so endpoints touch the boundary.
MedialAxisResult medial_axis_detailed(const BinaryMask& mask, const MedialAxisOptions& options = {});
SkeletonRaster medial_axis(const BinaryMask& mask, const MedialAxisOptions& options = {});

struct CandidateLadder {
    std::vector<SkeletonRaster> steps;  // step 0 is the full axis, later steps are simpler
    std::vector<std::size_t> dce_k;     // surviving vertex count per step
};

struct LadderOptions {
    std::size_t k_min = 4;
    std::size_t k_max = 30;
    bool fill_holes = true;
    double min_branch_gain = kDefaultBranchGain;
    double flat_tip_scale = kDefaultFlatTipScale;
    double coverage_budget = kDefaultCoverageBudget;
};

/// Step 0 is the full medial axis. Step j >= 1 keeps the branches whose
/// boundary tips are claimed by convex DCE vertices at k = k_max - j + 1.
CandidateLadder build_ladder(const BinaryMask& mask, const LadderOptions& options);
CandidateLadder build_ladder(const BinaryMask& mask, std::size_t k_min, std::size_t k_max);

/// Tips kept at each k in [k_min, k_max]; index 0 is k_min. Nested upward.
std::vector<std::vector<std::size_t>> ladder_tip_sets(const MedialAxisResult& axis, std::size_t k_min,
                                                      std::size_t k_max);

}  // namespace skelforge

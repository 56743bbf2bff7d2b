#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skelforge/skeleton.hpp"

namespace skelforge {

struct AnnotatorSubmission {
    std::string annotator_id;
    SkeletonRaster skeleton;
    double re = 1.0;  // reconstruction error against the shape
};

/// Fill in `re` from the shape.
AnnotatorSubmission make_submission(std::string annotator_id, SkeletonRaster skeleton, const BinaryMask& shape);

enum class ConsensusRule { MaxVotes, MedianError, BranchUnion, LowerErrorFallback };

struct ConsensusResult {
    SkeletonRaster skeleton;
    ConsensusRule rule = ConsensusRule::MaxVotes;
    std::string rationale;  // e.g. "max_votes(2)", "median_error"
    std::size_t votes = 0;  // submissions identical to the result
};

/// A skeleton submitted more often than any other wins. Otherwise, with three
/// or more distinct skeletons, the one with the median error wins (lower
/// median for even counts). Two distinct skeletons with tied votes are merged.
ConsensusResult integrate(const std::vector<AnnotatorSubmission>& submissions, const BinaryMask& shape,
                          const std::optional<SkeletonRaster>& superset = std::nullopt);

/// Union of the submitted prunings. With `superset`, each submission must be
/// contained in it and radii are taken from it.
SkeletonRaster merge_branches(const std::vector<AnnotatorSubmission>& submissions,
                              const std::optional<SkeletonRaster>& superset = std::nullopt);

/// Duplicate counts keyed by skeleton digest.
std::map<std::string, std::size_t> hints(const std::vector<AnnotatorSubmission>& submissions);

std::string to_string(ConsensusRule rule);

}  // namespace skelforge

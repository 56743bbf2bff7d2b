#include "skelforge/consensus.hpp"

#include <algorithm>

#include "skelforge/error.hpp"
#include "skelforge/metrics.hpp"

namespace skelforge {

namespace {

struct Group {
    const AnnotatorSubmission* first = nullptr;
    std::string digest;
    std::size_t votes = 0;
};

std::vector<Group> group_identical(const std::vector<AnnotatorSubmission>& submissions) {
    std::vector<Group> groups;
    for (const AnnotatorSubmission& s : submissions) {
        const std::string digest = skeleton_digest(s.skeleton);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.digest == digest && g.first->skeleton == s.skeleton;
        });
        if (it == groups.end()) {
            groups.push_back({&s, digest, 1});
        } else {
            ++it->votes;
        }
    }
    // Order independent of submission order.
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        if (a.first->re != b.first->re) return a.first->re < b.first->re;
        if (a.digest != b.digest) return a.digest < b.digest;
        return a.first->skeleton.points < b.first->skeleton.points;
    });
    return groups;
}

}  // namespace

AnnotatorSubmission make_submission(std::string annotator_id, SkeletonRaster skeleton, const BinaryMask& shape) {
    AnnotatorSubmission s;
    s.annotator_id = std::move(annotator_id);
    s.re = reconstruction_error(skeleton, shape);
    s.skeleton = std::move(skeleton);
    return s;
}

std::string to_string(ConsensusRule rule) {
    switch (rule) {
        case ConsensusRule::MaxVotes: return "max_votes";
        case ConsensusRule::MedianError: return "median_error";
        case ConsensusRule::BranchUnion: return "branch_union";
        case ConsensusRule::LowerErrorFallback: return "lower_error_fallback";
    }
    return "unknown";
}

ConsensusResult integrate(const std::vector<AnnotatorSubmission>& submissions, const BinaryMask& shape,
                          const std::optional<SkeletonRaster>& superset) {
    if (submissions.empty()) throw Error(ErrorCode::NoSubmissions, "nothing to integrate");
    for (const auto& s : submissions) {
        if (s.skeleton.width != shape.width() || s.skeleton.height != shape.height()) {
            throw Error(ErrorCode::DimensionMismatch, "submission grid differs from shape");
        }
    }
    const auto groups = group_identical(submissions);
    std::size_t top = 0;
    for (const Group& g : groups) top = std::max(top, g.votes);
    const auto leaders = std::count_if(groups.begin(), groups.end(), [top](const Group& g) { return g.votes == top; });

    ConsensusResult out;
    if (leaders == 1) {
        const Group& g = *std::find_if(groups.begin(), groups.end(), [top](const Group& x) { return x.votes == top; });
        out.skeleton = g.first->skeleton;
        out.rule = ConsensusRule::MaxVotes;
        out.votes = g.votes;
        out.rationale = "max_votes(" + std::to_string(g.votes) + ")";
        return out;
    }
    if (groups.size() >= 3) {
        const std::size_t pick = (groups.size() - 1) / 2;
        out.skeleton = groups[pick].first->skeleton;
        out.rule = ConsensusRule::MedianError;
        out.votes = groups[pick].votes;
        out.rationale = groups.size() % 2 == 1 ? "median_error" : "median_error(lower)";
        return out;
    }
    try {
        std::vector<AnnotatorSubmission> pair{*groups[0].first, *groups[1].first};
        out.skeleton = merge_branches(pair, superset);
        out.rule = ConsensusRule::BranchUnion;
        out.rationale = "branch_union";
    } catch (const Error& e) {
        if (e.code() != ErrorCode::IncompatibleLadders) throw;
        out.skeleton = groups[0].first->skeleton;
        out.rule = ConsensusRule::LowerErrorFallback;
        out.rationale = "lower_error_fallback";
    }
    out.votes = static_cast<std::size_t>(std::count_if(submissions.begin(), submissions.end(), [&](const AnnotatorSubmission& s) {
        return s.skeleton == out.skeleton;
    }));
    return out;
}

SkeletonRaster merge_branches(const std::vector<AnnotatorSubmission>& submissions,
                              const std::optional<SkeletonRaster>& superset) {
    if (submissions.empty()) throw Error(ErrorCode::NoSubmissions, "nothing to merge");
    const int w = submissions.front().skeleton.width;
    const int h = submissions.front().skeleton.height;
    BinaryMask merged(w, h);
    for (const auto& s : submissions) {
        if (s.skeleton.width != w || s.skeleton.height != h) {
            throw Error(ErrorCode::IncompatibleLadders, "submissions use different grids");
        }
        for (Point p : s.skeleton.points) {
            if (superset && !superset->contains(p)) {
                throw Error(ErrorCode::IncompatibleLadders, "submission is not a pruning of the common skeleton");
            }
            merged.set(p);
        }
    }
    if (superset && (superset->width != w || superset->height != h)) {
        throw Error(ErrorCode::IncompatibleLadders, "common skeleton uses a different grid");
    }
    if (merged.area() > 0 && count_components8(merged) != 1) {
        throw Error(ErrorCode::IncompatibleLadders, "merged skeleton is disconnected");
    }
    SkeletonRaster out = SkeletonRaster::from_mask(merged);
    for (Point p : out.points) {
        std::optional<double> r;
        if (superset) r = superset->radius_of(p);
        for (const auto& s : submissions) {
            if (r) break;
            r = s.skeleton.radius_of(p);
        }
        if (!r) {
            out.radii.clear();
            break;
        }
        out.radii.push_back(*r);
    }
    return out;
}

std::map<std::string, std::size_t> hints(const std::vector<AnnotatorSubmission>& submissions) {
    std::map<std::string, std::size_t> out;
    for (const auto& s : submissions) ++out[skeleton_digest(s.skeleton)];
    return out;
}

}  // namespace skelforge

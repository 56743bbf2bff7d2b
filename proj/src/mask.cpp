#include "skelforge/mask.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "skelforge/error.hpp"

namespace skelforge {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::MultipleComponents: return "MultipleComponents";
        case ErrorCode::ContourTooShort: return "ContourTooShort";
        case ErrorCode::NotALeafBranch: return "NotALeafBranch";
        case ErrorCode::UnknownBranchId: return "UnknownBranchId";
        case ErrorCode::TooFewPreservedEndpoints: return "TooFewPreservedEndpoints";
        case ErrorCode::Disconnected: return "Disconnected";
        case ErrorCode::NotSkeletonPoint: return "NotSkeletonPoint";
        case ErrorCode::MissingRadii: return "MissingRadii";
        case ErrorCode::EmptyShape: return "EmptyShape";
        case ErrorCode::EmptySkeleton: return "EmptySkeleton";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NoSubmissions: return "NoSubmissions";
        case ErrorCode::IncompatibleLadders: return "IncompatibleLadders";
        case ErrorCode::MissingRoot: return "MissingRoot";
        case ErrorCode::DecodeError: return "DecodeError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::MissingLadder: return "MissingLadder";
        case ErrorCode::NothingToUndo: return "NothingToUndo";
        case ErrorCode::NothingToRedo: return "NothingToRedo";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::StaleRevision: return "StaleRevision";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Conflict: return "Conflict";
    }
    return "Unknown";
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive");
    }
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive");
    }
    if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::DimensionMismatch, "bit count does not match width x height");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
}

BinaryMask BinaryMask::from_ascii(std::span<const char* const> rows) {
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no rows");
    const int w = static_cast<int>(std::strlen(rows[0]));
    const int h = static_cast<int>(rows.size());
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y) {
        if (static_cast<int>(std::strlen(rows[static_cast<std::size_t>(y)])) != w) {
            throw Error(ErrorCode::DimensionMismatch, "ragged ascii rows");
        }
        for (int x = 0; x < w; ++x) m.set(x, y, rows[static_cast<std::size_t>(y)][x] == '#');
    }
    return m;
}

BinaryMask BinaryMask::from_points(int width, int height, std::span<const Point> points) {
    BinaryMask m(width, height);
    for (Point p : points) {
        if (!m.in_bounds(p)) throw Error(ErrorCode::OutOfBounds, "point outside grid");
        m.set(p);
    }
    return m;
}

std::size_t BinaryMask::area() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Point> BinaryMask::points() const {
    std::vector<Point> out;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) out.push_back(point_at(i));
    }
    return out;
}

bool BinaryMask::is_subset_of(const BinaryMask& other) const {
    if (width_ != other.width_ || height_ != other.height_) return false;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] && !other.bits_[i]) return false;
    }
    return true;
}

namespace {
void require_same_size(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorCode::DimensionMismatch, "mask sizes differ");
    }
}
}  // namespace

BinaryMask BinaryMask::united(const BinaryMask& other) const {
    require_same_size(*this, other);
    BinaryMask out = *this;
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] | other.bits_[i];
    return out;
}

BinaryMask BinaryMask::intersected(const BinaryMask& other) const {
    require_same_size(*this, other);
    BinaryMask out = *this;
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & other.bits_[i];
    return out;
}

BinaryMask BinaryMask::inverted() const {
    BinaryMask out = *this;
    for (auto& b : out.bits_) b = b ? 0 : 1;
    return out;
}

}  // namespace skelforge

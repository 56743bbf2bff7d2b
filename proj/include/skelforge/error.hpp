#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skelforge {

enum class ErrorCode {
    InvalidArgument,
    EmptyMask,
    MultipleComponents,
    ContourTooShort,
    NotALeafBranch,
    UnknownBranchId,
    TooFewPreservedEndpoints,
    Disconnected,
    NotSkeletonPoint,
    MissingRadii,
    EmptyShape,
    EmptySkeleton,
    DimensionMismatch,
    NoSubmissions,
    IncompatibleLadders,
    MissingRoot,
    DecodeError,
    IoError,
    InvariantViolation,
    VersionMismatch,
    MissingLadder,
    NothingToUndo,
    NothingToRedo,
    OutOfBounds,
    StaleRevision,
    NotFound,
    Conflict,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace skelforge

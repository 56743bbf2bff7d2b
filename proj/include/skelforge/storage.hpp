#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "skelforge/image_io.hpp"
#include "skelforge/skeleton.hpp"
#include "skelforge/skeletonizer.hpp"

namespace skelforge {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "skelforge 0.1.0";

/// Sorted keys, no whitespace beyond one space after separators, floats
/// with six decimals. Same value, same bytes.
std::string canonical_json(const nlohmann::json& value);

// ---------------------------------------------------------------- datasets

enum class DatasetKind { Shape, ImageMask };

struct DatasetItem {
    std::string id;
    std::string label;  // class name parsed from the file name
    BinaryMask mask;
    std::optional<GrayImage> image;
    std::filesystem::path source;
};

struct DatasetIssue {
    std::string id;
    std::filesystem::path source;
    std::string message;
};

struct Dataset {
    std::vector<DatasetItem> items;
    std::vector<DatasetIssue> errors;
};

/// Shape datasets: every .png/.gif file directly under `root`.
/// Image+mask datasets: `root/masks/<id>.png` with optional `root/images/<id>.png`.
/// Items come back sorted by file name; unreadable files land in `errors`.
Dataset load_dataset(const std::filesystem::path& root, DatasetKind kind = DatasetKind::Shape);

/// "horse-12" -> "horse", "bone07" -> "bone", "device0-1" -> "device0".
std::string class_label(const std::string& stem);

// --------------------------------------------------------------- GT record

struct Provenance {
    std::string source_id;
    std::vector<std::string> annotator_ids;
    std::vector<std::size_t> k_values;
    std::vector<std::string> pruned_branch_ids;
    std::string rule;  // consensus rationale, empty for single annotators
    std::string tool_version = kToolVersion;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct GTRecord {
    BinaryMask skeleton;
    std::vector<Point> endpoints;
    std::vector<Point> junctions;
    std::optional<BinaryMask> object;
    BinaryMask shape;
    BinaryMask boundary;
    Provenance provenance;

    friend bool operator==(const GTRecord&, const GTRecord&) = default;
};

/// Derive the endpoint, junction and boundary fields from the skeleton and shape.
GTRecord make_gt_record(const SkeletonRaster& skeleton, const BinaryMask& shape, Provenance provenance,
                        std::optional<BinaryMask> object = std::nullopt);

/// Throws InvariantViolation naming the first broken rule.
void validate(const GTRecord& record);

/// Writes skeleton.png, shape.png, boundary.png, object.png (if any),
/// thumb.png, thumb_skeleton.png and gt.json. Returns the gt.json path.
std::filesystem::path export_gt(const GTRecord& record, const std::filesystem::path& dir);
GTRecord import_gt(const std::filesystem::path& dir);

/// Skeleton in red over the shape at half intensity, downsampled to fit
/// `max_side` pixels.
RgbImage render_preview(const GTRecord& record, int max_side = 128);

// ------------------------------------------------------------------ ladder

nlohmann::json ladder_to_json(const CandidateLadder& ladder);
CandidateLadder ladder_from_json(const nlohmann::json& doc);
void save_ladder(const CandidateLadder& ladder, const std::filesystem::path& path);
CandidateLadder load_ladder(const std::filesystem::path& path);

nlohmann::json points_to_json(const std::vector<Point>& points);
std::vector<Point> points_from_json(const nlohmann::json& doc);

}  // namespace skelforge

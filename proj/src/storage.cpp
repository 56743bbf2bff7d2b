#include "skelforge/storage.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skelforge/error.hpp"
#include "skelforge/metrics.hpp"
#include "skelforge/skeleton_graph.hpp"

namespace fs = std::filesystem;

namespace skelforge {

namespace {

void write_canonical(const nlohmann::json& v, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (v.type()) {
        case nlohmann::json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {  // std::map order: sorted keys
                if (!first) out += ",\n";
                first = false;
                out += inner + nlohmann::json(it.key()).dump() + ": ";
                write_canonical(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            const bool flat = std::none_of(v.begin(), v.end(), [](const nlohmann::json& e) { return e.is_object(); });
            if (v.empty()) {
                out += "[]";
                return;
            }
            if (flat) {
                out += "[";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) out += ", ";
                    write_canonical(v[i], out, depth + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                write_canonical(v[i], out, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case nlohmann::json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) {
                out += "null";
                return;
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", d);
            out += std::string(buf) == "-0.000000" ? "0.000000" : buf;
            return;
        }
        default:
            out += v.dump();
    }
}

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".gif";
}

BinaryMask boundary_of(const BinaryMask& shape) {
    BinaryMask out(shape.width(), shape.height());
    for (const BinaryMask& comp : connected_components(shape, 8)) {
        out = out.united(rasterize(trace_boundary(comp), shape.width(), shape.height()));
    }
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvariantViolation, what);
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
    }
}

/// Downsample by `scale` marking a cell when any covered pixel is set.
bool any_in_cell(const BinaryMask& m, int cx, int cy, int scale) {
    for (int y = cy * scale; y < std::min(m.height(), (cy + 1) * scale); ++y) {
        for (int x = cx * scale; x < std::min(m.width(), (cx + 1) * scale); ++x) {
            if (m.at(x, y)) return true;
        }
    }
    return false;
}

int thumb_scale(const BinaryMask& m, int max_side) {
    const int side = std::max(m.width(), m.height());
    return std::max(1, (side + max_side - 1) / std::max(1, max_side));
}

}  // namespace

std::string canonical_json(const nlohmann::json& value) {
    std::string out;
    write_canonical(value, out, 0);
    out += "\n";
    return out;
}

std::string class_label(const std::string& stem) {
    // One trailing number and the separator before it; "device0-1" stays in class "device0".
    std::size_t end = stem.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
    if (end > 0 && end < stem.size() && (stem[end - 1] == '-' || stem[end - 1] == '_' || stem[end - 1] == ' ')) --end;
    return end == 0 ? stem : stem.substr(0, end);
}

Dataset load_dataset(const fs::path& root, DatasetKind kind) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(ErrorCode::MissingRoot, "no dataset directory at " + root.string());
    const fs::path scan = kind == DatasetKind::Shape ? root : root / "masks";
    Dataset out;
    if (!fs::is_directory(scan, ec)) {
        if (kind == DatasetKind::ImageMask) throw Error(ErrorCode::MissingRoot, "missing " + scan.string());
        return out;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(scan)) {
        if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    for (const fs::path& file : files) {
        DatasetItem item;
        item.id = file.stem().string();
        item.label = class_label(item.id);
        item.source = file;
        try {
            item.mask = binarize(read_image(file), 128);
            if (kind == DatasetKind::ImageMask) {
                for (const char* ext : {".png", ".gif"}) {
                    const fs::path img = root / "images" / (item.id + ext);
                    if (fs::is_regular_file(img, ec)) {
                        item.image = read_image(img);
                        break;
                    }
                }
                if (item.image && (item.image->width != item.mask.width() || item.image->height != item.mask.height())) {
                    throw Error(ErrorCode::DecodeError, "image and mask sizes differ");
                }
            }
        } catch (const std::exception& e) {
            out.errors.push_back({item.id, file, e.what()});
            continue;
        }
        out.items.push_back(std::move(item));
    }
    return out;
}

GTRecord make_gt_record(const SkeletonRaster& skeleton, const BinaryMask& shape, Provenance provenance,
                        std::optional<BinaryMask> object) {
    GTRecord r;
    r.skeleton = skeleton.mask();
    const SkeletonGraph g = decompose(skeleton);
    r.endpoints = g.endpoints();
    r.junctions = g.junctions();
    r.shape = shape;
    r.boundary = boundary_of(shape);
    r.object = std::move(object);
    r.provenance = std::move(provenance);
    return r;
}

void validate(const GTRecord& record) {
    const int w = record.shape.width();
    const int h = record.shape.height();
    require(w > 0 && h > 0, "shape matrix is empty");
    require(record.skeleton.width() == w && record.skeleton.height() == h, "skeleton matrix size differs from shape");
    require(record.boundary.width() == w && record.boundary.height() == h, "boundary matrix size differs from shape");
    if (record.object) {
        require(record.object->width() == w && record.object->height() == h, "object matrix size differs from shape");
    }
    require(record.skeleton.is_subset_of(record.shape), "skeleton leaves the shape");
    const SkeletonGraph g = decompose(SkeletonRaster::from_mask(record.skeleton));
    require(g.endpoints() == record.endpoints, "endpoint list does not match the skeleton");
    require(g.junctions() == record.junctions, "junction list does not match the skeleton");
    require(boundary_of(record.shape) == record.boundary, "boundary matrix does not match the shape");
}

RgbImage render_preview(const GTRecord& record, int max_side) {
    const int scale = thumb_scale(record.shape, max_side);
    RgbImage img;
    img.width = (record.shape.width() + scale - 1) / scale;
    img.height = (record.shape.height() + scale - 1) / scale;
    img.pixels.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3, 255);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            std::uint8_t* px = &img.pixels[(static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(x)) * 3];
            if (any_in_cell(record.skeleton, x, y, scale)) {
                px[0] = 255;
                px[1] = 0;
                px[2] = 0;
            } else if (any_in_cell(record.shape, x, y, scale)) {
                px[0] = px[1] = px[2] = 128;
            }
        }
    }
    return img;
}

fs::path export_gt(const GTRecord& record, const fs::path& dir) {
    validate(record);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

    write_mask(dir / "skeleton.png", record.skeleton);
    write_mask(dir / "shape.png", record.shape);
    write_mask(dir / "boundary.png", record.boundary);
    if (record.object) write_mask(dir / "object.png", *record.object);
    write_file_atomic(dir / "thumb.png", encode_png(render_preview(record)));
    {
        const int scale = thumb_scale(record.skeleton, 128);
        GrayImage thumb;
        thumb.width = (record.skeleton.width() + scale - 1) / scale;
        thumb.height = (record.skeleton.height() + scale - 1) / scale;
        for (int y = 0; y < thumb.height; ++y) {
            for (int x = 0; x < thumb.width; ++x) thumb.pixels.push_back(any_in_cell(record.skeleton, x, y, scale) ? 255 : 0);
        }
        write_file_atomic(dir / "thumb_skeleton.png", encode_png(thumb));
    }

    const SkeletonRaster with_radii = SkeletonRaster::from_mask(record.skeleton, distance_transform(record.shape));
    const MetricReport metrics = evaluate(with_radii, record.shape);
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["coordinate_system"] = {{"origin", "top-left"}, {"x", "right"}, {"y", "down"}, {"point", "[x, y]"}};
    doc["width"] = record.shape.width();
    doc["height"] = record.shape.height();
    doc["skeleton"] = {{"matrix", "skeleton.png"},
                       {"endpoints", points_to_json(record.endpoints)},
                       {"junctions", points_to_json(record.junctions)}};
    doc["object"] = {{"shape", "shape.png"},
                     {"boundary", "boundary.png"},
                     {"object", record.object ? nlohmann::json("object.png") : nlohmann::json(nullptr)}};
    doc["thumb"] = {{"preview", "thumb.png"}, {"skeleton", "thumb_skeleton.png"}};
    doc["metrics"] = {{"re", metrics.re}, {"ss", metrics.ss}};
    const Provenance& p = record.provenance;
    doc["provenance"] = {{"source_id", p.source_id},
                         {"annotator_ids", p.annotator_ids},
                         {"k_values", p.k_values},
                         {"pruned_branch_ids", p.pruned_branch_ids},
                         {"rule", p.rule},
                         {"tool_version", p.tool_version}};
    const fs::path manifest = dir / "gt.json";
    write_file_atomic(manifest, canonical_json(doc));
    return manifest;
}

GTRecord import_gt(const fs::path& dir) {
    const nlohmann::json doc = read_json(dir / "gt.json");
    if (doc.value("format_version", -1) != kFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "unsupported gt.json format_version");
    }
    GTRecord r;
    try {
        r.skeleton = read_mask(dir / doc.at("skeleton").at("matrix").get<std::string>());
        r.endpoints = points_from_json(doc.at("skeleton").at("endpoints"));
        r.junctions = points_from_json(doc.at("skeleton").at("junctions"));
        const auto& obj = doc.at("object");
        r.shape = read_mask(dir / obj.at("shape").get<std::string>());
        r.boundary = read_mask(dir / obj.at("boundary").get<std::string>());
        if (!obj.at("object").is_null()) r.object = read_mask(dir / obj.at("object").get<std::string>());
        const auto& p = doc.at("provenance");
        r.provenance.source_id = p.at("source_id").get<std::string>();
        r.provenance.annotator_ids = p.at("annotator_ids").get<std::vector<std::string>>();
        r.provenance.k_values = p.at("k_values").get<std::vector<std::size_t>>();
        r.provenance.pruned_branch_ids = p.at("pruned_branch_ids").get<std::vector<std::string>>();
        r.provenance.rule = p.at("rule").get<std::string>();
        r.provenance.tool_version = p.at("tool_version").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::DecodeError, std::string("malformed gt.json: ") + e.what());
    }
    if (r.shape.width() != doc.value("width", -1) || r.shape.height() != doc.value("height", -1)) {
        throw Error(ErrorCode::InvariantViolation, "gt.json size disagrees with shape.png");
    }
    validate(r);
    return r;
}

nlohmann::json points_to_json(const std::vector<Point>& points) {
    nlohmann::json arr = nlohmann::json::array();
    for (Point p : points) arr.push_back({p.x, p.y});
    return arr;
}

std::vector<Point> points_from_json(const nlohmann::json& doc) {
    std::vector<Point> out;
    for (const auto& e : doc) {
        if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::DecodeError, "point must be [x, y]");
        out.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    return out;
}

nlohmann::json ladder_to_json(const CandidateLadder& ladder) {
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["width"] = ladder.steps.empty() ? 0 : ladder.steps.front().width;
    doc["height"] = ladder.steps.empty() ? 0 : ladder.steps.front().height;
    doc["dce_k"] = ladder.dce_k;
    nlohmann::json steps = nlohmann::json::array();
    for (const SkeletonRaster& s : ladder.steps) {
        steps.push_back({{"points", points_to_json(s.points)}, {"radii", s.radii}});
    }
    doc["steps"] = std::move(steps);
    return doc;
}

CandidateLadder ladder_from_json(const nlohmann::json& doc) {
    if (doc.value("format_version", -1) != kFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "unsupported ladder format_version");
    }
    CandidateLadder ladder;
    try {
        const int w = doc.at("width").get<int>();
        const int h = doc.at("height").get<int>();
        ladder.dce_k = doc.at("dce_k").get<std::vector<std::size_t>>();
        for (const auto& step : doc.at("steps")) {
            SkeletonRaster s;
            s.width = w;
            s.height = h;
            s.points = points_from_json(step.at("points"));
            s.radii = step.at("radii").get<std::vector<double>>();
            if (!std::is_sorted(s.points.begin(), s.points.end())) throw Error(ErrorCode::DecodeError, "ladder points not sorted");
            ladder.steps.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::DecodeError, std::string("malformed ladder: ") + e.what());
    }
    if (ladder.steps.size() != ladder.dce_k.size()) throw Error(ErrorCode::DecodeError, "ladder step count mismatch");
    return ladder;
}

void save_ladder(const CandidateLadder& ladder, const fs::path& path) {
    write_file_atomic(path, ladder_to_json(ladder).dump() + "\n");
}

CandidateLadder load_ladder(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::MissingLadder, "no ladder at " + path.string());
    return ladder_from_json(read_json(path));
}

}  // namespace skelforge

#include "skelforge/cli.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "skelforge/consensus.hpp"
#include "skelforge/error.hpp"
#include "skelforge/metrics.hpp"
#include "skelforge/plot.hpp"
#include "skelforge/session.hpp"
#include "skelforge/skeleton_graph.hpp"
#include "skelforge/storage.hpp"

namespace fs = std::filesystem;

namespace skelforge {

namespace {

/// Run fn(i) for i in [0, n) on `workers` threads. Callers write results into
/// per-index slots, so output order never depends on scheduling.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

bool valid_ladder_config(const JobConfig& c) {
    if (c.k_min < 3 || c.k_max < c.k_min) {
        spdlog::error("need 3 <= kmin <= kmax (got {}..{})", c.k_min, c.k_max);
        return false;
    }
    if (c.workers < 1) {
        spdlog::error("workers must be at least 1");
        return false;
    }
    return true;
}

/// Step of the ladder to publish.
std::size_t select_step(const CandidateLadder& ladder, StepSelection mode) {
    if (mode == StepSelection::Full) return 0;
    // RE only grows along the ladder, so the first simple-enough step has the least error.
    for (std::size_t i = 0; i < ladder.steps.size(); ++i) {
        if (simplicity(ladder.steps[i]) >= kAutoMinSimplicity) return i;
    }
    return ladder.steps.size() - 1;
}

SkeletonRaster with_radii(const BinaryMask& skeleton, const BinaryMask& shape) {
    return SkeletonRaster::from_mask(skeleton, distance_transform(shape));
}

std::vector<fs::path> find_records(const fs::path& root) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(root, ec); it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        if (it->is_regular_file() && it->path().filename() == "gt.json") out.push_back(it->path().parent_path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Skeleton masks by id: image files directly in `dir`, or record directories holding skeleton.png.
std::map<std::string, fs::path> skeleton_files(const fs::path& dir) {
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const fs::path& p = entry.path();
        if (entry.is_directory() && fs::exists(p / "skeleton.png")) {
            out[p.filename().string()] = p / "skeleton.png";
        } else if (entry.is_regular_file()) {
            std::string ext = p.extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (ext == ".png" || ext == ".gif") out[p.stem().string()] = p;
        }
    }
    return out;
}

fs::path ensure_dir(const fs::path& dir) {
    fs::create_directories(dir);
    return dir;
}

}  // namespace

int cmd_skeletonize(const JobConfig& config) {
    if (!valid_ladder_config(config)) return kExitConfig;
    if (config.output.empty()) {
        spdlog::error("--output is required");
        return kExitConfig;
    }
    Dataset ds;
    std::error_code ec;
    // image datasets keep their masks under masks/
    const bool image_masks = fs::is_directory(config.input / "masks", ec);
    try {
        ds = load_dataset(config.input, image_masks ? DatasetKind::ImageMask : DatasetKind::Shape);
        ensure_dir(config.output);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitConfig;
    }
    std::vector<nlohmann::json> rows(ds.items.size());
    std::vector<std::string> failures(ds.items.size());
    parallel_for(ds.items.size(), config.workers, [&](std::size_t i) {
        const DatasetItem& item = ds.items[i];
        try {
            auto parts = connected_components(item.mask, 8);
            if (parts.empty()) throw Error(ErrorCode::EmptyMask, "shape is empty");
            if (parts.size() > 1) spdlog::warn("{}: keeping the largest of {} components", item.id, parts.size());
            BinaryMask shape = config.fill_holes ? fill_holes(parts.front()) : parts.front();
            LadderOptions opts;
            opts.k_min = config.k_min;
            opts.k_max = config.k_max;
            opts.fill_holes = false;
            const CandidateLadder ladder = build_ladder(shape, opts);
            const std::size_t step = select_step(ladder, config.select);
            const SkeletonRaster& chosen = ladder.steps[step];
            Provenance prov;
            prov.source_id = item.id;
            prov.annotator_ids = {"auto"};
            prov.k_values = {ladder.dce_k[step]};
            const GTRecord record = image_masks ? make_gt_record(chosen, shape, prov, item.mask) : make_gt_record(chosen, shape, prov);
            const fs::path dir = ensure_dir(config.output / item.id);
            save_ladder(ladder, dir / "ladder.json");
            export_gt(record, dir);
            rows[i] = {{"id", item.id},
                       {"label", item.label},
                       {"step", step},
                       {"dce_k", ladder.dce_k[step]},
                       {"re", reconstruction_error(chosen, shape)},
                       {"ss", simplicity(chosen)},
                       {"points", chosen.size()},
                       {"endpoints", record.endpoints.size()},
                       {"junctions", record.junctions.size()},
                       {"components", parts.size()}};
            spdlog::info("{}: step {} of {}", item.id, step, ladder.steps.size());
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });
    nlohmann::json items = nlohmann::json::array();
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& issue : ds.errors) errors.push_back({{"id", issue.id}, {"message", issue.message}});
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        if (failures[i].empty()) {
            items.push_back(rows[i]);
        } else {
            errors.push_back({{"id", ds.items[i].id}, {"message", failures[i]}});
            spdlog::error("{}: {}", ds.items[i].id, failures[i]);
        }
    }
    nlohmann::json summary{{"items", items},
                           {"errors", errors},
                           {"k_min", config.k_min},
                           {"k_max", config.k_max},
                           {"fill_holes", config.fill_holes},
                           {"select", config.select == StepSelection::Auto ? "auto" : "full"}};
    write_file_atomic(config.output / "summary.json", canonical_json(summary));
    std::cout << "skeletonized " << items.size() << " item(s), " << errors.size() << " error(s)\n";
    return errors.empty() ? kExitOk : kExitItemFailure;
}

int cmd_report(const JobConfig& config) {
    std::error_code ec;
    if (!fs::is_directory(config.input, ec)) {
        spdlog::error("no directory at {}", config.input.string());
        return kExitConfig;
    }
    const auto records = find_records(config.input);
    if (records.empty()) {
        spdlog::error("no GT records under {}", config.input.string());
        return kExitConfig;
    }
    struct Acc {
        std::size_t n = 0;
        double re = 0.0;
        double ss = 0.0;
    };
    std::vector<std::optional<std::pair<double, double>>> values(records.size());
    std::vector<std::string> failures(records.size());
    parallel_for(records.size(), config.workers, [&](std::size_t i) {
        try {
            const GTRecord r = import_gt(records[i]);
            const SkeletonRaster s = with_radii(r.skeleton, r.shape);
            values[i] = std::make_pair(reconstruction_error(s, r.shape), simplicity(s));
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });
    std::map<std::string, Acc> by_dataset;
    bool failed = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!values[i]) {
            spdlog::error("{}: {}", records[i].string(), failures[i]);
            failed = true;
            continue;
        }
        std::string name = fs::relative(records[i].parent_path(), config.input, ec).generic_string();
        if (name.empty() || name == ".") name = config.input.filename().string();
        if (name.empty()) name = "dataset";
        Acc& a = by_dataset[name];
        ++a.n;
        a.re += values[i]->first;
        a.ss += values[i]->second;
    }
    if (by_dataset.empty()) return kExitItemFailure;
    std::string csv = "dataset,records,mean_re,mean_ss\n";
    std::cout << "dataset                         records   mean RE   mean SS\n";
    for (const auto& [name, a] : by_dataset) {
        const double re = a.re / static_cast<double>(a.n);
        const double ss = a.ss / static_cast<double>(a.n);
        csv += name + "," + std::to_string(a.n) + "," + fmt6(re) + "," + fmt6(ss) + "\n";
        char line[160];
        std::snprintf(line, sizeof(line), "%-30s %8zu  %8.4f  %8.4f\n", name.c_str(), a.n, re, ss);
        std::cout << line;
    }
    if (!config.output.empty()) {
        ensure_dir(config.output);
        write_file_atomic(config.output / "report.csv", csv);
    }
    return failed ? kExitItemFailure : kExitOk;
}

int cmd_eval(const JobConfig& config) {
    std::error_code ec;
    if (!fs::is_directory(config.input, ec) || !fs::is_directory(config.gt, ec)) {
        spdlog::error("both --input and --gt must be directories");
        return kExitConfig;
    }
    if (config.tolerance && *config.tolerance < 0.0) {
        spdlog::error("tolerance must be >= 0");
        return kExitConfig;
    }
    const auto pred = skeleton_files(config.input);
    const auto gt = skeleton_files(config.gt);
    std::vector<std::string> ids;
    std::vector<std::string> unmatched;
    for (const auto& [id, _] : gt) (pred.count(id) ? ids : unmatched).push_back(id);
    for (const auto& [id, _] : pred) {
        if (!gt.count(id)) unmatched.push_back(id);
    }
    if (!unmatched.empty() && !config.intersect) {
        spdlog::error("{} id(s) present on one side only (first: {}); pass --intersect to skip them", unmatched.size(), unmatched.front());
        return kExitConfig;
    }
    struct Row {
        std::optional<double> aep;
        F1Result f1;
        double tolerance = 0.0;
        std::string error;
    };
    std::vector<Row> rows(ids.size());
    parallel_for(ids.size(), config.workers, [&](std::size_t i) {
        try {
            const BinaryMask d = read_mask(pred.at(ids[i]));
            const BinaryMask g = read_mask(gt.at(ids[i]));
            if (d.width() != g.width() || d.height() != g.height()) throw Error(ErrorCode::DimensionMismatch, "grid sizes differ");
            const SkeletonRaster ds = SkeletonRaster::from_mask(d);
            const SkeletonRaster gs = SkeletonRaster::from_mask(g);
            rows[i].tolerance = config.tolerance.value_or(default_f1_tolerance(g.width(), g.height()));
            if (!ds.empty() && !gs.empty()) rows[i].aep = aep(ds, gs);
            rows[i].f1 = f1_score(ds, gs, rows[i].tolerance);
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    });
    std::string csv = "id,aep,precision,recall,f1,tolerance\n";
    double sum_aep = 0.0;
    double sum_f1 = 0.0;
    std::size_t n_aep = 0;
    std::size_t n_f1 = 0;
    bool failed = false;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Row& r = rows[i];
        if (!r.error.empty()) {
            spdlog::error("{}: {}", ids[i], r.error);
            failed = true;
            continue;
        }
        csv += ids[i] + "," + (r.aep ? fmt6(*r.aep) : "") + "," + fmt6(r.f1.precision) + "," + fmt6(r.f1.recall) + "," +
               fmt6(r.f1.f1) + "," + fmt6(r.tolerance) + "\n";
        if (r.aep) {
            sum_aep += *r.aep;
            ++n_aep;
        }
        sum_f1 += r.f1.f1;
        ++n_f1;
    }
    nlohmann::json summary{{"items", n_f1},
                           {"mean_aep", n_aep ? nlohmann::json(sum_aep / static_cast<double>(n_aep)) : nlohmann::json(nullptr)},
                           {"mean_f1", n_f1 ? nlohmann::json(sum_f1 / static_cast<double>(n_f1)) : nlohmann::json(nullptr)}};
    if (!config.similarity.empty()) {
        try {
            const SimilarityMatrix m = load_similarity_csv(config.similarity);
            std::vector<std::string> labels;
            std::map<std::string, std::size_t> sizes;
            for (const auto& [id, _] : gt) {
                labels.push_back(class_label(id));
                ++sizes[labels.back()];
            }
            std::size_t per_class = config.per_class;
            if (per_class == 0) {
                per_class = sizes.empty() ? 0 : sizes.begin()->second;
                for (const auto& [_, n] : sizes) {
                    if (n != per_class) throw Error(ErrorCode::InvalidArgument, "classes differ in size; pass --per-class");
                }
            }
            summary["bes"] = bulls_eye(m, labels, per_class);
        } catch (const std::exception& e) {
            spdlog::error("bulls-eye: {}", e.what());
            return kExitConfig;
        }
    }
    if (!config.output.empty()) {
        ensure_dir(config.output);
        write_file_atomic(config.output / "eval.csv", csv);
        write_file_atomic(config.output / "eval.json", canonical_json(summary));
    }
    std::cout << canonical_json(summary);
    return failed ? kExitItemFailure : kExitOk;
}

int cmd_integrate(const JobConfig& config) {
    std::error_code ec;
    if (!fs::is_directory(config.input, ec) || config.output.empty()) {
        spdlog::error("--input must be a directory of GT records and --output is required");
        return kExitConfig;
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(config.input)) {
        if (entry.is_directory() && fs::exists(entry.path() / "gt.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) {
        spdlog::error("no GT records in {}", config.input.string());
        return kExitConfig;
    }
    std::vector<AnnotatorSubmission> subs;
    std::optional<GTRecord> first;
    std::set<std::size_t> ks;
    for (const fs::path& dir : dirs) {
        GTRecord r;
        try {
            r = import_gt(dir);
        } catch (const std::exception& e) {
            spdlog::error("{}: {}", dir.string(), e.what());
            return kExitItemFailure;
        }
        if (first && !(first->shape == r.shape)) {
            spdlog::error("{} annotates a different shape", dir.string());
            return kExitConfig;
        }
        if (!first) first = r;
        ks.insert(r.provenance.k_values.begin(), r.provenance.k_values.end());
        const std::string who = r.provenance.annotator_ids.empty() ? dir.filename().string() : r.provenance.annotator_ids.front();
        subs.push_back(make_submission(who, with_radii(r.skeleton, r.shape), r.shape));
    }
    const ConsensusResult result = integrate(subs, first->shape);
    Provenance prov;
    prov.source_id = first->provenance.source_id;
    for (const auto& s : subs) prov.annotator_ids.push_back(s.annotator_id);
    prov.k_values.assign(ks.begin(), ks.end());
    prov.rule = result.rationale;
    try {
        export_gt(make_gt_record(result.skeleton, first->shape, prov, first->object), config.output);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitItemFailure;
    }
    nlohmann::json table = nlohmann::json::array();
    const auto counts = hints(subs);
    for (std::size_t i = 0; i < subs.size(); ++i) {
        const std::string digest = skeleton_digest(subs[i].skeleton);
        table.push_back({{"annotator_id", subs[i].annotator_id}, {"digest", digest}, {"hints", counts.at(digest)}, {"error", subs[i].re}});
    }
    write_file_atomic(config.output / "consensus.json",
                      canonical_json({{"rationale", result.rationale}, {"votes", result.votes}, {"submissions", table}}));
    std::cout << "consensus: " << result.rationale << "\n";
    return kExitOk;
}

int cmd_plot(const JobConfig& config) {
    std::error_code ec;
    if (!fs::is_directory(config.input, ec) || config.output.empty()) {
        spdlog::error("--input must be a ladder or session directory and --output is required");
        return kExitConfig;
    }
    Series re{"RE", {}, 200, 30, 30};
    Series ss{"SS", {}, 30, 60, 200};
    try {
        if (fs::exists(config.input / "session.json")) {
            const AnnotationSession s = load_session(config.input);
            for (const HistoryEntry& e : s.history()) {
                re.values.push_back(e.re);
                ss.values.push_back(e.ss);
            }
        } else {
            const CandidateLadder ladder = load_ladder(config.input / "ladder.json");
            const BinaryMask shape = read_mask(config.input / "shape.png");
            for (const SkeletonRaster& step : ladder.steps) {
                re.values.push_back(reconstruction_error(step, shape));
                ss.values.push_back(simplicity(step));
            }
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitItemFailure;
    }
    fs::path out = config.output;
    if (out.extension() != ".png") out = ensure_dir(out) / "curves.png";
    else if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_file_atomic(out, encode_png(render_curves({re, ss})));
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
}

}  // namespace skelforge

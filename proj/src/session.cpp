#include "skelforge/session.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "skelforge/error.hpp"
#include "skelforge/metrics.hpp"

namespace fs = std::filesystem;

namespace skelforge {

AnnotationSession::AnnotationSession(SessionInfo info, CandidateLadder ladder, BinaryMask shape)
    : info_(std::move(info)), ladder_(std::move(ladder)), shape_(std::move(shape)) {
    if (ladder_.steps.empty()) throw Error(ErrorCode::MissingLadder, "ladder has no steps");
    for (const SkeletonRaster& s : ladder_.steps) {
        if (s.width != shape_.width() || s.height != shape_.height()) {
            throw Error(ErrorCode::DimensionMismatch, "ladder and shape grids differ");
        }
    }
    push_entry(EventKind::Step, 0, {}, decompose(ladder_.steps.front()));
}

void AnnotationSession::push_entry(EventKind cause, std::size_t step, std::vector<std::vector<BranchId>> prunes,
                                   SkeletonGraph graph) {
    HistoryEntry e;
    e.index = history_.size();
    if (!history_.empty()) e.parent = cursor_;
    e.cause = cause;
    e.step = step;
    e.prunes = std::move(prunes);
    e.re = reconstruction_error(graph.raster(), shape_);
    e.ss = simplicity(graph.raster());
    e.point_count = graph.raster().size();
    history_.push_back(std::move(e));
    graphs_.push_back(std::move(graph));
    cursor_ = history_.size() - 1;
}

void AnnotationSession::apply(const SessionEvent& event) {
    const HistoryEntry cur = history_[cursor_];
    switch (event.kind) {
        case EventKind::Step: {
            if (event.direction != 1 && event.direction != -1) {
                throw Error(ErrorCode::InvalidArgument, "direction must be +1 or -1");
            }
            // "+" asks for a more complex skeleton, which sits earlier in the ladder.
            if (event.direction == 1 && cur.step == 0) throw Error(ErrorCode::OutOfBounds, "already at the full skeleton");
            const std::size_t target = event.direction == 1 ? cur.step - 1 : cur.step + 1;
            if (target >= ladder_.steps.size()) throw Error(ErrorCode::OutOfBounds, "already at the simplest step");
            push_entry(EventKind::Step, target, {}, decompose(ladder_.steps[target]));
            redo_.clear();
            break;
        }
        case EventKind::Prune: {
            if (event.branch_ids.empty()) throw Error(ErrorCode::InvalidArgument, "no branches to prune");
            const std::set<BranchId> ids(event.branch_ids.begin(), event.branch_ids.end());
            SkeletonGraph next = prune_branch(graphs_[cursor_], ids);
            auto prunes = cur.prunes;
            prunes.emplace_back(ids.begin(), ids.end());
            push_entry(EventKind::Prune, cur.step, std::move(prunes), std::move(next));
            redo_.clear();
            break;
        }
        case EventKind::Undo:
            if (!cur.parent) throw Error(ErrorCode::NothingToUndo, "at the start of the history");
            redo_.push_back(cursor_);
            cursor_ = *cur.parent;
            break;
        case EventKind::Redo:
            if (redo_.empty()) throw Error(ErrorCode::NothingToRedo, "nothing to redo");
            cursor_ = redo_.back();
            redo_.pop_back();
            break;
        case EventKind::Restore:
            if (event.target >= history_.size()) throw Error(ErrorCode::OutOfBounds, "no such history entry");
            cursor_ = event.target;
            redo_.clear();
            break;
    }
    events_.push_back(event);
}

std::vector<std::string> AnnotationSession::pruned_ids() const {
    std::vector<std::string> out;
    for (const auto& batch : current_entry().prunes) {
        for (BranchId id : batch) out.push_back(format_branch_id(id));
    }
    return out;
}

AnnotationSession create_session(SessionInfo info, const BinaryMask& shape) {
    const BinaryMask source = info.fill_holes ? fill_holes(shape) : shape;
    LadderOptions opts;
    opts.k_min = info.k_min;
    opts.k_max = info.k_max;
    opts.fill_holes = false;
    CandidateLadder ladder = build_ladder(source, opts);
    return AnnotationSession(std::move(info), std::move(ladder), source);
}

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Step: return "step";
        case EventKind::Prune: return "prune";
        case EventKind::Undo: return "undo";
        case EventKind::Redo: return "redo";
        case EventKind::Restore: return "restore";
    }
    return "unknown";
}

nlohmann::json event_to_json(const SessionEvent& event) {
    nlohmann::json doc{{"type", to_string(event.kind)}};
    switch (event.kind) {
        case EventKind::Step: doc["direction"] = event.direction; break;
        case EventKind::Prune: {
            std::vector<std::string> ids;
            for (BranchId id : event.branch_ids) ids.push_back(format_branch_id(id));
            doc["branch_ids"] = ids;
            break;
        }
        case EventKind::Restore: doc["target"] = event.target; break;
        default: break;
    }
    return doc;
}

SessionEvent event_from_json(const nlohmann::json& doc) {
    SessionEvent e;
    try {
        const std::string type = doc.at("type").get<std::string>();
        if (type == "step") {
            e.kind = EventKind::Step;
            e.direction = doc.at("direction").get<int>();
        } else if (type == "prune") {
            e.kind = EventKind::Prune;
            for (const auto& id : doc.at("branch_ids")) e.branch_ids.push_back(parse_branch_id(id.get<std::string>()));
        } else if (type == "undo") {
            e.kind = EventKind::Undo;
        } else if (type == "redo") {
            e.kind = EventKind::Redo;
        } else if (type == "restore") {
            e.kind = EventKind::Restore;
            e.target = doc.at("target").get<std::size_t>();
        } else {
            throw Error(ErrorCode::DecodeError, "unknown event type '" + type + "'");
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::DecodeError, std::string("malformed event: ") + ex.what());
    }
    return e;
}

void save_session(const AnnotationSession& session, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
    if (!fs::exists(dir / "ladder.json", ec)) save_ladder(session.ladder(), dir / "ladder.json");
    if (!fs::exists(dir / "shape.png", ec)) write_mask(dir / "shape.png", session.shape());
    const SessionInfo& info = session.info();
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["info"] = {{"session_id", info.session_id}, {"shape_id", info.shape_id},
                   {"annotator_id", info.annotator_id}, {"k_min", info.k_min},
                   {"k_max", info.k_max},           {"fill_holes", info.fill_holes}};
    doc["revision"] = session.revision();
    nlohmann::json events = nlohmann::json::array();
    for (const SessionEvent& e : session.events()) events.push_back(event_to_json(e));
    doc["events"] = std::move(events);
    write_file_atomic(dir / "session.json", doc.dump(1) + "\n");
}

AnnotationSession load_session(const fs::path& dir) {
    std::ifstream in(dir / "session.json", std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "no session at " + dir.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::DecodeError, std::string("malformed session.json: ") + e.what());
    }
    if (doc.value("format_version", -1) != kFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "unsupported session format_version");
    }
    SessionInfo info;
    std::vector<SessionEvent> events;
    std::size_t revision = 0;
    try {
        const auto& i = doc.at("info");
        info.session_id = i.at("session_id").get<std::string>();
        info.shape_id = i.at("shape_id").get<std::string>();
        info.annotator_id = i.at("annotator_id").get<std::string>();
        info.k_min = i.at("k_min").get<std::size_t>();
        info.k_max = i.at("k_max").get<std::size_t>();
        info.fill_holes = i.at("fill_holes").get<bool>();
        revision = doc.at("revision").get<std::size_t>();
        for (const auto& e : doc.at("events")) events.push_back(event_from_json(e));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::DecodeError, std::string("malformed session.json: ") + e.what());
    }
    CandidateLadder ladder = load_ladder(dir / "ladder.json");
    const BinaryMask shape = read_mask(dir / "shape.png");
    AnnotationSession session(std::move(info), std::move(ladder), shape);
    for (const SessionEvent& e : events) session.apply(e);
    if (session.revision() != revision) throw Error(ErrorCode::InvariantViolation, "event log and revision disagree");
    return session;
}

GTRecord session_record(const AnnotationSession& session) {
    Provenance p;
    p.source_id = session.info().shape_id;
    p.annotator_ids = {session.info().annotator_id};
    p.k_values = {session.ladder().dce_k[session.current_entry().step]};
    p.pruned_branch_ids = session.pruned_ids();
    return make_gt_record(session.graph().raster(), session.shape(), std::move(p));
}

}  // namespace skelforge

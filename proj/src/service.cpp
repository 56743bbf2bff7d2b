#include "skelforge/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <random>
#include <regex>

#include "skelforge/consensus.hpp"
#include "skelforge/error.hpp"
#include "skelforge/metrics.hpp"

namespace fs = std::filesystem;

namespace skelforge {

namespace {

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::StaleRevision:
        case ErrorCode::Conflict: return 409;
        case ErrorCode::IoError: return 500;
        default: return 422;
    }
}

Response failure(ErrorCode code, const std::string& message) {
    return {status_for(code), {{"error", std::string(to_string(code))}, {"message", message}}};
}

Response failure(const Error& e) { return failure(e.code(), e.what()); }

std::string kind_name(BranchKind k) {
    switch (k) {
        case BranchKind::Open: return "open";
        case BranchKind::Cycle: return "cycle";
        case BranchKind::Isolated: return "isolated";
    }
    return "unknown";
}

nlohmann::json entry_json(const HistoryEntry& e) {
    std::vector<std::string> pruned;
    for (const auto& batch : e.prunes) {
        for (BranchId id : batch) pruned.push_back(format_branch_id(id));
    }
    return {{"index", e.index},
            {"parent", e.parent ? nlohmann::json(*e.parent) : nlohmann::json(nullptr)},
            {"cause", to_string(e.cause)},
            {"step", e.step},
            {"pruned", pruned},
            {"re", e.re},
            {"ss", e.ss},
            {"point_count", e.point_count}};
}

}  // namespace

nlohmann::json graph_json(const SkeletonGraph& graph) {
    nlohmann::json branches = nlohmann::json::array();
    for (const Branch& b : graph.branches()) {
        branches.push_back({{"id", format_branch_id(b.id)},
                            {"kind", kind_name(b.kind)},
                            {"leaf", graph.is_leaf(b)},
                            {"length", b.length},
                            {"path", points_to_json(b.path)}});
    }
    return {{"width", graph.raster().width},
            {"height", graph.raster().height},
            {"points", points_to_json(graph.raster().points)},
            {"endpoints", points_to_json(graph.endpoints())},
            {"junctions", points_to_json(graph.junctions())},
            {"branches", std::move(branches)}};
}

AnnotationService::AnnotationService(ServiceConfig config) : config_(std::move(config)) {
    std::error_code ec;
    if (!config_.dataset_root.empty() && fs::is_directory(config_.dataset_root, ec)) {
        Dataset ds = load_dataset(config_.dataset_root, DatasetKind::Shape);
        for (auto& item : ds.items) shapes_.emplace(item.id, std::move(item.mask));
        for (const auto& issue : ds.errors) spdlog::warn("skipping shape {}: {}", issue.id, issue.message);
    }
    if (config_.session_root.empty()) config_.session_root = fs::temp_directory_path() / "skelforge-sessions";
    if (config_.export_root.empty()) config_.export_root = config_.session_root / "exports";
    fs::create_directories(config_.session_root, ec);
    // Sessions persist as event logs; pick them back up after a restart.
    for (const auto& entry : fs::directory_iterator(config_.session_root, ec)) {
        if (!entry.is_directory() || !fs::exists(entry.path() / "session.json")) continue;
        try {
            auto slot = std::make_shared<Slot>();
            slot->session = std::make_unique<AnnotationSession>(load_session(entry.path()));
            sessions_.emplace(slot->session->info().session_id, std::move(slot));
        } catch (const std::exception& e) {
            spdlog::warn("cannot restore session in {}: {}", entry.path().string(), e.what());
        }
    }
}

std::string AnnotationService::new_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(id_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%04llx%012llx", static_cast<unsigned long long>(++id_counter_ & 0xffff),
                  static_cast<unsigned long long>(rng() & 0xffffffffffffULL));
    return buf;
}

std::shared_ptr<AnnotationService::Slot> AnnotationService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

nlohmann::json AnnotationService::state_json(const AnnotationSession& s) const {
    const HistoryEntry& e = s.current_entry();
    return {{"session_id", s.info().session_id},
            {"shape_id", s.info().shape_id},
            {"annotator_id", s.info().annotator_id},
            {"revision", s.revision()},
            {"step", e.step},
            {"step_count", s.ladder().steps.size()},
            {"dce_k", s.ladder().dce_k[e.step]},
            {"re", e.re},
            {"ss", e.ss},
            {"cursor", s.cursor()},
            {"can_undo", e.parent.has_value()},
            {"can_redo", !s.redo_stack().empty()},
            {"pruned", s.pruned_ids()},
            {"graph", graph_json(s.graph())}};
}

Response AnnotationService::create_session(const nlohmann::json& body) {
    SessionInfo info;
    try {
        info.shape_id = body.at("shape_id").get<std::string>();
        info.annotator_id = body.value("annotator_id", std::string("anonymous"));
        info.k_min = body.value("k_min", std::size_t{4});
        info.k_max = body.value("k_max", std::size_t{30});
        info.fill_holes = body.value("fill_holes", true);
    } catch (const nlohmann::json::exception& e) {
        return failure(ErrorCode::InvalidArgument, e.what());
    }
    const auto shape = shapes_.find(info.shape_id);
    if (shape == shapes_.end()) return failure(ErrorCode::NotFound, "unknown shape " + info.shape_id);
    if (info.k_min < 3 || info.k_max < info.k_min) return failure(ErrorCode::InvalidArgument, "invalid k range");
    info.session_id = new_session_id();
    auto slot = std::make_shared<Slot>();
    try {
        slot->session = std::make_unique<AnnotationSession>(skelforge::create_session(info, shape->second));
        save_session(*slot->session, config_.session_root / info.session_id);
    } catch (const Error& e) {
        return failure(e);
    }
    nlohmann::json out = state_json(*slot->session);
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json ss = nlohmann::json::array();
    for (const SkeletonRaster& step : slot->session->ladder().steps) {
        re.push_back(reconstruction_error(step, slot->session->shape()));
        ss.push_back(simplicity(step));
    }
    out["ladder"] = {{"steps", slot->session->ladder().steps.size()},
                     {"dce_k", slot->session->ladder().dce_k},
                     {"re", re},
                     {"ss", ss}};
    {
        std::unique_lock lock(sessions_mutex_);
        sessions_.emplace(info.session_id, std::move(slot));
    }
    spdlog::info("session {} created for shape {}", info.session_id, info.shape_id);
    return {201, std::move(out)};
}

Response AnnotationService::get_session(const std::string& id) {
    const auto slot = find(id);
    if (!slot) return failure(ErrorCode::NotFound, "unknown session " + id);
    std::lock_guard lock(slot->mutex);
    return {200, state_json(*slot->session)};
}

Response AnnotationService::history(const std::string& id) {
    const auto slot = find(id);
    if (!slot) return failure(ErrorCode::NotFound, "unknown session " + id);
    std::lock_guard lock(slot->mutex);
    const AnnotationSession& s = *slot->session;
    nlohmann::json entries = nlohmann::json::array();
    for (const HistoryEntry& e : s.history()) entries.push_back(entry_json(e));
    nlohmann::json events = nlohmann::json::array();
    for (const SessionEvent& e : s.events()) events.push_back(event_to_json(e));
    return {200, {{"session_id", id}, {"revision", s.revision()}, {"cursor", s.cursor()}, {"entries", entries}, {"events", events}}};
}

Response AnnotationService::mutate(const std::string& id, const nlohmann::json& body, const SessionEvent& event) {
    const auto slot = find(id);
    if (!slot) return failure(ErrorCode::NotFound, "unknown session " + id);
    std::lock_guard lock(slot->mutex);
    AnnotationSession& s = *slot->session;
    if (!body.contains("revision") || !body["revision"].is_number_integer()) {
        return failure(ErrorCode::InvalidArgument, "revision is required");
    }
    if (body["revision"].get<long long>() != static_cast<long long>(s.revision())) {
        return failure(ErrorCode::StaleRevision, "session is at revision " + std::to_string(s.revision()));
    }
    try {
        s.apply(event);
        save_session(s, config_.session_root / id);
    } catch (const Error& e) {
        return failure(e);
    }
    return {200, state_json(s)};
}

Response AnnotationService::step(const std::string& id, const nlohmann::json& body) {
    SessionEvent e;
    e.kind = EventKind::Step;
    if (!body.contains("direction") || !body["direction"].is_number_integer()) {
        return failure(ErrorCode::InvalidArgument, "direction must be +1 or -1");
    }
    e.direction = body["direction"].get<int>();
    return mutate(id, body, e);
}

Response AnnotationService::prune(const std::string& id, const nlohmann::json& body) {
    SessionEvent e;
    e.kind = EventKind::Prune;
    try {
        for (const auto& v : body.at("branch_ids")) e.branch_ids.push_back(parse_branch_id(v.get<std::string>()));
    } catch (const Error& err) {
        return failure(err);
    } catch (const nlohmann::json::exception& err) {
        return failure(ErrorCode::InvalidArgument, err.what());
    }
    return mutate(id, body, e);
}

Response AnnotationService::undo(const std::string& id, const nlohmann::json& body) {
    return mutate(id, body, {EventKind::Undo, 0, {}, 0});
}

Response AnnotationService::redo(const std::string& id, const nlohmann::json& body) {
    return mutate(id, body, {EventKind::Redo, 0, {}, 0});
}

Response AnnotationService::restore(const std::string& id, const nlohmann::json& body) {
    if (!body.contains("index") || !body["index"].is_number_unsigned()) {
        return failure(ErrorCode::InvalidArgument, "index must be a history entry number");
    }
    return mutate(id, body, {EventKind::Restore, 0, {}, body["index"].get<std::size_t>()});
}

Response AnnotationService::export_gt(const std::string& id, const nlohmann::json& body) {
    const auto slot = find(id);
    if (!slot) return failure(ErrorCode::NotFound, "unknown session " + id);
    std::lock_guard lock(slot->mutex);
    const AnnotationSession& s = *slot->session;
    if (body.contains("revision") && body["revision"] != s.revision()) {
        return failure(ErrorCode::StaleRevision, "session is at revision " + std::to_string(s.revision()));
    }
    try {
        const fs::path manifest = skelforge::export_gt(session_record(s), config_.export_root / id);
        return {200, {{"manifest", manifest.string()}, {"revision", s.revision()}}};
    } catch (const Error& e) {
        return failure(e);
    }
}

Response AnnotationService::integrate(const nlohmann::json& body) {
    std::string shape_id;
    std::vector<std::string> ids;
    try {
        shape_id = body.at("shape_id").get<std::string>();
        ids = body.at("session_ids").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        return failure(ErrorCode::InvalidArgument, e.what());
    }
    if (ids.empty()) return failure(ErrorCode::NoSubmissions, "no sessions given");
    std::vector<AnnotatorSubmission> subs;
    std::optional<BinaryMask> shape;
    std::optional<SkeletonRaster> superset;
    bool shared_ladder = true;
    for (const std::string& id : ids) {
        const auto slot = find(id);
        if (!slot) return failure(ErrorCode::NotFound, "unknown session " + id);
        std::lock_guard lock(slot->mutex);
        const AnnotationSession& s = *slot->session;
        if (s.info().shape_id != shape_id || (shape && !(*shape == s.shape()))) {
            return failure(ErrorCode::Conflict, "session " + id + " annotates a different shape");
        }
        if (!shape) shape = s.shape();
        const SkeletonRaster& full = s.ladder().steps.front();
        if (!superset) {
            superset = full;
        } else if (!(*superset == full)) {
            shared_ladder = false;
        }
        subs.push_back({s.info().annotator_id, s.graph().raster(), s.current_entry().re});
    }
    try {
        const ConsensusResult r = skelforge::integrate(subs, *shape, shared_ladder ? superset : std::nullopt);
        nlohmann::json table = nlohmann::json::array();
        const auto counts = hints(subs);
        for (std::size_t i = 0; i < subs.size(); ++i) {
            const std::string digest = skeleton_digest(subs[i].skeleton);
            table.push_back({{"session_id", ids[i]},
                             {"annotator_id", subs[i].annotator_id},
                             {"digest", digest},
                             {"hints", counts.at(digest)},
                             {"error", subs[i].re}});
        }
        return {200,
                {{"shape_id", shape_id},
                 {"rationale", r.rationale},
                 {"rule", to_string(r.rule)},
                 {"votes", r.votes},
                 {"digest", skeleton_digest(r.skeleton)},
                 {"re", reconstruction_error(r.skeleton, *shape)},
                 {"ss", simplicity(r.skeleton)},
                 {"skeleton", points_to_json(r.skeleton.points)},
                 {"submissions", table}}};
    } catch (const Error& e) {
        return failure(e);
    }
}

Response AnnotationService::list_shapes() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, mask] : shapes_) {
        arr.push_back({{"id", id}, {"width", mask.width()}, {"height", mask.height()}, {"label", class_label(id)}});
    }
    return {200, {{"shapes", arr}}};
}

std::optional<std::vector<std::uint8_t>> AnnotationService::shape_png(const std::string& shape_id) const {
    const auto it = shapes_.find(shape_id);
    if (it == shapes_.end()) return std::nullopt;
    return encode_png(to_gray(it->second));
}

Response AnnotationService::handle(const std::string& method, const std::string& path, const std::string& raw) {
    nlohmann::json body = nlohmann::json::object();
    if (!raw.empty()) {
        body = nlohmann::json::parse(raw, nullptr, false);
        if (body.is_discarded() || !body.is_object()) return {400, {{"error", "BadRequest"}, {"message", "body must be a JSON object"}}};
    }
    static const std::regex session_re("^/sessions/([A-Za-z0-9_-]+)(?:/([a-z]+))?$");
    std::smatch m;
    if (method == "POST" && path == "/sessions") return create_session(body);
    if (method == "POST" && path == "/integrate") return integrate(body);
    if (method == "GET" && path == "/shapes") return list_shapes();
    if (std::regex_match(path, m, session_re)) {
        const std::string id = m[1];
        const std::string action = m[2];
        if (method == "GET" && action.empty()) return get_session(id);
        if (method == "GET" && action == "history") return history(id);
        if (method == "POST") {
            if (action == "step") return step(id, body);
            if (action == "prune") return prune(id, body);
            if (action == "undo") return undo(id, body);
            if (action == "redo") return redo(id, body);
            if (action == "restore") return restore(id, body);
            if (action == "export") return export_gt(id, body);
        }
    }
    return failure(ErrorCode::NotFound, method + " " + path);
}

void mount(httplib::Server& server, AnnotationService& service) {
    const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        const Response r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Post(R"(/sessions)", forward);
    server.Post(R"(/integrate)", forward);
    server.Get(R"(/shapes)", forward);
    server.Get(R"(/shapes/([A-Za-z0-9_.-]+)\.png)", [&service](const httplib::Request& req, httplib::Response& res) {
        const auto png = service.shape_png(req.matches[1]);
        if (!png) {
            res.status = 404;
            res.set_content(R"({"error":"NotFound"})", "application/json");
            return;
        }
        res.set_content(std::string(png->begin(), png->end()), "image/png");
    });
    server.Get(R"(/sessions/[A-Za-z0-9_-]+(/history)?)", forward);
    server.Post(R"(/sessions/[A-Za-z0-9_-]+/[a-z]+)", forward);
}

int serve(AnnotationService& service, const std::string& host, int port) {
    httplib::Server server;
    mount(server, service);
    spdlog::info("listening on {}:{}", host, port);
    return server.listen(host, port) ? 0 : 1;
}

}  // namespace skelforge

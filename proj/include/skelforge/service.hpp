#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "skelforge/session.hpp"

namespace httplib {
class Server;
}

namespace skelforge {

struct ServiceConfig {
    std::filesystem::path dataset_root;
    std::filesystem::path session_root;
    std::filesystem::path export_root;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// Transport-free core of the annotation service. Every method returns the
/// HTTP status and JSON body that the server would send.
class AnnotationService {
public:
    explicit AnnotationService(ServiceConfig config);

    Response create_session(const nlohmann::json& body);
    Response get_session(const std::string& id);
    Response history(const std::string& id);
    Response step(const std::string& id, const nlohmann::json& body);
    Response prune(const std::string& id, const nlohmann::json& body);
    Response undo(const std::string& id, const nlohmann::json& body);
    Response redo(const std::string& id, const nlohmann::json& body);
    Response restore(const std::string& id, const nlohmann::json& body);
    Response export_gt(const std::string& id, const nlohmann::json& body);
    Response integrate(const nlohmann::json& body);
    Response list_shapes() const;
    std::optional<std::vector<std::uint8_t>> shape_png(const std::string& shape_id) const;

    /// Route a request by method and path (used by the HTTP layer and tests).
    Response handle(const std::string& method, const std::string& path, const std::string& body);

    const ServiceConfig& config() const noexcept { return config_; }

private:
    struct Slot {
        std::mutex mutex;
        std::unique_ptr<AnnotationSession> session;
    };

    std::shared_ptr<Slot> find(const std::string& id) const;
    Response mutate(const std::string& id, const nlohmann::json& body, const SessionEvent& event);
    nlohmann::json state_json(const AnnotationSession& session) const;
    std::string new_session_id();

    ServiceConfig config_;
    std::map<std::string, BinaryMask> shapes_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::mutex id_mutex_;
    std::uint64_t id_counter_ = 0;
};

nlohmann::json graph_json(const SkeletonGraph& graph);

/// Register all routes on `server`.
void mount(httplib::Server& server, AnnotationService& service);

/// Blocking; returns nonzero if the port cannot be bound.
int serve(AnnotationService& service, const std::string& host, int port);

}  // namespace skelforge

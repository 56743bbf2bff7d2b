#include "doctest.h"

#include <thread>

#include "httplib.h"

#include "fixtures.hpp"
#include "skelforge/image_io.hpp"
#include "skelforge/service.hpp"
#include "skelforge/storage.hpp"
#include "tmpdir.hpp"

using namespace skelforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct World {
    TempDir tmp;
    ServiceConfig config;
    World() {
        config.dataset_root = tmp.path / "shapes";
        config.session_root = tmp.path / "sessions";
        config.export_root = tmp.path / "exports";
        fs::create_directories(config.dataset_root);
        write_mask(config.dataset_root / "ybone-1.png", fixtures::y_shape());
        std::mt19937 rng(4);
        write_mask(config.dataset_root / "blob-1.png", fixtures::random_blob(rng, 64));
    }
};

Response call(AnnotationService& svc, const std::string& method, const std::string& path, const json& body = json::object()) {
    return svc.handle(method, path, body.dump());
}

std::string first_leaf(const json& state) {
    for (const auto& b : state["graph"]["branches"]) {
        if (b["leaf"].get<bool>()) return b["id"];
    }
    return {};
}

std::string open(AnnotationService& svc, const std::string& shape, const std::string& who = "ann") {
    const Response r = call(svc, "POST", "/sessions", {{"shape_id", shape}, {"annotator_id", who}});
    REQUIRE(r.status == 201);
    return r.body["session_id"];
}

}  // namespace

TEST_CASE("shape listing and session creation") {
    World w;
    AnnotationService svc(w.config);
    const Response list = call(svc, "GET", "/shapes");
    REQUIRE(list.status == 200);
    REQUIRE(list.body["shapes"].size() == 2);
    CHECK(list.body["shapes"][1]["id"] == "ybone-1");
    CHECK(list.body["shapes"][1]["label"] == "ybone");
    CHECK(svc.shape_png("ybone-1").has_value());
    CHECK_FALSE(svc.shape_png("nope").has_value());

    const Response r = call(svc, "POST", "/sessions", {{"shape_id", "ybone-1"}});
    REQUIRE(r.status == 201);
    CHECK(r.body["revision"] == 0);
    CHECK(r.body["step"] == 0);
    CHECK(r.body["graph"]["endpoints"].size() == 3);
    CHECK(r.body["ladder"]["steps"].get<int>() == r.body["step_count"].get<int>());
    CHECK(r.body["can_undo"] == false);
    CHECK(call(svc, "GET", "/sessions/" + r.body["session_id"].get<std::string>()).body == json(
              [&] { json j = r.body; j.erase("ladder"); return j; }()));
}

TEST_CASE("error statuses") {
    World w;
    AnnotationService svc(w.config);
    CHECK(call(svc, "POST", "/sessions", {{"shape_id", "missing"}}).status == 404);
    CHECK(call(svc, "POST", "/sessions", {{"shape_id", "ybone-1"}, {"k_min", 2}}).status == 422);
    CHECK(call(svc, "POST", "/sessions", json::object()).status == 422);
    CHECK(svc.handle("POST", "/sessions", "{not json").status == 400);
    CHECK(svc.handle("POST", "/sessions", "[1,2]").status == 400);
    CHECK(call(svc, "GET", "/sessions/none").status == 404);
    CHECK(call(svc, "GET", "/nowhere").status == 404);
    const std::string id = open(svc, "ybone-1");
    const std::string base = "/sessions/" + id;
    CHECK(call(svc, "POST", base + "/undo", {{"revision", 0}}).status == 422);
    CHECK(call(svc, "POST", base + "/undo", json::object()).status == 422);
    CHECK(call(svc, "POST", base + "/step", {{"revision", 0}, {"direction", 1}}).status == 422);
    CHECK(call(svc, "POST", base + "/prune", {{"revision", 0}, {"branch_ids", {"zz"}}}).status == 422);
    CHECK(call(svc, "POST", base + "/prune", {{"revision", 0}, {"branch_ids", {"00000000000000ff"}}}).status == 422);
    CHECK(call(svc, "POST", base + "/step", {{"revision", 0}, {"direction", -1}}).status == 200);
    // stale client
    const Response stale = call(svc, "POST", base + "/step", {{"revision", 0}, {"direction", -1}});
    CHECK(stale.status == 409);
    CHECK(stale.body["error"] == "StaleRevision");
    CHECK(call(svc, "POST", base + "/export", {{"revision", 0}}).status == 409);
    CHECK(call(svc, "POST", base + "/restore", {{"revision", 1}, {"index", 99}}).status == 422);
    // a failed mutation leaves the revision alone
    CHECK(call(svc, "GET", base).body["revision"] == 1);
}

TEST_CASE("prune, undo, redo and export through handle") {
    World w;
    AnnotationService svc(w.config);
    const std::string id = open(svc, "ybone-1");
    const std::string base = "/sessions/" + id;
    const json start = call(svc, "GET", base).body;
    const Response pruned = call(svc, "POST", base + "/prune", {{"revision", 0}, {"branch_ids", {first_leaf(start)}}});
    REQUIRE(pruned.status == 200);
    CHECK(pruned.body["graph"]["endpoints"].size() == 2);
    CHECK(pruned.body["re"].get<double>() > start["re"].get<double>());
    CHECK(pruned.body["pruned"] == json::array({first_leaf(start)}));
    const Response undone = call(svc, "POST", base + "/undo", {{"revision", 1}});
    REQUIRE(undone.status == 200);
    CHECK(undone.body["graph"]["points"] == start["graph"]["points"]);
    CHECK(undone.body["can_redo"] == true);
    const Response redone = call(svc, "POST", base + "/redo", {{"revision", 2}});
    CHECK(redone.body["graph"]["points"] == pruned.body["graph"]["points"]);
    const Response hist = call(svc, "GET", base + "/history");
    REQUIRE(hist.status == 200);
    CHECK(hist.body["entries"].size() == 2);
    const Response restored = call(svc, "POST", base + "/restore", {{"revision", 3}, {"index", 0}});
    CHECK(restored.body["graph"]["points"] == start["graph"]["points"]);
    CHECK(restored.body["can_redo"] == false);

    const Response ex = call(svc, "POST", base + "/export", {{"revision", 4}});
    REQUIRE(ex.status == 200);
    const GTRecord rec = import_gt(fs::path(ex.body["manifest"].get<std::string>()).parent_path());
    CHECK(points_to_json(rec.skeleton.points()) == start["graph"]["points"]);
    CHECK(rec.provenance.annotator_ids == std::vector<std::string>{"ann"});
}

TEST_CASE("integrate three sessions") {
    World w;
    AnnotationService svc(w.config);
    std::vector<std::string> ids;
    for (const char* who : {"a", "b", "c"}) ids.push_back(open(svc, "ybone-1", who));
    // c prunes an arm, a and b keep the full axis
    const json state = call(svc, "GET", "/sessions/" + ids[2]).body;
    REQUIRE(call(svc, "POST", "/sessions/" + ids[2] + "/prune", {{"revision", 0}, {"branch_ids", {first_leaf(state)}}}).status == 200);
    const Response r = call(svc, "POST", "/integrate", {{"shape_id", "ybone-1"}, {"session_ids", ids}});
    REQUIRE(r.status == 200);
    CHECK(r.body["rationale"] == "max_votes(2)");
    CHECK(r.body["votes"] == 2);
    CHECK(r.body["skeleton"] == state["graph"]["points"]);
    CHECK(r.body["submissions"].size() == 3);
    CHECK(call(svc, "POST", "/integrate", {{"shape_id", "ybone-1"}, {"session_ids", {"nope"}}}).status == 404);
    const std::string other = open(svc, "blob-1");
    CHECK(call(svc, "POST", "/integrate", {{"shape_id", "ybone-1"}, {"session_ids", {ids[0], other}}}).status == 409);
}

TEST_CASE("sessions survive a restart") {
    World w;
    std::string id;
    json before;
    {
        AnnotationService svc(w.config);
        id = open(svc, "ybone-1");
        const json s = call(svc, "GET", "/sessions/" + id).body;
        call(svc, "POST", "/sessions/" + id + "/prune", {{"revision", 0}, {"branch_ids", {first_leaf(s)}}});
        call(svc, "POST", "/sessions/" + id + "/step", {{"revision", 1}, {"direction", -1}});
        call(svc, "POST", "/sessions/" + id + "/undo", {{"revision", 2}});
        before = call(svc, "GET", "/sessions/" + id).body;
    }
    AnnotationService again(w.config);
    CHECK(call(again, "GET", "/sessions/" + id).body == before);
    CHECK(call(again, "GET", "/sessions/" + id + "/history").status == 200);
}

TEST_CASE("HTTP loopback") {
    World w;
    AnnotationService svc(w.config);
    httplib::Server server;
    mount(server, svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/shapes");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Post("/sessions", json{{"shape_id", "ybone-1"}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    const json created = json::parse(res->body);
    const std::string base = "/sessions/" + created["session_id"].get<std::string>();
    res = client.Post(base + "/prune", json{{"revision", 0}, {"branch_ids", {first_leaf(created)}}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["graph"]["endpoints"].size() == 2);
    res = client.Post(base + "/undo", json{{"revision", 0}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);
    res = client.Post(base + "/undo", "garbage", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = client.Get("/shapes/ybone-1.png");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/png");
    const auto bytes = std::vector<std::uint8_t>(res->body.begin(), res->body.end());
    CHECK(binarize(decode_png(bytes)) == fixtures::y_shape());
    res = client.Get("/shapes/zzz.png");
    REQUIRE(res);
    CHECK(res->status == 404);
    res = client.Get("/sessions/nope");
    REQUIRE(res);
    CHECK(res->status == 404);

    server.stop();
    runner.join();
}

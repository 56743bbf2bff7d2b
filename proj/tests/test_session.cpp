#include "doctest.h"

#include "fixtures.hpp"
#include "skelforge/error.hpp"
#include "skelforge/metrics.hpp"
#include "skelforge/session.hpp"
#include "tmpdir.hpp"

using namespace skelforge;
namespace fs = std::filesystem;

namespace {

SessionInfo info_for(const std::string& shape) {
    SessionInfo info;
    info.session_id = "s1";
    info.shape_id = shape;
    info.annotator_id = "ann";
    info.k_min = 4;
    info.k_max = 16;
    return info;
}

// Independent interpreter: every state is stored eagerly as a skeleton; undo,
// redo and restore only move between stored states.
struct EagerOracle {
    struct State {
        SkeletonGraph graph;
        std::size_t step = 0;
        long parent = -1;
    };
    const CandidateLadder* ladder = nullptr;
    std::vector<State> states;
    std::size_t at = 0;
    std::vector<std::size_t> redo;

    explicit EagerOracle(const CandidateLadder& l) : ladder(&l) { states.push_back({decompose(l.steps[0]), 0, -1}); }

    bool apply(const SessionEvent& e) {
        const State cur = states[at];
        switch (e.kind) {
            case EventKind::Step: {
                const long target = static_cast<long>(cur.step) - e.direction;
                if (target < 0 || target >= static_cast<long>(ladder->steps.size())) return false;
                states.push_back({decompose(ladder->steps[static_cast<std::size_t>(target)]), static_cast<std::size_t>(target),
                                  static_cast<long>(at)});
                at = states.size() - 1;
                redo.clear();
                return true;
            }
            case EventKind::Prune:
                try {
                    SkeletonGraph next = prune_branch(cur.graph, {e.branch_ids.begin(), e.branch_ids.end()});
                    states.push_back({std::move(next), cur.step, static_cast<long>(at)});
                } catch (const Error&) {
                    return false;
                }
                at = states.size() - 1;
                redo.clear();
                return true;
            case EventKind::Undo:
                if (cur.parent < 0) return false;
                redo.push_back(at);
                at = static_cast<std::size_t>(cur.parent);
                return true;
            case EventKind::Redo:
                if (redo.empty()) return false;
                at = redo.back();
                redo.pop_back();
                return true;
            case EventKind::Restore:
                if (e.target >= states.size()) return false;
                at = e.target;
                redo.clear();
                return true;
        }
        return false;
    }
};

SessionEvent random_event(std::mt19937& rng, const AnnotationSession& s) {
    SessionEvent e;
    switch (rng() % 6) {
        case 0:
        case 1: {
            e.kind = EventKind::Prune;
            const auto& branches = s.graph().branches();
            if (!branches.empty()) e.branch_ids.push_back(branches[rng() % branches.size()].id);
            if (rng() % 4 == 0) e.branch_ids.push_back(rng());
            if (e.branch_ids.empty()) e.branch_ids.push_back(1);
            break;
        }
        case 2:
            e.kind = EventKind::Step;
            e.direction = rng() % 2 ? 1 : -1;
            break;
        case 3: e.kind = EventKind::Undo; break;
        case 4: e.kind = EventKind::Redo; break;
        default:
            e.kind = EventKind::Restore;
            e.target = rng() % (s.history().size() + 1);
    }
    return e;
}

}  // namespace

TEST_CASE("fuzzed event logs match the eager interpreter, and replay after load") {
    std::mt19937 rng(8);
    TempDir tmp;
    for (int trial = 0; trial < 12; ++trial) {
        const BinaryMask shape = fixtures::random_blob(rng, 64);
        AnnotationSession s = create_session(info_for("blob"), shape);
        EagerOracle oracle(s.ladder());
        for (int i = 0; i < 40; ++i) {
            const SessionEvent e = random_event(rng, s);
            const std::size_t rev = s.revision();
            bool ok = true;
            try {
                s.apply(e);
            } catch (const Error&) {
                ok = false;
            }
            REQUIRE(ok == oracle.apply(e));
            CHECK(s.revision() == rev + (ok ? 1 : 0));
            const auto& want = oracle.states[oracle.at];
            REQUIRE(s.graph().raster() == want.graph.raster());
            CHECK(s.current_entry().step == want.step);
            CHECK(s.current_entry().re == doctest::Approx(reconstruction_error(want.graph.raster(), s.shape())).epsilon(1e-12));
            CHECK(s.current_entry().ss == doctest::Approx(simplicity(want.graph.raster())).epsilon(1e-12));
        }
        const fs::path dir = tmp.path / std::to_string(trial);
        save_session(s, dir);
        const AnnotationSession back = load_session(dir);
        CHECK(back.revision() == s.revision());
        CHECK(back.cursor() == s.cursor());
        CHECK(back.graph().raster() == s.graph().raster());
        REQUIRE(back.history().size() == s.history().size());
        for (std::size_t i = 0; i < s.history().size(); ++i) {
            CHECK(back.history()[i].re == s.history()[i].re);
            CHECK(back.history()[i].ss == s.history()[i].ss);
            CHECK(back.history()[i].step == s.history()[i].step);
        }
        CHECK(back.redo_stack() == s.redo_stack());
    }
}

TEST_CASE("Y shape: prune an arm, undo back to identical pixels") {
    AnnotationSession s = create_session(info_for("y"), fixtures::y_shape());
    const SkeletonGraph start = s.graph();
    REQUIRE(start.endpoints().size() == 3);
    const double re0 = s.current_entry().re;
    BranchId arm = 0;
    for (const Branch& b : start.branches()) {
        if (start.is_leaf(b)) arm = b.id;
    }
    s.apply({EventKind::Prune, 0, {arm}, 0});
    CHECK(s.graph().endpoints().size() == 2);
    CHECK(s.current_entry().re > re0);
    CHECK(s.pruned_ids() == std::vector<std::string>{format_branch_id(arm)});
    s.apply({EventKind::Undo, 0, {}, 0});
    CHECK(s.graph().raster() == start.raster());
    CHECK(s.revision() == 2);
    s.apply({EventKind::Redo, 0, {}, 0});
    CHECK(s.graph().endpoints().size() == 2);
    // stepping resets prunes
    s.apply({EventKind::Step, -1, {}, 0});
    CHECK(s.pruned_ids().empty());
    CHECK(s.current_entry().step == 1);
}

TEST_CASE("step bounds and alternating steps") {
    AnnotationSession s = create_session(info_for("y"), fixtures::y_shape());
    try {
        s.apply({EventKind::Step, 1, {}, 0});
        FAIL("expected OutOfBounds");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfBounds);
    }
    try {
        s.apply({EventKind::Undo, 0, {}, 0});
        FAIL("expected NothingToUndo");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NothingToUndo);
    }
    CHECK(s.revision() == 0);
    const SkeletonRaster start = s.graph().raster();
    s.apply({EventKind::Step, -1, {}, 0});
    CHECK(s.current_entry().re >= s.history()[0].re - 1e-9);
    s.apply({EventKind::Step, 1, {}, 0});
    CHECK(s.graph().raster() == start);
}

TEST_CASE("load errors") {
    TempDir tmp;
    AnnotationSession s = create_session(info_for("y"), fixtures::y_shape());
    save_session(s, tmp.path / "a");
    CHECK(fs::exists(tmp.path / "a" / "ladder.json"));
    fs::remove(tmp.path / "a" / "ladder.json");
    try {
        load_session(tmp.path / "a");
        FAIL("expected MissingLadder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingLadder);
    }
    try {
        load_session(tmp.path / "none");
        FAIL("expected NotFound");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotFound);
    }
    save_session(s, tmp.path / "b");
    auto bytes = read_bytes(tmp.path / "b" / "session.json");
    auto doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    doc["format_version"] = 42;
    write_file_atomic(tmp.path / "b" / "session.json", doc.dump());
    try {
        load_session(tmp.path / "b");
        FAIL("expected VersionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::VersionMismatch);
    }
}

TEST_CASE("session record carries provenance") {
    AnnotationSession s = create_session(info_for("y"), fixtures::y_shape());
    BranchId arm = 0;
    for (const Branch& b : s.graph().branches()) {
        if (s.graph().is_leaf(b)) arm = b.id;
    }
    s.apply({EventKind::Prune, 0, {arm}, 0});
    const GTRecord r = session_record(s);
    CHECK(r.provenance.source_id == "y");
    CHECK(r.provenance.annotator_ids == std::vector<std::string>{"ann"});
    CHECK(r.provenance.pruned_branch_ids == std::vector<std::string>{format_branch_id(arm)});
    CHECK(r.provenance.k_values == std::vector<std::size_t>{s.ladder().dce_k[0]});
    CHECK_NOTHROW(validate(r));
}

TEST_CASE("event JSON round trip") {
    const SessionEvent e{EventKind::Prune, 0, {0xabcdef, 12}, 0};
    const SessionEvent back = event_from_json(event_to_json(e));
    CHECK(back.kind == e.kind);
    CHECK(back.branch_ids == e.branch_ids);
    CHECK_THROWS_AS(event_from_json({{"type", "bogus"}}), Error);
}

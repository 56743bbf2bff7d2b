#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "skelforge/skeleton_graph.hpp"
#include "skelforge/skeletonizer.hpp"
#include "skelforge/storage.hpp"

namespace skelforge {

struct SessionInfo {
    std::string session_id;
    std::string shape_id;
    std::string annotator_id;
    std::size_t k_min = 4;
    std::size_t k_max = 30;
    bool fill_holes = true;
};

enum class EventKind { Step, Prune, Undo, Redo, Restore };

struct SessionEvent {
    EventKind kind = EventKind::Step;
    int direction = 0;                   // Step: +1 more complex, -1 simpler
    std::vector<BranchId> branch_ids;    // Prune
    std::size_t target = 0;              // Restore: history index

    friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

/// One node of the edit tree. Entries are only ever appended.
struct HistoryEntry {
    std::size_t index = 0;
    std::optional<std::size_t> parent;
    EventKind cause = EventKind::Step;  // Step for the initial entry
    std::size_t step = 0;
    std::vector<std::vector<BranchId>> prunes;  // applied in order on top of `step`
    double re = 1.0;
    double ss = 1.0;
    std::size_t point_count = 0;
};

/// Event-sourced pruning state over a candidate ladder. Stepping the ladder
/// starts from that step afresh; pruning edits the current skeleton. Undo
/// walks to the parent entry, redo walks back, restore jumps anywhere.
class AnnotationSession {
public:
    AnnotationSession(SessionInfo info, CandidateLadder ladder, BinaryMask shape);

    /// Throws Error on invalid events; state is unchanged in that case.
    void apply(const SessionEvent& event);

    const SessionInfo& info() const noexcept { return info_; }
    const CandidateLadder& ladder() const noexcept { return ladder_; }
    const BinaryMask& shape() const noexcept { return shape_; }
    const std::vector<SessionEvent>& events() const noexcept { return events_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }
    const HistoryEntry& current_entry() const { return history_[cursor_]; }
    std::size_t cursor() const noexcept { return cursor_; }
    std::size_t revision() const noexcept { return events_.size(); }
    const SkeletonGraph& graph() const { return graphs_[cursor_]; }
    const std::vector<std::size_t>& redo_stack() const noexcept { return redo_; }

    /// Branch ids pruned since the current ladder step, in order.
    std::vector<std::string> pruned_ids() const;

private:
    void push_entry(EventKind cause, std::size_t step, std::vector<std::vector<BranchId>> prunes, SkeletonGraph graph);

    SessionInfo info_;
    CandidateLadder ladder_;
    BinaryMask shape_;
    std::vector<SessionEvent> events_;
    std::vector<HistoryEntry> history_;
    std::vector<SkeletonGraph> graphs_;
    std::vector<std::size_t> redo_;
    std::size_t cursor_ = 0;
};

/// Build a fresh session: ladder from the (optionally hole-filled) shape.
AnnotationSession create_session(SessionInfo info, const BinaryMask& shape);

nlohmann::json event_to_json(const SessionEvent& event);
SessionEvent event_from_json(const nlohmann::json& doc);
std::string to_string(EventKind kind);

/// Layout: dir/session.json (event log), dir/ladder.json, dir/shape.png.
void save_session(const AnnotationSession& session, const std::filesystem::path& dir);
AnnotationSession load_session(const std::filesystem::path& dir);

/// GT record of the session's current skeleton.
GTRecord session_record(const AnnotationSession& session);

}  // namespace skelforge

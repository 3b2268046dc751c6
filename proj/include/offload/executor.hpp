#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "offload/types.hpp"

namespace offload {

enum class LifecycleState { Pending, Starting, Running, Completed, Removed };

const char* to_string(LifecycleState state) noexcept;

struct TaskLifecycle {
    LifecycleState state = LifecycleState::Pending;
    // Set iff state is Starting or Running.
    std::optional<EdgeId> placed_on;
    // Node the task occupied when it completed; the target of its unload.
    std::optional<EdgeId> completed_on;
    std::optional<std::int64_t> started_at;
    std::optional<std::int64_t> completed_at;
};

using Placement = std::pair<TaskId, EdgeId>;

struct ActionSet {
    std::vector<Placement> starts;
    std::vector<Placement> stops;
    std::vector<Placement> keeps;

    bool empty() const noexcept { return starts.empty() && stops.empty(); }
};

// keeps: unchanged placements; starts: new or moved tasks; stops: old
// placements of moved tasks plus tasks missing from `next`.
ActionSet diff_plan(const std::map<TaskId, EdgeId>& previous, const AssignmentPlan& next);

enum class ActionKind { Start, Stop };

struct Action {
    ActionKind kind = ActionKind::Start;
    TaskId task;
    EdgeId edge;
    // A start that re-initializes a task stopped in the same action set.
    bool handoff = false;
};

struct Receipt {
    Action action;
    bool accepted = false;
    std::int64_t agent_ts = 0;
    std::string note;
};

// Delivers actions to the agent on the target node.
class AgentTransport {
public:
    virtual ~AgentTransport() = default;
    virtual Receipt send(const Action& action, std::int64_t now) = 0;
};

struct ExecutorOptions {
    // When false every planned task is stopped and restarted each round.
    bool diff_enabled = true;
    bool unload_completed = true;
    bool allow_preinit_handoff = false;
};

struct ActionLogEntry {
    std::int64_t round = 0;
    std::int64_t time = 0;
    std::string action;
    TaskId task;
    EdgeId edge;
    std::string result;

    friend bool operator==(const ActionLogEntry&, const ActionLogEntry&) = default;
};

nlohmann::ordered_json to_json(const ActionLogEntry& entry);
ActionLogEntry action_log_entry_from_json(const nlohmann::json& j);

struct UnloadResult {
    ActionSet delta;
    std::optional<std::string> warning;
};

// Owns every task lifecycle. Single writer: callers must serialize access.
class Executor {
public:
    explicit Executor(ExecutorOptions options = {});

    void register_task(const TaskId& task);
    const TaskLifecycle& lifecycle(const TaskId& task) const;
    const std::map<TaskId, TaskLifecycle>& lifecycles() const noexcept { return tasks_; }
    const ExecutorOptions& options() const noexcept { return options_; }

    // Tasks in Starting or Running with their node.
    std::map<TaskId, EdgeId> placements() const;

    // diff_plan against current placements, adjusted for the executor options.
    // Tasks in `fixed` are never force-restarted when the diff is disabled.
    ActionSet reconcile(const AssignmentPlan& next, const std::set<TaskId>& fixed = {}) const;

    // Stops go out before starts. A rejected start leaves the task Pending.
    std::vector<Receipt> apply_actions(const ActionSet& actions, AgentTransport& transport, std::int64_t now,
                                       std::int64_t round);

    // Task status check: a Starting task observed on its node is Running.
    void observe_running(const TaskId& task, const EdgeId& node);

    void mark_completed(const TaskId& task, std::int64_t now);

    // Stop for a completed task's placement. Throws NotCompleted before
    // completion; a second call is a no-op with a warning.
    UnloadResult unload_completed(const TaskId& task);

    const std::vector<ActionLogEntry>& action_log() const noexcept { return log_; }
    std::int64_t handoffs() const noexcept { return handoffs_; }

private:
    TaskLifecycle& get(const TaskId& task);
    void log(std::int64_t round, std::int64_t now, const std::string& action, const Placement& p,
             const std::string& result);

    ExecutorOptions options_;
    std::map<TaskId, TaskLifecycle> tasks_;
    std::vector<ActionLogEntry> log_;
    std::int64_t handoffs_ = 0;
};

}  // namespace offload

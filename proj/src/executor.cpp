#include "offload/executor.hpp"

#include <algorithm>
#include <set>

namespace offload {

const char* to_string(LifecycleState state) noexcept {
    switch (state) {
        case LifecycleState::Pending: return "Pending";
        case LifecycleState::Starting: return "Starting";
        case LifecycleState::Running: return "Running";
        case LifecycleState::Completed: return "Completed";
        case LifecycleState::Removed: return "Removed";
    }
    return "Unknown";
}

ActionSet diff_plan(const std::map<TaskId, EdgeId>& previous, const AssignmentPlan& next) {
    ActionSet out;
    std::set<TaskId> planned;
    for (const auto& [task, edge] : next.assignments) {
        if (!planned.insert(task).second) continue;
        auto it = previous.find(task);
        if (it == previous.end()) {
            out.starts.emplace_back(task, edge);
        } else if (it->second == edge) {
            out.keeps.emplace_back(task, edge);
        } else {
            out.stops.emplace_back(task, it->second);
            out.starts.emplace_back(task, edge);
        }
    }
    for (const auto& [task, edge] : previous)
        if (!planned.count(task)) out.stops.emplace_back(task, edge);
    return out;
}

nlohmann::ordered_json to_json(const ActionLogEntry& e) {
    nlohmann::ordered_json j;
    j["round"] = e.round;
    j["time"] = e.time;
    j["action"] = e.action;
    j["task"] = e.task.str();
    j["edge"] = e.edge.str();
    j["result"] = e.result;
    return j;
}

ActionLogEntry action_log_entry_from_json(const nlohmann::json& j) {
    try {
        return {j.at("round").get<std::int64_t>(),       j.at("time").get<std::int64_t>(),
                j.at("action").get<std::string>(),       TaskId(j.at("task").get<std::string>()),
                EdgeId(j.at("edge").get<std::string>()), j.at("result").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProtocolError, std::string("bad action log entry: ") + e.what());
    }
}

Executor::Executor(ExecutorOptions options) : options_(options) {}

void Executor::register_task(const TaskId& task) { tasks_.try_emplace(task); }

const TaskLifecycle& Executor::lifecycle(const TaskId& task) const {
    auto it = tasks_.find(task);
    if (it == tasks_.end()) throw Error(ErrorCode::UnknownReference, "task " + task.str());
    return it->second;
}

TaskLifecycle& Executor::get(const TaskId& task) {
    auto it = tasks_.find(task);
    if (it == tasks_.end()) throw Error(ErrorCode::UnknownReference, "task " + task.str());
    return it->second;
}

std::map<TaskId, EdgeId> Executor::placements() const {
    std::map<TaskId, EdgeId> out;
    for (const auto& [id, lc] : tasks_)
        if (lc.placed_on) out.emplace(id, *lc.placed_on);
    return out;
}

ActionSet Executor::reconcile(const AssignmentPlan& next, const std::set<TaskId>& fixed) const {
    ActionSet diff = diff_plan(placements(), next);

    // A task still initializing is not moved unless explicitly allowed.
    if (!options_.allow_preinit_handoff) {
        std::set<TaskId> pinned_in_place;
        for (const auto& [task, edge] : diff.starts) {
            const auto& lc = lifecycle(task);
            if (lc.state == LifecycleState::Starting) pinned_in_place.insert(task);
        }
        if (!pinned_in_place.empty()) {
            std::vector<Placement> starts;
            for (auto& p : diff.starts)
                if (!pinned_in_place.count(p.first)) starts.push_back(p);
            std::vector<Placement> stops;
            for (auto& p : diff.stops) {
                if (pinned_in_place.count(p.first) && next.as_map().count(p.first))
                    diff.keeps.push_back(p);
                else
                    stops.push_back(p);
            }
            diff.starts = std::move(starts);
            diff.stops = std::move(stops);
        }
    }

    if (!options_.diff_enabled) {
        std::vector<Placement> keeps;
        for (const auto& p : diff.keeps) {
            const auto& lc = lifecycle(p.first);
            bool movable = !fixed.count(p.first) &&
                           (lc.state == LifecycleState::Running ||
                            (lc.state == LifecycleState::Starting && options_.allow_preinit_handoff));
            if (movable) {
                diff.stops.push_back(p);
                diff.starts.push_back(p);
            } else {
                keeps.push_back(p);
            }
        }
        diff.keeps = std::move(keeps);
    }
    return diff;
}

void Executor::log(std::int64_t round, std::int64_t now, const std::string& action, const Placement& p,
                   const std::string& result) {
    log_.push_back({round, now, action, p.first, p.second, result});
}

std::vector<Receipt> Executor::apply_actions(const ActionSet& actions, AgentTransport& transport, std::int64_t now,
                                             std::int64_t round) {
    std::vector<Receipt> receipts;
    std::set<TaskId> stopped;
    std::set<TaskId> blocked;
    std::set<TaskId> restarting;
    for (const auto& p : actions.starts) restarting.insert(p.first);

    for (const auto& p : actions.stops) {
        Action action{ActionKind::Stop, p.first, p.second, false};
        Receipt r = transport.send(action, now);
        log(round, now, "stop", p, r.accepted ? "accepted" : "rejected: " + r.note);
        auto& lc = get(p.first);
        if (r.accepted) {
            stopped.insert(p.first);
            if (lc.placed_on == p.second && !restarting.count(p.first)) {
                lc.state = LifecycleState::Pending;
                lc.placed_on.reset();
            }
        } else {
            blocked.insert(p.first);
        }
        receipts.push_back(std::move(r));
    }

    for (const auto& p : actions.starts) {
        if (blocked.count(p.first)) {
            log(round, now, "start", p, "skipped: stop rejected");
            continue;
        }
        auto& lc = get(p.first);
        if (lc.state == LifecycleState::Completed || lc.state == LifecycleState::Removed) {
            log(round, now, "start", p, "skipped: task finished");
            continue;
        }
        bool handoff = stopped.count(p.first) != 0;
        Action action{ActionKind::Start, p.first, p.second, handoff};
        Receipt r = transport.send(action, now);
        log(round, now, handoff ? "handoff" : "start", p, r.accepted ? "accepted" : "rejected: " + r.note);
        if (r.accepted) {
            lc.state = LifecycleState::Starting;
            lc.placed_on = p.second;
            lc.started_at = now;
            if (handoff) ++handoffs_;
        } else {
            lc.state = LifecycleState::Pending;
            lc.placed_on.reset();
        }
        receipts.push_back(std::move(r));
    }
    return receipts;
}

void Executor::observe_running(const TaskId& task, const EdgeId& node) {
    auto it = tasks_.find(task);
    if (it == tasks_.end()) return;
    auto& lc = it->second;
    if (lc.state == LifecycleState::Starting && lc.placed_on == node) lc.state = LifecycleState::Running;
}

void Executor::mark_completed(const TaskId& task, std::int64_t now) {
    auto& lc = get(task);
    if (lc.state == LifecycleState::Completed || lc.state == LifecycleState::Removed) return;
    // A task can finish before any status check observed it running.
    if (lc.state != LifecycleState::Running && lc.state != LifecycleState::Starting)
        throw Error(ErrorCode::NotCompleted, task.str() + " completed while " + to_string(lc.state));
    lc.state = LifecycleState::Completed;
    lc.completed_on = lc.placed_on;
    lc.placed_on.reset();
    lc.completed_at = now;
}

UnloadResult Executor::unload_completed(const TaskId& task) {
    auto& lc = get(task);
    UnloadResult out;
    if (lc.state == LifecycleState::Removed) {
        out.warning = "task " + task.str() + " already unloaded";
        return out;
    }
    if (lc.state != LifecycleState::Completed)
        throw Error(ErrorCode::NotCompleted, task.str() + " is " + to_string(lc.state));
    if (lc.completed_on) out.delta.stops.emplace_back(task, *lc.completed_on);
    lc.state = LifecycleState::Removed;
    return out;
}

}  // namespace offload

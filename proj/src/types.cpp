#include "offload/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace offload {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::CyclicGraph: return "CyclicGraph";
        case ErrorCode::UnknownReference: return "UnknownReference";
        case ErrorCode::DemandOutOfRange: return "DemandOutOfRange";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::ZeroCapacity: return "ZeroCapacity";
        case ErrorCode::MissingLink: return "MissingLink";
        case ErrorCode::NoEdges: return "NoEdges";
        case ErrorCode::NotCompleted: return "NotCompleted";
        case ErrorCode::UnknownSource: return "UnknownSource";
        case ErrorCode::StaleMessage: return "StaleMessage";
        case ErrorCode::NoFreshEdges: return "NoFreshEdges";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::AgentUnreachable: return "AgentUnreachable";
        case ErrorCode::Deadlock: return "Deadlock";
        case ErrorCode::TimeLimit: return "TimeLimit";
        case ErrorCode::AddressInUse: return "AddressInUse";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

TaskGraph::TaskGraph(std::map<TaskId, TaskSpec> tasks) : tasks_(std::move(tasks)) {
    for (const auto& [id, spec] : tasks_) {
        if (id.empty()) throw Error(ErrorCode::InvalidConfig, "empty task id");
        if (spec.id != id) throw Error(ErrorCode::InvalidConfig, "task key/id mismatch: " + id.str());
        if (!spec.demand.in_range()) throw Error(ErrorCode::DemandOutOfRange, id.str());
        for (const auto& pred : spec.predecessors) {
            if (pred == id) throw Error(ErrorCode::CyclicGraph, id.str());
            if (!tasks_.count(pred))
                throw Error(ErrorCode::UnknownReference, id.str() + " -> " + pred.str());
        }
    }
    if (auto cycle = find_cycle(tasks_)) {
        std::string names;
        for (const auto& t : *cycle) names += (names.empty() ? "" : " -> ") + t.str();
        throw Error(ErrorCode::CyclicGraph, names);
    }
}

const TaskSpec& TaskGraph::at(const TaskId& id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorCode::UnknownReference, "task " + id.str());
    return it->second;
}

int TaskGraph::depth() const {
    std::map<TaskId, int> memo;
    std::function<int(const TaskId&)> visit = [&](const TaskId& id) -> int {
        if (auto it = memo.find(id); it != memo.end()) return it->second;
        int best = 0;
        for (const auto& p : tasks_.at(id).predecessors) best = std::max(best, visit(p));
        return memo[id] = best + 1;
    };
    int result = 0;
    for (const auto& [id, _] : tasks_) result = std::max(result, visit(id));
    return result;
}

TaskGraph TaskGraph::with_demands(const std::map<TaskId, ResourceDemand>& demands) const {
    TaskGraph copy = *this;
    for (auto& [id, spec] : copy.tasks_) {
        if (auto it = demands.find(id); it != demands.end()) spec.demand = it->second;
    }
    return copy;
}

std::optional<std::vector<TaskId>> TaskGraph::find_cycle(const std::map<TaskId, TaskSpec>& tasks) {
    enum class Mark { White, Grey, Black };
    std::map<TaskId, Mark> mark;
    std::vector<TaskId> stack;
    std::optional<std::vector<TaskId>> found;

    std::function<bool(const TaskId&)> dfs = [&](const TaskId& id) -> bool {
        mark[id] = Mark::Grey;
        stack.push_back(id);
        auto it = tasks.find(id);
        if (it != tasks.end()) {
            for (const auto& pred : it->second.predecessors) {
                if (!tasks.count(pred)) continue;
                auto m = mark[pred];
                if (m == Mark::Grey) {
                    auto start = std::find(stack.begin(), stack.end(), pred);
                    found = std::vector<TaskId>(start, stack.end());
                    return true;
                }
                if (m == Mark::White && dfs(pred)) return true;
            }
        }
        stack.pop_back();
        mark[id] = Mark::Black;
        return false;
    };

    for (const auto& [id, _] : tasks) {
        if (mark[id] == Mark::White && dfs(id)) return found;
    }
    return std::nullopt;
}

bool WeightVector::valid() const noexcept {
    auto unit = [](double w) { return w >= 0.0 && w <= 1.0; };
    return unit(cpu) && unit(mem) && unit(net) && unit(task) &&
           std::abs(cpu + mem + net + task - 1.0) <= 1e-9;
}

std::map<TaskId, EdgeId> AssignmentPlan::as_map() const {
    std::map<TaskId, EdgeId> out;
    for (const auto& [task, edge] : assignments) out.emplace(task, edge);
    return out;
}

void check_snapshot(const SystemSnapshot& snapshot) {
    std::map<TaskId, int> seen;
    for (const auto& [id, edge] : snapshot.edges) {
        if (edge.cpu_capacity <= 0 || edge.mem_capacity <= 0)
            throw Error(ErrorCode::ZeroCapacity, id.str());
        if (edge.cpu_used < 0 || edge.mem_used < 0)
            throw Error(ErrorCode::InvalidConfig, "negative usage on " + id.str());
        for (const auto& t : edge.running_tasks) ++seen[t];
    }
    for (const auto& [task, edge] : snapshot.placements) {
        auto it = snapshot.edges.find(edge);
        if (it == snapshot.edges.end())
            throw Error(ErrorCode::UnknownReference, task.str() + " placed on unknown " + edge.str());
        if (!it->second.running_tasks.count(task) || seen[task] != 1)
            throw Error(ErrorCode::InvalidConfig, "placement of " + task.str() + " inconsistent");
    }
}

}  // namespace offload

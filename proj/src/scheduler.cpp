#include "offload/scheduler.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace offload {

std::vector<TaskId> sequence_tasks(const TaskGraph& graph) {
    const auto& tasks = graph.tasks();
    std::map<TaskId, int> indegree;
    std::map<TaskId, std::vector<TaskId>> successors;
    for (const auto& [id, spec] : tasks) {
        indegree[id] += 0;
        for (const auto& p : spec.predecessors) {
            ++indegree[id];
            successors[p].push_back(id);
        }
    }

    using Key = std::tuple<int, TaskId>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
    for (const auto& [id, deg] : indegree)
        if (deg == 0) ready.emplace(tasks.at(id).priority, id);

    std::vector<TaskId> order;
    order.reserve(tasks.size());
    while (!ready.empty()) {
        auto [_, id] = ready.top();
        ready.pop();
        order.push_back(id);
        for (const auto& s : successors[id])
            if (--indegree[s] == 0) ready.emplace(tasks.at(s).priority, s);
    }
    if (order.size() != tasks.size()) throw Error(ErrorCode::CyclicGraph, "task graph contains a cycle");
    return order;
}

bool schedulable(const TaskSpec& task, const SystemSnapshot& snapshot) {
    if (task.pin.kind != TaskPin::Kind::None) return false;
    if (snapshot.completed.count(task.id)) return false;
    return std::all_of(task.predecessors.begin(), task.predecessors.end(),
                       [&](const TaskId& p) { return snapshot.completed.count(p) != 0; });
}

std::map<EdgeId, utility::UtilityBreakdown> evaluate_edges(const TaskSpec& task,
                                                           const std::map<EdgeId, EdgeState>& edges,
                                                           const std::map<TaskId, EdgeId>& placements,
                                                           const WeightVector& weights) {
    std::map<EdgeId, double> raw;
    for (const auto& [id, _] : edges) raw[id] = utility::task_reward(task, id, placements);
    auto rewards = utility::normalize_task_rewards(raw);

    std::map<EdgeId, utility::UtilityBreakdown> out;
    for (const auto& [id, edge] : edges) {
        auto cpu = utility::cpu_utility(edge, task.demand);
        auto mem = utility::mem_utility(edge, task.demand);
        auto net = utility::net_utility(edge, task.owner, task.demand);
        out[id] = utility::total_utility(cpu, mem, net, rewards[id], weights);
    }
    return out;
}

AssignmentPlan schedule(const SystemSnapshot& snapshot, const TaskGraph& graph, const SchedulerConfig& cfg,
                        std::int64_t round) {
    if (snapshot.edges.empty()) throw Error(ErrorCode::NoEdges, "snapshot has no schedulable edges");

    AssignmentPlan plan;
    plan.round = round;

    std::vector<TaskId> candidates;
    for (const auto& id : sequence_tasks(graph))
        if (schedulable(graph.at(id), snapshot)) candidates.push_back(id);

    // Predecessor locations: running placements, then where completed tasks ran.
    std::map<TaskId, EdgeId> located = snapshot.placements;
    for (const auto& [task, edge] : snapshot.completed_on) located.emplace(task, edge);

    // Expected usage starts from the reported usage with the candidates' own
    // running demand taken out, so a task never competes with itself.
    std::map<EdgeId, EdgeState> expected = snapshot.edges;
    for (const auto& id : candidates) {
        auto placed = snapshot.placements.find(id);
        if (placed == snapshot.placements.end()) continue;
        auto it = expected.find(placed->second);
        if (it == expected.end()) continue;
        const auto& spec = graph.at(id);
        auto& edge = it->second;
        edge.cpu_used = std::max(0.0, edge.cpu_used - spec.demand.cpu / edge.speed_factor);
        edge.mem_used = std::max(0.0, edge.mem_used - spec.demand.mem);
        if (auto link = edge.links.find(spec.owner); link != edge.links.end())
            link->second.thp_used = std::max(0.0, link->second.thp_used - spec.demand.thp);
    }

    for (const auto& id : candidates) {
        const auto& spec = graph.at(id);
        std::map<EdgeId, utility::UtilityBreakdown> breakdowns;
        try {
            breakdowns = evaluate_edges(spec, expected, located, cfg.weights);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MissingLink) throw;
            plan.unassigned.emplace_back(id, e.what());
            continue;
        }

        std::map<EdgeId, double> totals;
        bool any_positive = false;
        for (const auto& [edge, b] : breakdowns) {
            totals[edge] = b.total;
            any_positive = any_positive || b.total >= 0.0;
        }
        auto chosen = utility::select_edge(totals);
        if (!any_positive) plan.overcommitted.push_back(id);

        plan.assignments.emplace_back(id, chosen);
        plan.expected_usage[chosen] += spec.demand;

        auto& edge = expected.at(chosen);
        edge.cpu_used += spec.demand.cpu / edge.speed_factor;
        edge.mem_used += spec.demand.mem;
        edge.links.at(spec.owner).thp_used += spec.demand.thp;
    }
    return plan;
}

std::vector<AssignmentRecord> plan_to_messages(const AssignmentPlan& plan, const std::string& variant) {
    std::vector<AssignmentRecord> out;
    out.reserve(plan.assignments.size());
    for (const auto& [task, edge] : plan.assignments) out.push_back({plan.round, task, edge, variant});
    return out;
}

nlohmann::json to_json(const AssignmentRecord& r) {
    return {{"round", r.round}, {"task", r.task.str()}, {"edge", r.edge.str()}, {"variant", r.variant}};
}

AssignmentRecord assignment_record_from_json(const nlohmann::json& j) {
    try {
        return {j.at("round").get<std::int64_t>(), TaskId(j.at("task").get<std::string>()),
                EdgeId(j.at("edge").get<std::string>()), j.at("variant").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProtocolError, std::string("bad assignment record: ") + e.what());
    }
}

}  // namespace offload

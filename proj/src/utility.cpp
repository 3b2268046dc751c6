#include "offload/utility.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace offload::utility {

double headroom(double capacity, double used, double demand) {
    if (!(capacity > 0.0)) throw Error(ErrorCode::ZeroCapacity, "capacity must be positive");
    return (capacity - used - demand) / capacity;
}

UtilityScore cpu_utility(const EdgeState& edge, const ResourceDemand& demand) {
    if (!(edge.cpu_capacity > 0.0)) throw Error(ErrorCode::ZeroCapacity, "cpu capacity of " + edge.id.str());
    return {headroom(edge.cpu_capacity, edge.cpu_used, demand.cpu / edge.speed_factor)};
}

UtilityScore mem_utility(const EdgeState& edge, const ResourceDemand& demand) {
    if (!(edge.mem_capacity > 0.0)) throw Error(ErrorCode::ZeroCapacity, "mem capacity of " + edge.id.str());
    return {headroom(edge.mem_capacity, edge.mem_used, demand.mem)};
}

UtilityScore net_utility(const LinkState& link, const ResourceDemand& demand) {
    return {headroom(link.thp_capacity, link.thp_used, demand.thp)};
}

UtilityScore net_utility(const EdgeState& edge, const RobotId& robot, const ResourceDemand& demand) {
    auto it = edge.links.find(robot);
    if (it == edge.links.end()) throw Error(ErrorCode::MissingLink, edge.id.str() + " has no link to " + robot.str());
    return net_utility(it->second, demand);
}

double task_reward(const TaskSpec& task, const EdgeId& edge, const std::map<TaskId, EdgeId>& placements) {
    int score = 0;
    for (const auto& pred : task.predecessors) {
        auto it = placements.find(pred);
        if (it == placements.end()) continue;
        score += it->second == edge ? 1 : -1;
    }
    return static_cast<double>(std::clamp(score, -1, 1));
}

std::map<EdgeId, double> normalize_task_rewards(const std::map<EdgeId, double>& rewards) {
    std::vector<double> distinct;
    for (const auto& [_, r] : rewards) distinct.push_back(r);
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    const auto n = static_cast<double>(distinct.size());
    std::map<EdgeId, double> out;
    for (const auto& [edge, r] : rewards) {
        if (distinct.size() <= 1) {
            out[edge] = 1.0;
            continue;
        }
        auto pos = std::find(distinct.begin(), distinct.end(), r) - distinct.begin();
        double rank = static_cast<double>(pos) + 1.0;
        out[edge] = (n - rank) / (n - 1.0);
    }
    return out;
}

UtilityBreakdown total_utility(UtilityScore cpu, UtilityScore mem, UtilityScore net, double task,
                               const WeightVector& w) {
    UtilityBreakdown b;
    b.cpu = cpu;
    b.mem = mem;
    b.net = net;
    b.task = task;
    b.total = w.cpu * cpu.value + w.mem * mem.value + w.task * task + w.net * net.value;
    return b;
}

EdgeId select_edge(const std::map<EdgeId, double>& totals) {
    if (totals.empty()) throw Error(ErrorCode::NoEdges, "no candidate edges");
    // std::map iterates in id order, so strict > keeps the smallest id on ties.
    auto best = totals.begin();
    for (auto it = std::next(totals.begin()); it != totals.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

}  // namespace offload::utility

#pragma once

#include <map>

#include "offload/types.hpp"

namespace offload::utility {

// Normalized headroom left after a demand. Values above 1 are impossible for
// non-negative usage and demand; negative values mean over-commitment.
struct UtilityScore {
    double value = 0.0;
    friend auto operator<=>(const UtilityScore&, const UtilityScore&) = default;
};

struct UtilityBreakdown {
    UtilityScore cpu;
    UtilityScore mem;
    UtilityScore net;
    double task = 0.0;
    double total = 0.0;
};

// (capacity - used - demand) / capacity. Throws ZeroCapacity for capacity <= 0.
double headroom(double capacity, double used, double demand);

// The edge's cpu_used / mem_used are taken as already ledger-adjusted.
// CPU demand is scaled by the edge's speed factor.
UtilityScore cpu_utility(const EdgeState& edge, const ResourceDemand& demand);
UtilityScore mem_utility(const EdgeState& edge, const ResourceDemand& demand);
UtilityScore net_utility(const LinkState& link, const ResourceDemand& demand);

// Network utility over the link between `edge` and `robot`; MissingLink if absent.
UtilityScore net_utility(const EdgeState& edge, const RobotId& robot, const ResourceDemand& demand);

// +1 per predecessor placed on `edge`, -1 per predecessor placed elsewhere,
// summed and clamped to [-1, +1]. Zero with no placed predecessors.
double task_reward(const TaskSpec& task, const EdgeId& edge, const std::map<TaskId, EdgeId>& placements);

// Dense-rank normalization to [0,1]: best distinct reward -> 1, worst -> 0.
// A single distinct value maps every edge to 1.
std::map<EdgeId, double> normalize_task_rewards(const std::map<EdgeId, double>& rewards);

// Weighted sum in the order cpu, mem, task, net.
UtilityBreakdown total_utility(UtilityScore cpu, UtilityScore mem, UtilityScore net, double task,
                               const WeightVector& weights);

// Argmax; ties go to the lexicographically smallest id. Throws NoEdges.
EdgeId select_edge(const std::map<EdgeId, double>& totals);

}  // namespace offload::utility

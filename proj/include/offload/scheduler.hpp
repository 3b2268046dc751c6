#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "offload/types.hpp"
#include "offload/utility.hpp"

namespace offload {

struct SchedulerConfig {
    WeightVector weights;
    std::int64_t reschedule_interval_ms = 2000;
    std::string variant_name = "all";
};

// Topological order; ready ties break by (priority, id).
std::vector<TaskId> sequence_tasks(const TaskGraph& graph);

// Tasks a round considers: unpinned, not completed, every predecessor completed.
bool schedulable(const TaskSpec& task, const SystemSnapshot& snapshot);

// Utility of every edge for one task given the per-edge usage the round has
// accumulated so far. Throws MissingLink if any edge lacks the owner's link.
std::map<EdgeId, utility::UtilityBreakdown> evaluate_edges(const TaskSpec& task,
                                                           const std::map<EdgeId, EdgeState>& edges,
                                                           const std::map<TaskId, EdgeId>& placements,
                                                           const WeightVector& weights);

// One scheduling round. The expected-usage baseline of each edge is its
// reported usage minus the demand of schedulable tasks already running there;
// each assignment then adds its demand before the next task is evaluated.
AssignmentPlan schedule(const SystemSnapshot& snapshot, const TaskGraph& graph, const SchedulerConfig& cfg,
                        std::int64_t round = 0);

struct AssignmentRecord {
    std::int64_t round = 0;
    TaskId task;
    EdgeId edge;
    std::string variant;

    friend bool operator==(const AssignmentRecord&, const AssignmentRecord&) = default;
};

std::vector<AssignmentRecord> plan_to_messages(const AssignmentPlan& plan, const std::string& variant);

nlohmann::json to_json(const AssignmentRecord& record);
AssignmentRecord assignment_record_from_json(const nlohmann::json& j);

}  // namespace offload

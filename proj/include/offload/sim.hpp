#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "offload/controller.hpp"
#include "offload/scenario.hpp"

namespace offload::sim {

// Declaration order is the processing rank for events sharing a timestamp.
enum class SimEventKind {
    TaskCompleted,
    TaskProgress,  // initialization finished, the task is making progress
    HandoffDone,
    TelemetryTick,
    RescheduleTick,
    TaskStarted,
    HandoffBegun,
};

const char* to_string(SimEventKind kind) noexcept;

struct SimEvent {
    std::int64_t time = 0;
    SimEventKind kind = SimEventKind::TelemetryTick;
    TaskId task;
    EdgeId node;

    friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

// "<time> <kind> <task|-> <node|->"
std::string format_event(const SimEvent& event);

// One strategy column of a comparison.
struct StrategySpec {
    std::string label;
    StrategyKind kind = StrategyKind::Dynamic;
    std::string variant = "all";
    std::optional<bool> diff_enabled;
    std::optional<bool> unload_completed;

    // local | static | dynamic | dynamic-<variant>
    static StrategySpec parse(const std::string& token);
};

// Progress multiplier of a task demanding `task_demand` on a resource whose
// consumers demand `total_demand` in all. Over-commitment scales every
// consumer's share by capacity / total.
double contention_service_rate(double task_demand, double total_demand, double capacity);

struct Sample {
    std::int64_t time = 0;
    double cpu = 0.0;  // percent of capacity
    double mem = 0.0;
    double thp = 0.0;  // summed link usage, percent points
};

struct NodeSeries {
    EdgeId node;
    bool robot = false;
    std::vector<Sample> samples;
};

struct TaskOutcome {
    TaskId task;
    EdgeId node;
    std::int64_t ready_at = 0;
    std::int64_t first_start = 0;
    std::int64_t completed_at = 0;
    std::int64_t restarts = 0;

    std::int64_t latency_ms() const noexcept { return completed_at - ready_at; }
};

struct SummaryStat {
    double mean = 0.0;
    double stddev = 0.0;
    friend bool operator==(const SummaryStat&, const SummaryStat&) = default;
};

// Population mean and standard deviation; zeros for an empty range.
SummaryStat summarize(const std::vector<double>& values);

struct MetricsReport {
    std::string scenario;
    std::string strategy;
    std::string variant;
    std::uint64_t seed = 0;
    std::int64_t end_time = 0;
    double terminal_fraction = 0.25;

    std::map<EdgeId, NodeSeries> series;
    std::vector<TaskOutcome> tasks;
    std::vector<SimEvent> events;
    std::vector<ActionLogEntry> actions;
    std::vector<TelemetryMessage> trace;
    std::vector<std::string> diagnostics;

    std::int64_t rounds = 0;
    std::int64_t handoffs = 0;
    std::int64_t handoff_penalty_ms = 0;
    std::int64_t overcommit_warnings = 0;

    SummaryStat latency_ms() const;
    // metric: "cpu", "mem" or "thp"
    SummaryStat node_metric(const EdgeId& node, const std::string& metric) const;
    std::vector<EdgeId> edge_ids() const;
    std::vector<EdgeId> robot_ids() const;
    // Mean CPU percent over every edge sample in the last terminal_fraction of the run.
    double terminal_edge_cpu() const;
};

// Runs to completion of every task. Throws Error(Deadlock) when nothing can
// make progress and Error(TimeLimit) past sim.max_time_ms.
MetricsReport run_scenario(const ScenarioConfig& config, const StrategySpec& strategy, std::uint64_t seed);

// Every start of a task must come after the completion of each predecessor.
// Returns one message per violation.
std::vector<std::string> audit_precedence(const std::vector<SimEvent>& events, const TaskGraph& graph);

struct StrategyStats {
    StrategySpec spec;
    std::vector<std::uint64_t> ok_seeds;
    std::vector<std::string> errors;
    // Over seeds, of per-run values: "latency_s", "<node>.cpu", "<node>.mem", "<node>.thp".
    std::map<std::string, SummaryStat> metrics;
};

struct ComparisonReport {
    std::string scenario;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> metric_names;
    std::vector<StrategyStats> strategies;
    // Labels sorted by mean latency, fastest first.
    std::vector<std::string> latency_order;
    std::string verdict;

    const StrategyStats* find(const std::string& label) const;
    // 1 - latency(a) / latency(b)
    double latency_reduction(const std::string& a, const std::string& b) const;
};

// Each (strategy, seed) cell is an isolated run; cells run in parallel and a
// failing cell is reported without stopping the others.
ComparisonReport compare_strategies(const ScenarioConfig& config, const std::vector<StrategySpec>& strategies,
                                    const std::vector<std::uint64_t>& seeds, unsigned max_threads = 0);

}  // namespace offload::sim

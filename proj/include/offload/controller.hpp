#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "offload/executor.hpp"
#include "offload/gateway.hpp"
#include "offload/scenario.hpp"
#include "offload/scheduler.hpp"

namespace offload {

struct ControllerOptions {
    StrategyKind strategy = StrategyKind::Dynamic;
    SchedulerConfig scheduler;
    std::map<TaskId, EdgeId> static_map;
    ExecutorOptions executor;
    GatewayOptions gateway;
    bool reschedule_on_completion = true;
    // Schedule with the task profiler's learned demands instead of the declared ones.
    bool use_learned_demands = true;

    static ControllerOptions from_scenario(const ScenarioConfig& config, StrategyKind strategy,
                                          const std::string& variant);
};

struct RoundReport {
    std::int64_t round = 0;
    std::int64_t time = 0;
    // What the utility scheduler proposed (dynamic strategy only).
    AssignmentPlan scheduled;
    // Everything handed to the executor, pinned tasks included.
    AssignmentPlan combined;
    ActionSet actions;
    std::vector<Receipt> receipts;
    std::vector<std::string> diagnostics;
};

// The resource manager: gateway, scheduler and executor behind one
// message-driven interface shared by the simulator and the live server.
class Controller {
public:
    Controller(const ScenarioConfig& config, const ValidatedScenario& scenario, ControllerOptions options);

    // Stale messages are counted and dropped. Completions may emit unload stops.
    void on_message(const TelemetryMessage& msg, AgentTransport& transport);

    // A round runs on every reschedule tick and after completions.
    bool round_due(std::int64_t now) const;
    RoundReport run_round(std::int64_t now, AgentTransport& transport);

    // Node an onboard task runs on.
    static EdgeId local_node(const TaskSpec& task) { return EdgeId(task.owner.str()); }

    const Gateway& gateway() const noexcept { return gateway_; }
    const Executor& executor() const noexcept { return executor_; }
    const TaskGraph& graph() const noexcept { return graph_; }
    const ControllerOptions& options() const noexcept { return options_; }
    std::int64_t rounds() const noexcept { return round_; }
    std::int64_t overcommit_warnings() const noexcept { return overcommit_warnings_; }
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }
    bool all_completed() const;

private:
    AssignmentPlan build_plan(std::int64_t now, RoundReport& report);
    bool ready(const TaskSpec& task, const std::set<TaskId>& completed) const;

    ControllerOptions options_;
    TaskGraph graph_;
    std::vector<TaskId> sequence_;
    std::set<TaskId> pinned_;
    Gateway gateway_;
    Executor executor_;
    std::int64_t round_ = 0;
    bool completion_pending_ = false;
    std::int64_t overcommit_warnings_ = 0;
    std::vector<std::string> diagnostics_;
};

}  // namespace offload

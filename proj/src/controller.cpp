#include "offload/controller.hpp"

#include <algorithm>

namespace offload {

ControllerOptions ControllerOptions::from_scenario(const ScenarioConfig& config, StrategyKind strategy,
                                                   const std::string& variant) {
    ControllerOptions o;
    o.strategy = strategy;
    o.scheduler.weights = config.weights(variant);
    o.scheduler.variant_name = variant;
    o.scheduler.reschedule_interval_ms = config.sim.reschedule_interval_ms;
    o.static_map = config.strategy.static_map;
    o.executor.diff_enabled = config.sim.diff_enabled;
    o.executor.unload_completed = config.sim.unload_completed;
    o.executor.allow_preinit_handoff = config.sim.allow_preinit_handoff;
    o.gateway.staleness_window_ms = config.sim.staleness_window_ms;
    o.gateway.smoothing_alpha = config.sim.smoothing_alpha;
    o.reschedule_on_completion = config.sim.reschedule_on_completion;
    return o;
}

Controller::Controller(const ScenarioConfig& config, const ValidatedScenario& scenario, ControllerOptions options)
    : options_(std::move(options)),
      graph_(scenario.graph),
      sequence_(sequence_tasks(graph_)),
      gateway_(options_.gateway),
      executor_(options_.executor) {
    if (options_.scheduler.reschedule_interval_ms <= 0)
        throw Error(ErrorCode::InvalidConfig, "reschedule interval must be positive");
    for (const auto& [id, edge] : scenario.initial.edges) gateway_.register_edge(edge);
    for (const auto& robot : config.robots) gateway_.register_robot(robot.id);

    std::map<TaskId, ResourceDemand> declared;
    for (const auto& [id, spec] : graph_.tasks()) {
        declared[id] = spec.demand;
        executor_.register_task(id);
        if (spec.pin.kind != TaskPin::Kind::None) pinned_.insert(id);
    }
    gateway_.seed_catalog(declared);

    if (options_.strategy == StrategyKind::Static) {
        for (const auto& [id, spec] : graph_.tasks())
            if (spec.pin.kind == TaskPin::Kind::None && !options_.static_map.count(id))
                throw Error(ErrorCode::InvalidConfig, "static map does not cover " + id.str());
    }
}

void Controller::on_message(const TelemetryMessage& msg, AgentTransport& transport) {
    if (const auto* c = std::get_if<CompletionPayload>(&msg.payload)) {
        if (!graph_.contains(c->task)) throw Error(ErrorCode::ProtocolError, "completion for unknown task " + c->task.str());
    }
    if (gateway_.ingest(msg) == IngestStatus::Stale) return;

    if (const auto* t = std::get_if<TaskPayload>(&msg.payload)) {
        for (const auto& [task, _] : t->tasks) executor_.observe_running(task, EdgeId(msg.source));
    } else if (const auto* c = std::get_if<CompletionPayload>(&msg.payload)) {
        executor_.mark_completed(c->task, msg.timestamp);
        completion_pending_ = true;
        // Disabling unloading only keeps finished tasks resident on edges; onboard work is always released.
        const auto& where = executor_.lifecycle(c->task).completed_on;
        bool onboard = where && *where == local_node(graph_.at(c->task));
        if (options_.executor.unload_completed || onboard) {
            auto unload = executor_.unload_completed(c->task);
            if (unload.warning) diagnostics_.push_back(*unload.warning);
            executor_.apply_actions(unload.delta, transport, msg.timestamp, round_);
        }
    }
}

bool Controller::round_due(std::int64_t now) const {
    return now % options_.scheduler.reschedule_interval_ms == 0 ||
           (options_.reschedule_on_completion && completion_pending_);
}

bool Controller::all_completed() const {
    auto done = gateway_.completed();
    return std::all_of(graph_.tasks().begin(), graph_.tasks().end(),
                       [&](const auto& kv) { return done.count(kv.first) != 0; });
}

bool Controller::ready(const TaskSpec& task, const std::set<TaskId>& completed) const {
    if (completed.count(task.id)) return false;
    return std::all_of(task.predecessors.begin(), task.predecessors.end(),
                       [&](const TaskId& p) { return completed.count(p) != 0; });
}

AssignmentPlan Controller::build_plan(std::int64_t now, RoundReport& report) {
    const auto completed = gateway_.completed();
    std::map<TaskId, EdgeId> chosen;

    for (const auto& id : sequence_) {
        const auto& spec = graph_.at(id);
        if (!ready(spec, completed)) continue;
        if (options_.strategy == StrategyKind::Local || spec.pin.kind == TaskPin::Kind::Local) {
            chosen[id] = local_node(spec);
        } else if (spec.pin.kind == TaskPin::Kind::Edge) {
            chosen[id] = spec.pin.edge;
        } else if (options_.strategy == StrategyKind::Static) {
            chosen[id] = options_.static_map.at(id);
        }
    }

    if (options_.strategy == StrategyKind::Dynamic) {
        auto snapshot = gateway_.snapshot(now);
        TaskGraph graph = options_.use_learned_demands ? graph_.with_demands(gateway_.catalog()) : graph_;
        report.scheduled = schedule(snapshot, graph, options_.scheduler, round_);
        for (const auto& [task, edge] : report.scheduled.assignments) chosen[task] = edge;
        for (const auto& [task, why] : report.scheduled.unassigned)
            report.diagnostics.push_back("unassigned " + task.str() + ": " + why);
        for (const auto& task : report.scheduled.overcommitted)
            report.diagnostics.push_back("overcommitted " + task.str());
        overcommit_warnings_ += static_cast<std::int64_t>(report.scheduled.overcommitted.size());
    }

    AssignmentPlan combined;
    combined.round = round_;
    for (const auto& id : sequence_) {
        auto it = chosen.find(id);
        if (it == chosen.end()) continue;
        combined.assignments.emplace_back(id, it->second);
        combined.expected_usage[it->second] += graph_.at(id).demand;
    }
    return combined;
}

RoundReport Controller::run_round(std::int64_t now, AgentTransport& transport) {
    ++round_;
    completion_pending_ = false;
    RoundReport report;
    report.round = round_;
    report.time = now;
    try {
        report.combined = build_plan(now, report);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoFreshEdges && e.code() != ErrorCode::NoEdges) throw;
        // Without a usable view nothing is moved this round.
        report.diagnostics.push_back(e.what());
        for (const auto& d : report.diagnostics) diagnostics_.push_back("round " + std::to_string(round_) + ": " + d);
        return report;
    }
    report.actions = executor_.reconcile(report.combined, pinned_);
    report.receipts = executor_.apply_actions(report.actions, transport, now, round_);
    for (const auto& d : report.diagnostics) diagnostics_.push_back("round " + std::to_string(round_) + ": " + d);
    return report;
}

}  // namespace offload

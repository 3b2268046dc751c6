#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "offload/types.hpp"

namespace offload {

// Background (non-task) load on a node. Each telemetry tick draws
// base + uniform(-jitter, +jitter), clamped to [0, capacity].
struct BackgroundLoad {
    double cpu = 0.0;
    double mem = 0.0;
    double cpu_jitter = 0.0;
    double mem_jitter = 0.0;
};

struct LinkConfig {
    double thp_capacity = 100.0;
    double thp_background = 0.0;
};

struct EdgeConfig {
    EdgeId id;
    double cpu_capacity = 100.0;
    double mem_capacity = 100.0;
    double speed = 1.0;
    BackgroundLoad background;
    // Robots without an entry get a default link.
    std::map<RobotId, LinkConfig> links;
    LinkConfig default_link;
};

// A robot's onboard processor, modeled as one weak node.
struct RobotConfig {
    RobotId id;
    double cpu_capacity = 100.0;
    double mem_capacity = 100.0;
    double speed = 0.35;
    BackgroundLoad background;
};

enum class StrategyKind { Local, Static, Dynamic };

const char* to_string(StrategyKind kind) noexcept;

struct StrategyConfig {
    StrategyKind kind = StrategyKind::Dynamic;
    std::string variant = "all";
    std::map<TaskId, EdgeId> static_map;
};

struct SimParams {
    std::int64_t start_latency_ms = 500;
    std::int64_t handoff_penalty_ms = 1500;
    std::int64_t telemetry_tick_ms = 500;
    std::int64_t reschedule_interval_ms = 2000;
    std::int64_t staleness_window_ms = 5000;
    double smoothing_alpha = 0.3;
    // Per-seed multiplicative jitter on actual task demand and work.
    double demand_jitter = 0.1;
    double work_jitter = 0.1;
    bool diff_enabled = true;
    bool unload_completed = true;
    bool allow_preinit_handoff = false;
    bool reschedule_on_completion = true;
    // Last fraction of the run used for terminal-phase statistics.
    double terminal_fraction = 0.25;
    std::int64_t max_time_ms = 24LL * 3600 * 1000;
};

struct ScenarioConfig {
    std::string name;
    std::vector<EdgeConfig> edges;
    std::vector<RobotConfig> robots;
    std::vector<TaskSpec> tasks;
    std::map<std::string, WeightVector> variants;
    StrategyConfig strategy;
    std::uint64_t seed = 1;
    SimParams sim;

    const WeightVector& weights(const std::string& variant) const;
    const EdgeConfig* find_edge(const EdgeId& id) const;
    const RobotConfig* find_robot(const RobotId& id) const;
};

// The named weight variants; each emphasizes one utility component.
std::map<std::string, WeightVector> default_variants();

struct Diagnostic {
    ErrorCode code;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

struct ValidatedScenario {
    TaskGraph graph;
    SystemSnapshot initial;
};

// Strict parse: unknown keys and wrong types are InvalidConfig.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

// A path if it exists, otherwise <name>.json in the shipped scenario directory.
std::filesystem::path resolve_scenario_path(const std::string& name_or_path);

// Collects every violation before throwing ValidationError.
ValidatedScenario validate_scenario(const ScenarioConfig& config);

}  // namespace offload

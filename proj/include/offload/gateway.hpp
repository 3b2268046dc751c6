#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "offload/types.hpp"

namespace offload {

inline constexpr int kProtocolVersion = 1;

// Device profiler: usage percentages of the reporting edge.
struct DevicePayload {
    double cpu_used = 0.0;
    double mem_used = 0.0;
    friend bool operator==(const DevicePayload&, const DevicePayload&) = default;
};

// Network profiler: per-robot link usage, percent of link capacity.
struct NetworkPayload {
    std::map<RobotId, double> thp_used;
    friend bool operator==(const NetworkPayload&, const NetworkPayload&) = default;
};

// Task profiler: every task running on the edge with its observed demand.
// CPU is in percent of the reporting edge.
struct TaskPayload {
    std::map<TaskId, ResourceDemand> tasks;
    friend bool operator==(const TaskPayload&, const TaskPayload&) = default;
};

// Completion prompt for a task; `edge` is empty if it ran onboard.
struct CompletionPayload {
    TaskId task;
    std::optional<EdgeId> edge;
    friend bool operator==(const CompletionPayload&, const CompletionPayload&) = default;
};

// Liveness only; advances the sender's stream clock.
struct HeartbeatPayload {
    friend bool operator==(const HeartbeatPayload&, const HeartbeatPayload&) = default;
};

using TelemetryPayload =
    std::variant<DevicePayload, NetworkPayload, TaskPayload, CompletionPayload, HeartbeatPayload>;

enum class TelemetryKind { Device, Network, Task, Completion, Heartbeat };

struct TelemetryMessage {
    int version = kProtocolVersion;
    std::string source;
    std::int64_t timestamp = 0;
    TelemetryPayload payload;

    TelemetryKind kind() const noexcept { return static_cast<TelemetryKind>(payload.index()); }
    friend bool operator==(const TelemetryMessage&, const TelemetryMessage&) = default;
};

const char* to_string(TelemetryKind kind) noexcept;

// Processing order of messages sharing a timestamp: completions, then
// profiler reports, then heartbeats; by source within a rank.
int kind_rank(TelemetryKind kind) noexcept;
bool message_before(const TelemetryMessage& a, const TelemetryMessage& b) noexcept;

// One line, no trailing newline: {"v":1,"src":...,"ts":...,"kind":...,"payload":{...}}
std::string encode_line(const TelemetryMessage& msg);
// Throws Error(ProtocolError) for anything malformed.
TelemetryMessage decode_line(const std::string& line);

struct GatewayOptions {
    std::int64_t staleness_window_ms = 5000;
    double smoothing_alpha = 0.3;
};

enum class IngestStatus { Accepted, Stale };

struct GatewayCounters {
    std::int64_t accepted = 0;
    std::int64_t stale = 0;
};

// Freshest view of every edge, assembled from profiler telemetry.
// Writers are serialized; readers copy a published immutable state and
// never wait on a writer that is still building the next one.
class Gateway {
public:
    explicit Gateway(GatewayOptions options = {});

    // Capacities, speed and link capacities come from registration; usage
    // fields start from `base` until telemetry arrives.
    void register_edge(const EdgeState& base);
    void register_robot(const RobotId& robot);
    // Prior for the demand catalog.
    void seed_catalog(const std::map<TaskId, ResourceDemand>& demands);

    // Throws UnknownSource; messages older than the source's newest are Stale.
    IngestStatus ingest(const TelemetryMessage& msg);

    // Edges silent for longer than the staleness window are left out.
    // Throws NoFreshEdges if every edge is stale.
    SystemSnapshot snapshot(std::int64_t now) const;
    std::vector<EdgeId> stale_edges(std::int64_t now) const;

    std::map<TaskId, ResourceDemand> catalog() const;
    std::set<TaskId> completed() const;
    GatewayCounters counters() const;
    bool is_registered(const std::string& source) const;

private:
    struct EdgeRecord {
        EdgeState state;
        std::optional<std::int64_t> last_seen;
        std::map<TelemetryKind, std::int64_t> last_by_kind;
    };
    struct State {
        std::map<EdgeId, EdgeRecord> edges;
        std::set<RobotId> robots;
        std::map<std::string, std::int64_t> newest_by_source;
        std::map<TaskId, ResourceDemand> catalog;
        std::set<TaskId> completed;
        std::map<TaskId, EdgeId> completed_on;
        std::int64_t newest = 0;
        GatewayCounters counters;
    };

    std::shared_ptr<const State> load() const;
    void publish(std::shared_ptr<const State> next);

    GatewayOptions options_;
    mutable std::mutex publish_mutex_;
    std::mutex writer_mutex_;
    std::shared_ptr<const State> state_;
};

}  // namespace offload

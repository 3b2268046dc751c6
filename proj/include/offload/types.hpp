#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace offload {

// Opaque string identifier, distinct per namespace.
template <typename Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;

private:
    std::string value_;
};

struct EdgeTag {};
struct RobotTag {};
struct TaskTag {};

// Compute node id. Edges and robot-onboard processors share this namespace.
using EdgeId = Id<EdgeTag>;
using RobotId = Id<RobotTag>;
using TaskId = Id<TaskTag>;

enum class ErrorCode {
    CyclicGraph,
    UnknownReference,
    DemandOutOfRange,
    InvalidConfig,
    ZeroCapacity,
    MissingLink,
    NoEdges,
    NotCompleted,
    UnknownSource,
    StaleMessage,
    NoFreshEdges,
    ProtocolError,
    AgentUnreachable,
    Deadlock,
    TimeLimit,
    AddressInUse,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Percentage points of a reference node's capacity.
struct ResourceDemand {
    double cpu = 0.0;
    double mem = 0.0;
    double thp = 0.0;

    ResourceDemand& operator+=(const ResourceDemand& o) {
        cpu += o.cpu;
        mem += o.mem;
        thp += o.thp;
        return *this;
    }
    friend ResourceDemand operator+(ResourceDemand a, const ResourceDemand& b) { return a += b; }
    friend bool operator==(const ResourceDemand&, const ResourceDemand&) = default;

    bool in_range() const noexcept {
        auto ok = [](double v) { return v >= 0.0 && v <= 100.0; };
        return ok(cpu) && ok(mem) && ok(thp);
    }
};

struct LinkState {
    double thp_capacity = 100.0;
    double thp_used = 0.0;

    friend bool operator==(const LinkState&, const LinkState&) = default;
};

struct EdgeState {
    EdgeId id;
    double cpu_capacity = 100.0;
    double mem_capacity = 100.0;
    double cpu_used = 0.0;
    double mem_used = 0.0;
    // CPU demand on this edge is rho_cpu / speed_factor.
    double speed_factor = 1.0;
    std::map<RobotId, LinkState> links;
    std::set<TaskId> running_tasks;

    friend bool operator==(const EdgeState&, const EdgeState&) = default;
};

// Where a task may run. Unpinned tasks are placed by the active strategy.
struct TaskPin {
    enum class Kind { None, Local, Edge };
    Kind kind = Kind::None;
    EdgeId edge;

    friend bool operator==(const TaskPin&, const TaskPin&) = default;
};

struct TaskSpec {
    TaskId id;
    RobotId owner;
    ResourceDemand demand;
    int priority = 0;
    std::set<TaskId> predecessors;
    // Work at full service rate, in simulated milliseconds.
    double work_ms = 1000.0;
    TaskPin pin;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

class TaskGraph {
public:
    TaskGraph() = default;

    // Validates acyclicity and references; throws Error on the first problem.
    explicit TaskGraph(std::map<TaskId, TaskSpec> tasks);

    const std::map<TaskId, TaskSpec>& tasks() const noexcept { return tasks_; }
    const TaskSpec& at(const TaskId& id) const;
    bool contains(const TaskId& id) const { return tasks_.count(id) != 0; }
    std::size_t size() const noexcept { return tasks_.size(); }
    bool empty() const noexcept { return tasks_.empty(); }

    // Longest predecessor chain, counted in tasks.
    int depth() const;

    // Same graph with demands replaced where `demands` has an entry.
    TaskGraph with_demands(const std::map<TaskId, ResourceDemand>& demands) const;

    // Returns one cycle (in order) if the relation is cyclic.
    static std::optional<std::vector<TaskId>> find_cycle(const std::map<TaskId, TaskSpec>& tasks);

private:
    std::map<TaskId, TaskSpec> tasks_;
};

struct WeightVector {
    double cpu = 0.25;
    double mem = 0.25;
    double net = 0.25;
    double task = 0.25;

    bool valid() const noexcept;
    friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

struct SystemSnapshot {
    std::int64_t timestamp = 0;
    std::map<EdgeId, EdgeState> edges;
    // Tasks currently placed on an edge.
    std::map<TaskId, EdgeId> placements;
    std::set<TaskId> completed;
    // Edge a completed task last ran on; absent for tasks that ran onboard.
    std::map<TaskId, EdgeId> completed_on;

    friend bool operator==(const SystemSnapshot&, const SystemSnapshot&) = default;
};

struct AssignmentPlan {
    std::int64_t round = 0;
    std::vector<std::pair<TaskId, EdgeId>> assignments;
    std::map<EdgeId, ResourceDemand> expected_usage;
    // Tasks that could not be placed, with the reason.
    std::vector<std::pair<TaskId, std::string>> unassigned;
    // Tasks placed even though every candidate total was negative.
    std::vector<TaskId> overcommitted;

    std::map<TaskId, EdgeId> as_map() const;
};

// Checks snapshot invariants; throws Error(InvalidConfig) on violation.
void check_snapshot(const SystemSnapshot& snapshot);

}  // namespace offload

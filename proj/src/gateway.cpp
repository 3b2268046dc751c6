#include "offload/gateway.hpp"

#include <nlohmann/json.hpp>

namespace offload {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(TelemetryKind kind) noexcept {
    switch (kind) {
        case TelemetryKind::Device: return "device";
        case TelemetryKind::Network: return "network";
        case TelemetryKind::Task: return "task";
        case TelemetryKind::Completion: return "completion";
        case TelemetryKind::Heartbeat: return "heartbeat";
    }
    return "unknown";
}

int kind_rank(TelemetryKind kind) noexcept {
    switch (kind) {
        case TelemetryKind::Completion: return 0;
        case TelemetryKind::Device:
        case TelemetryKind::Network:
        case TelemetryKind::Task: return 1;
        case TelemetryKind::Heartbeat: return 2;
    }
    return 3;
}

bool message_before(const TelemetryMessage& a, const TelemetryMessage& b) noexcept {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
    if (ra != rb) return ra < rb;
    return a.source < b.source;
}

namespace {

ordered_json demand_json(const ResourceDemand& d) {
    ordered_json j;
    j["cpu"] = d.cpu;
    j["mem"] = d.mem;
    j["thp"] = d.thp;
    return j;
}

struct PayloadEncoder {
    ordered_json operator()(const DevicePayload& p) const {
        ordered_json j;
        j["cpu"] = p.cpu_used;
        j["mem"] = p.mem_used;
        return j;
    }
    ordered_json operator()(const NetworkPayload& p) const {
        ordered_json links = ordered_json::object();
        for (const auto& [robot, used] : p.thp_used) links[robot.str()] = used;
        ordered_json j;
        j["links"] = std::move(links);
        return j;
    }
    ordered_json operator()(const TaskPayload& p) const {
        ordered_json tasks = ordered_json::object();
        for (const auto& [task, d] : p.tasks) tasks[task.str()] = demand_json(d);
        ordered_json j;
        j["tasks"] = std::move(tasks);
        return j;
    }
    ordered_json operator()(const CompletionPayload& p) const {
        ordered_json j;
        j["task"] = p.task.str();
        j["edge"] = p.edge ? ordered_json(p.edge->str()) : ordered_json(nullptr);
        return j;
    }
    ordered_json operator()(const HeartbeatPayload&) const { return ordered_json::object(); }
};

[[noreturn]] void protocol_error(const std::string& what) { throw Error(ErrorCode::ProtocolError, what); }

void expect_keys(const json& obj, std::initializer_list<const char*> keys, const char* where) {
    if (!obj.is_object()) protocol_error(std::string(where) + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) protocol_error(std::string(where) + ": unexpected field '" + key + "'");
    }
    for (const char* k : keys)
        if (!obj.contains(k)) protocol_error(std::string(where) + ": missing field '" + k + "'");
}

double number(const json& j, const char* what) {
    if (!j.is_number()) protocol_error(std::string(what) + " must be a number");
    return j.get<double>();
}

}  // namespace

std::string encode_line(const TelemetryMessage& msg) {
    ordered_json j;
    j["v"] = msg.version;
    j["src"] = msg.source;
    j["ts"] = msg.timestamp;
    j["kind"] = to_string(msg.kind());
    j["payload"] = std::visit(PayloadEncoder{}, msg.payload);
    return j.dump();
}

TelemetryMessage decode_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        protocol_error(std::string("not JSON: ") + e.what());
    }
    expect_keys(j, {"v", "src", "ts", "kind", "payload"}, "message");
    if (!j["v"].is_number_integer() || j["v"].get<int>() != kProtocolVersion)
        protocol_error("unsupported protocol version " + j["v"].dump());
    if (!j["src"].is_string() || j["src"].get<std::string>().empty()) protocol_error("src must be a non-empty string");
    if (!j["ts"].is_number_integer() || j["ts"].get<std::int64_t>() < 0)
        protocol_error("ts must be a non-negative integer");
    if (!j["kind"].is_string()) protocol_error("kind must be a string");

    TelemetryMessage msg;
    msg.version = kProtocolVersion;
    msg.source = j["src"].get<std::string>();
    msg.timestamp = j["ts"].get<std::int64_t>();
    const auto kind = j["kind"].get<std::string>();
    const json& p = j["payload"];

    if (kind == "device") {
        expect_keys(p, {"cpu", "mem"}, "device payload");
        msg.payload = DevicePayload{number(p["cpu"], "cpu"), number(p["mem"], "mem")};
    } else if (kind == "network") {
        expect_keys(p, {"links"}, "network payload");
        if (!p["links"].is_object()) protocol_error("links must be an object");
        NetworkPayload np;
        for (const auto& [robot, used] : p["links"].items()) np.thp_used[RobotId(robot)] = number(used, "link usage");
        msg.payload = std::move(np);
    } else if (kind == "task") {
        expect_keys(p, {"tasks"}, "task payload");
        if (!p["tasks"].is_object()) protocol_error("tasks must be an object");
        TaskPayload tp;
        for (const auto& [task, d] : p["tasks"].items()) {
            expect_keys(d, {"cpu", "mem", "thp"}, "task demand");
            tp.tasks[TaskId(task)] = {number(d["cpu"], "cpu"), number(d["mem"], "mem"), number(d["thp"], "thp")};
        }
        msg.payload = std::move(tp);
    } else if (kind == "completion") {
        expect_keys(p, {"task", "edge"}, "completion payload");
        if (!p["task"].is_string()) protocol_error("task must be a string");
        CompletionPayload cp;
        cp.task = TaskId(p["task"].get<std::string>());
        if (p["edge"].is_string()) cp.edge = EdgeId(p["edge"].get<std::string>());
        else if (!p["edge"].is_null()) protocol_error("edge must be a string or null");
        msg.payload = std::move(cp);
    } else if (kind == "heartbeat") {
        expect_keys(p, {}, "heartbeat payload");
        msg.payload = HeartbeatPayload{};
    } else {
        protocol_error("unknown kind '" + kind + "'");
    }
    return msg;
}

Gateway::Gateway(GatewayOptions options) : options_(options), state_(std::make_shared<State>()) {}

std::shared_ptr<const Gateway::State> Gateway::load() const {
    std::lock_guard lock(publish_mutex_);
    return state_;
}

void Gateway::publish(std::shared_ptr<const State> next) {
    std::lock_guard lock(publish_mutex_);
    state_ = std::move(next);
}

void Gateway::register_edge(const EdgeState& base) {
    std::lock_guard writer(writer_mutex_);
    auto next = std::make_shared<State>(*load());
    EdgeRecord rec;
    rec.state = base;
    rec.state.running_tasks.clear();
    next->edges[base.id] = std::move(rec);
    publish(std::move(next));
}

void Gateway::register_robot(const RobotId& robot) {
    std::lock_guard writer(writer_mutex_);
    auto next = std::make_shared<State>(*load());
    next->robots.insert(robot);
    publish(std::move(next));
}

void Gateway::seed_catalog(const std::map<TaskId, ResourceDemand>& demands) {
    std::lock_guard writer(writer_mutex_);
    auto next = std::make_shared<State>(*load());
    for (const auto& [task, d] : demands) next->catalog[task] = d;
    publish(std::move(next));
}

bool Gateway::is_registered(const std::string& source) const {
    auto s = load();
    return s->edges.count(EdgeId(source)) || s->robots.count(RobotId(source));
}

IngestStatus Gateway::ingest(const TelemetryMessage& msg) {
    std::lock_guard writer(writer_mutex_);
    auto current = load();

    const EdgeId edge_id(msg.source);
    const bool is_edge = current->edges.count(edge_id) != 0;
    const bool is_robot = current->robots.count(RobotId(msg.source)) != 0;
    if (!is_edge && !is_robot) throw Error(ErrorCode::UnknownSource, msg.source);

    const auto kind = msg.kind();
    if (!is_edge && kind != TelemetryKind::Completion && kind != TelemetryKind::Heartbeat)
        throw Error(ErrorCode::ProtocolError, "robot " + msg.source + " cannot send " + to_string(kind) + " telemetry");

    auto next = std::make_shared<State>(*current);
    if (auto it = next->newest_by_source.find(msg.source);
        it != next->newest_by_source.end() && msg.timestamp < it->second) {
        ++next->counters.stale;
        publish(std::move(next));
        return IngestStatus::Stale;
    }
    next->newest_by_source[msg.source] = msg.timestamp;
    next->newest = std::max(next->newest, msg.timestamp);
    ++next->counters.accepted;

    if (is_edge) {
        auto& rec = next->edges.at(edge_id);
        rec.last_seen = msg.timestamp;
        rec.last_by_kind[kind] = msg.timestamp;
    }

    const double alpha = options_.smoothing_alpha;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, DevicePayload>) {
                auto& s = next->edges.at(edge_id).state;
                s.cpu_used = p.cpu_used;
                s.mem_used = p.mem_used;
            } else if constexpr (std::is_same_v<P, NetworkPayload>) {
                auto& s = next->edges.at(edge_id).state;
                for (const auto& [robot, used] : p.thp_used) {
                    auto link = s.links.find(robot);
                    if (link == s.links.end())
                        throw Error(ErrorCode::ProtocolError, msg.source + " reports unknown link to " + robot.str());
                    link->second.thp_used = used;
                }
            } else if constexpr (std::is_same_v<P, TaskPayload>) {
                auto& s = next->edges.at(edge_id).state;
                s.running_tasks.clear();
                for (const auto& [task, observed] : p.tasks) {
                    s.running_tasks.insert(task);
                    ResourceDemand normalized{observed.cpu * s.speed_factor, observed.mem, observed.thp};
                    auto [it, fresh] = next->catalog.try_emplace(task, normalized);
                    if (!fresh) {
                        auto& c = it->second;
                        c.cpu = alpha * normalized.cpu + (1.0 - alpha) * c.cpu;
                        c.mem = alpha * normalized.mem + (1.0 - alpha) * c.mem;
                        c.thp = alpha * normalized.thp + (1.0 - alpha) * c.thp;
                    }
                }
            } else if constexpr (std::is_same_v<P, CompletionPayload>) {
                next->completed.insert(p.task);
                if (p.edge) next->completed_on[p.task] = *p.edge;
                // The finished task's footprint leaves its edge now, not at the next device report.
                auto demand = next->catalog.find(p.task);
                for (auto& [_, rec] : next->edges) {
                    auto& s = rec.state;
                    if (!s.running_tasks.erase(p.task) || demand == next->catalog.end()) continue;
                    s.cpu_used = std::max(0.0, s.cpu_used - demand->second.cpu / s.speed_factor);
                    s.mem_used = std::max(0.0, s.mem_used - demand->second.mem);
                    if (auto link = s.links.find(RobotId(msg.source)); link != s.links.end())
                        link->second.thp_used = std::max(0.0, link->second.thp_used - demand->second.thp);
                }
            }
        },
        msg.payload);

    publish(std::move(next));
    return IngestStatus::Accepted;
}

SystemSnapshot Gateway::snapshot(std::int64_t now) const {
    auto s = load();
    if (s->edges.empty()) throw Error(ErrorCode::NoEdges, "no edges registered");

    SystemSnapshot snap;
    snap.timestamp = std::max(now, s->newest);
    snap.completed = s->completed;
    snap.completed_on = s->completed_on;

    // A task reported by several edges belongs to the most recent report.
    std::map<TaskId, std::pair<std::int64_t, EdgeId>> owner;
    for (const auto& [id, rec] : s->edges) {
        if (!rec.last_seen || snap.timestamp - *rec.last_seen > options_.staleness_window_ms) continue;
        snap.edges.emplace(id, rec.state);
        auto ts_it = rec.last_by_kind.find(TelemetryKind::Task);
        std::int64_t ts = ts_it == rec.last_by_kind.end() ? -1 : ts_it->second;
        for (const auto& task : rec.state.running_tasks) {
            auto it = owner.find(task);
            if (it == owner.end() || ts > it->second.first) owner[task] = {ts, id};
        }
    }
    if (snap.edges.empty()) throw Error(ErrorCode::NoFreshEdges, "every edge is past the staleness window");

    for (auto& [id, edge] : snap.edges) {
        for (auto it = edge.running_tasks.begin(); it != edge.running_tasks.end();) {
            if (owner.at(*it).second != id) it = edge.running_tasks.erase(it);
            else ++it;
        }
    }
    for (const auto& [task, o] : owner) snap.placements.emplace(task, o.second);
    return snap;
}

std::vector<EdgeId> Gateway::stale_edges(std::int64_t now) const {
    auto s = load();
    std::int64_t ts = std::max(now, s->newest);
    std::vector<EdgeId> out;
    for (const auto& [id, rec] : s->edges)
        if (!rec.last_seen || ts - *rec.last_seen > options_.staleness_window_ms) out.push_back(id);
    return out;
}

std::map<TaskId, ResourceDemand> Gateway::catalog() const { return load()->catalog; }
std::set<TaskId> Gateway::completed() const { return load()->completed; }
GatewayCounters Gateway::counters() const { return load()->counters; }

}  // namespace offload

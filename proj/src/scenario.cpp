#include "offload/scenario.hpp"

#include <fstream>
#include <set>

namespace offload {

using nlohmann::json;

const char* to_string(StrategyKind kind) noexcept {
    switch (kind) {
        case StrategyKind::Local: return "local";
        case StrategyKind::Static: return "static";
        case StrategyKind::Dynamic: return "dynamic";
    }
    return "unknown";
}

std::map<std::string, WeightVector> default_variants() {
    return {
        {"cpu", {0.55, 0.15, 0.15, 0.15}},
        {"mem", {0.15, 0.55, 0.15, 0.15}},
        {"net", {0.15, 0.15, 0.55, 0.15}},
        {"all", {0.25, 0.25, 0.25, 0.25}},
    };
}

const WeightVector& ScenarioConfig::weights(const std::string& variant) const {
    auto it = variants.find(variant);
    if (it == variants.end()) throw Error(ErrorCode::InvalidConfig, "unknown weight variant '" + variant + "'");
    return it->second;
}

const EdgeConfig* ScenarioConfig::find_edge(const EdgeId& id) const {
    for (const auto& e : edges)
        if (e.id == id) return &e;
    return nullptr;
}

const RobotConfig* ScenarioConfig::find_robot(const RobotId& id) const {
    for (const auto& r : robots)
        if (r.id == id) return &r;
    return nullptr;
}

namespace {

std::string join_codes(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(d.code)) + ": " + d.message;
    }
    return out;
}

// Walks one JSON object, rejecting keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) fail("expected an object");
    }

    // Call once every expected key has been read.
    void done() const {
        for (const auto& [key, _] : obj_.items())
            if (!seen_.count(key)) fail("unknown key '" + key + "'");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    const json& at(const std::string& key) {
        if (!has(key)) fail("missing key '" + key + "'");
        return obj_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_number()) fail("'" + key + "' must be a number");
        return v.get<double>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
        return v.get<std::int64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) fail("'" + key + "' must be a boolean");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const auto& v = at(key);
        if (!v.is_string()) fail("'" + key + "' must be a string");
        return v.get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        return string(key);
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ValidationError({{ErrorCode::InvalidConfig, where_ + ": " + message}});
    }

    const std::string& where() const { return where_; }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

BackgroundLoad parse_background(const json& j, const std::string& where) {
    ObjectReader r(j, where);
    BackgroundLoad b;
    b.cpu = r.number("cpu", 0.0);
    b.mem = r.number("mem", 0.0);
    b.cpu_jitter = r.number("cpu_jitter", 0.0);
    b.mem_jitter = r.number("mem_jitter", 0.0);
    r.done();
    return b;
}

LinkConfig parse_link(const json& j, const std::string& where) {
    ObjectReader r(j, where);
    LinkConfig l;
    l.thp_capacity = r.number("thp_capacity", 100.0);
    l.thp_background = r.number("thp_background", 0.0);
    r.done();
    return l;
}

const json& array_at(ObjectReader& r, const std::string& key) {
    const auto& v = r.at(key);
    if (!v.is_array()) r.fail("'" + key + "' must be an array");
    return v;
}

WeightVector parse_weights(const json& j, const std::string& where) {
    ObjectReader r(j, where);
    WeightVector w;
    w.cpu = r.number("cpu", 0.0);
    w.mem = r.number("mem", 0.0);
    w.net = r.number("net", 0.0);
    w.task = r.number("task", 0.0);
    r.done();
    return w;
}

TaskSpec parse_task(const json& j, const std::string& where) {
    ObjectReader r(j, where);
    TaskSpec t;
    t.id = TaskId(r.string("id"));
    t.owner = RobotId(r.string("owner"));
    {
        ObjectReader d(r.at("demand"), where + ".demand");
        t.demand.cpu = d.number("cpu", 0.0);
        t.demand.mem = d.number("mem", 0.0);
        t.demand.thp = d.number("thp", 0.0);
        d.done();
    }
    t.priority = static_cast<int>(r.integer("priority", 0));
    t.work_ms = r.number("work_ms", 1000.0);
    if (r.has("predecessors")) {
        const auto& preds = r.at("predecessors");
        if (!preds.is_array()) r.fail("'predecessors' must be an array");
        for (const auto& p : preds) {
            if (!p.is_string()) r.fail("predecessor ids must be strings");
            t.predecessors.insert(TaskId(p.get<std::string>()));
        }
    }
    if (r.has("pin")) {
        auto pin = r.string("pin");
        if (pin == "local") {
            t.pin.kind = TaskPin::Kind::Local;
        } else {
            t.pin.kind = TaskPin::Kind::Edge;
            t.pin.edge = EdgeId(pin);
        }
    }
    r.done();
    return t;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(diagnostics.empty() ? ErrorCode::InvalidConfig : diagnostics.front().code,
            join_codes(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

ScenarioConfig parse_scenario(const json& doc) {
    ObjectReader root(doc, "scenario");
    ScenarioConfig cfg;
    cfg.name = root.string("name", "unnamed");
    cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 1));

    const auto& edges = array_at(root, "edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::string where = "edges[" + std::to_string(i) + "]";
        ObjectReader r(edges[i], where);
        EdgeConfig e;
        e.id = EdgeId(r.string("id"));
        e.cpu_capacity = r.number("cpu_capacity", 100.0);
        e.mem_capacity = r.number("mem_capacity", 100.0);
        e.speed = r.number("speed", 1.0);
        if (r.has("background")) e.background = parse_background(r.at("background"), where + ".background");
        if (r.has("default_link")) e.default_link = parse_link(r.at("default_link"), where + ".default_link");
        if (r.has("links")) {
            const auto& links = r.at("links");
            if (!links.is_object()) r.fail("'links' must be an object");
            for (const auto& [robot, link] : links.items())
                e.links[RobotId(robot)] = parse_link(link, where + ".links." + robot);
        }
        r.done();
        cfg.edges.push_back(std::move(e));
    }

    const auto& robots = array_at(root, "robots");
    for (std::size_t i = 0; i < robots.size(); ++i) {
        std::string where = "robots[" + std::to_string(i) + "]";
        ObjectReader r(robots[i], where);
        RobotConfig rc;
        rc.id = RobotId(r.string("id"));
        rc.cpu_capacity = r.number("cpu_capacity", 100.0);
        rc.mem_capacity = r.number("mem_capacity", 100.0);
        rc.speed = r.number("speed", 0.35);
        if (r.has("background")) rc.background = parse_background(r.at("background"), where + ".background");
        r.done();
        cfg.robots.push_back(std::move(rc));
    }

    const auto& tasks = array_at(root, "tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i)
        cfg.tasks.push_back(parse_task(tasks[i], "tasks[" + std::to_string(i) + "]"));

    cfg.variants = default_variants();
    if (root.has("weights")) {
        ObjectReader w(root.at("weights"), "weights");
        if (w.has("variant")) cfg.strategy.variant = w.string("variant");
        if (w.has("variants")) {
            const auto& vs = w.at("variants");
            if (!vs.is_object()) w.fail("'variants' must be an object");
            for (const auto& [name, vec] : vs.items())
                cfg.variants[name] = parse_weights(vec, "weights.variants." + name);
        }
        w.done();
    }

    if (root.has("strategy")) {
        ObjectReader s(root.at("strategy"), "strategy");
        auto kind = s.string("kind", "dynamic");
        if (kind == "local") cfg.strategy.kind = StrategyKind::Local;
        else if (kind == "static") cfg.strategy.kind = StrategyKind::Static;
        else if (kind == "dynamic") cfg.strategy.kind = StrategyKind::Dynamic;
        else s.fail("unknown strategy kind '" + kind + "'");
        if (s.has("static_map")) {
            const auto& m = s.at("static_map");
            if (!m.is_object()) s.fail("'static_map' must be an object");
            for (const auto& [task, edge] : m.items()) {
                if (!edge.is_string()) s.fail("static_map values must be edge ids");
                cfg.strategy.static_map[TaskId(task)] = EdgeId(edge.get<std::string>());
            }
        }
        s.done();
    }

    if (root.has("sim")) {
        ObjectReader s(root.at("sim"), "sim");
        SimParams& p = cfg.sim;
        p.start_latency_ms = s.integer("start_latency_ms", p.start_latency_ms);
        p.handoff_penalty_ms = s.integer("handoff_penalty_ms", p.handoff_penalty_ms);
        p.telemetry_tick_ms = s.integer("telemetry_tick_ms", p.telemetry_tick_ms);
        p.reschedule_interval_ms = s.integer("reschedule_interval_ms", p.reschedule_interval_ms);
        p.staleness_window_ms = s.integer("staleness_window_ms", p.staleness_window_ms);
        p.smoothing_alpha = s.number("smoothing_alpha", p.smoothing_alpha);
        p.demand_jitter = s.number("demand_jitter", p.demand_jitter);
        p.work_jitter = s.number("work_jitter", p.work_jitter);
        p.diff_enabled = s.boolean("diff_enabled", p.diff_enabled);
        p.unload_completed = s.boolean("unload_completed", p.unload_completed);
        p.allow_preinit_handoff = s.boolean("allow_preinit_handoff", p.allow_preinit_handoff);
        p.reschedule_on_completion = s.boolean("reschedule_on_completion", p.reschedule_on_completion);
        p.terminal_fraction = s.number("terminal_fraction", p.terminal_fraction);
        p.max_time_ms = s.integer("max_time_ms", p.max_time_ms);
        s.done();
    }
    root.done();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({{ErrorCode::Io, "cannot open scenario file " + path.string()}});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError({{ErrorCode::InvalidConfig, path.string() + ": " + e.what()}});
    }
    return parse_scenario(doc);
}

std::filesystem::path resolve_scenario_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    fs::path direct(name_or_path);
    if (fs::exists(direct)) return direct;
#ifdef OFFLOAD_SCENARIO_DIR
    fs::path shipped = fs::path(OFFLOAD_SCENARIO_DIR) / (name_or_path + ".json");
    if (fs::exists(shipped)) return shipped;
#endif
    return direct;
}

ValidatedScenario validate_scenario(const ScenarioConfig& config) {
    std::vector<Diagnostic> diags;
    auto add = [&](ErrorCode code, std::string msg) { diags.push_back({code, std::move(msg)}); };

    std::set<std::string> node_ids;
    std::set<RobotId> robot_ids;
    if (config.edges.empty()) add(ErrorCode::NoEdges, "scenario declares no edges");
    for (const auto& e : config.edges) {
        if (e.id.empty()) add(ErrorCode::InvalidConfig, "edge with empty id");
        if (!node_ids.insert(e.id.str()).second) add(ErrorCode::InvalidConfig, "duplicate node id " + e.id.str());
        if (e.cpu_capacity <= 0 || e.mem_capacity <= 0) add(ErrorCode::ZeroCapacity, "edge " + e.id.str());
        if (e.speed <= 0) add(ErrorCode::InvalidConfig, "edge " + e.id.str() + " speed must be > 0");
        if (e.default_link.thp_capacity <= 0) add(ErrorCode::ZeroCapacity, "edge " + e.id.str() + " default link");
        for (const auto& [robot, link] : e.links) {
            if (link.thp_capacity <= 0) add(ErrorCode::ZeroCapacity, "link " + e.id.str() + "/" + robot.str());
            if (link.thp_background < 0) add(ErrorCode::InvalidConfig, "negative link background");
        }
        if (e.background.cpu < 0 || e.background.mem < 0)
            add(ErrorCode::InvalidConfig, "edge " + e.id.str() + " negative background");
    }
    for (const auto& r : config.robots) {
        if (r.id.empty()) add(ErrorCode::InvalidConfig, "robot with empty id");
        if (!robot_ids.insert(r.id).second || !node_ids.insert(r.id.str()).second)
            add(ErrorCode::InvalidConfig, "duplicate node id " + r.id.str());
        if (r.cpu_capacity <= 0 || r.mem_capacity <= 0) add(ErrorCode::ZeroCapacity, "robot " + r.id.str());
        if (r.speed <= 0) add(ErrorCode::InvalidConfig, "robot " + r.id.str() + " speed must be > 0");
    }
    for (const auto& e : config.edges)
        for (const auto& [robot, _] : e.links)
            if (!robot_ids.count(robot))
                add(ErrorCode::UnknownReference, "edge " + e.id.str() + " links unknown robot " + robot.str());

    std::map<TaskId, TaskSpec> tasks;
    for (const auto& t : config.tasks) {
        if (t.id.empty()) {
            add(ErrorCode::InvalidConfig, "task with empty id");
            continue;
        }
        if (!tasks.emplace(t.id, t).second) add(ErrorCode::InvalidConfig, "duplicate task id " + t.id.str());
        if (!robot_ids.count(t.owner))
            add(ErrorCode::UnknownReference, "task " + t.id.str() + " owner " + t.owner.str());
        if (!t.demand.in_range()) add(ErrorCode::DemandOutOfRange, "task " + t.id.str());
        if (!(t.work_ms > 0)) add(ErrorCode::InvalidConfig, "task " + t.id.str() + " work_ms must be > 0");
        if (t.predecessors.count(t.id)) add(ErrorCode::CyclicGraph, t.id.str());
        if (t.pin.kind == TaskPin::Kind::Edge && !config.find_edge(t.pin.edge))
            add(ErrorCode::UnknownReference, "task " + t.id.str() + " pinned to unknown edge " + t.pin.edge.str());
    }
    for (const auto& t : config.tasks)
        for (const auto& p : t.predecessors)
            if (p != t.id && !tasks.count(p))
                add(ErrorCode::UnknownReference, "task " + t.id.str() + " predecessor " + p.str());

    // Self-loops are already reported; look for longer cycles among resolvable edges.
    {
        auto pruned = tasks;
        for (auto& [_, spec] : pruned) spec.predecessors.erase(spec.id);
        if (auto cycle = TaskGraph::find_cycle(pruned)) {
            std::string names;
            for (const auto& id : *cycle) names += (names.empty() ? "" : " -> ") + id.str();
            add(ErrorCode::CyclicGraph, names);
        }
    }

    for (const auto& [name, w] : config.variants)
        if (!w.valid()) add(ErrorCode::InvalidConfig, "weight variant '" + name + "' must lie in [0,1] and sum to 1");
    if (!config.variants.count(config.strategy.variant))
        add(ErrorCode::InvalidConfig, "unknown weight variant '" + config.strategy.variant + "'");

    if (config.strategy.kind == StrategyKind::Static) {
        for (const auto& t : config.tasks) {
            if (t.pin.kind != TaskPin::Kind::None) continue;
            auto it = config.strategy.static_map.find(t.id);
            if (it == config.strategy.static_map.end())
                add(ErrorCode::InvalidConfig, "static_map does not cover task " + t.id.str());
            else if (!config.find_edge(it->second))
                add(ErrorCode::UnknownReference, "static_map sends " + t.id.str() + " to unknown edge " + it->second.str());
        }
    }
    for (const auto& [task, edge] : config.strategy.static_map) {
        if (!tasks.count(task)) add(ErrorCode::UnknownReference, "static_map names unknown task " + task.str());
        if (!config.find_edge(edge)) add(ErrorCode::UnknownReference, "static_map names unknown edge " + edge.str());
    }

    const auto& p = config.sim;
    if (p.telemetry_tick_ms <= 0) add(ErrorCode::InvalidConfig, "telemetry_tick_ms must be > 0");
    if (p.reschedule_interval_ms <= 0) add(ErrorCode::InvalidConfig, "reschedule_interval_ms must be > 0");
    if (p.telemetry_tick_ms > 0 && p.reschedule_interval_ms > 0 && p.reschedule_interval_ms % p.telemetry_tick_ms != 0)
        add(ErrorCode::InvalidConfig, "reschedule_interval_ms must be a multiple of telemetry_tick_ms");
    if (p.start_latency_ms < 0 || p.handoff_penalty_ms < 0) add(ErrorCode::InvalidConfig, "latencies must be >= 0");
    if (p.staleness_window_ms <= 0) add(ErrorCode::InvalidConfig, "staleness_window_ms must be > 0");
    if (!(p.smoothing_alpha > 0 && p.smoothing_alpha <= 1)) add(ErrorCode::InvalidConfig, "smoothing_alpha must be in (0,1]");
    if (p.demand_jitter < 0 || p.demand_jitter >= 1 || p.work_jitter < 0 || p.work_jitter >= 1)
        add(ErrorCode::InvalidConfig, "jitter must be in [0,1)");
    if (!(p.terminal_fraction > 0 && p.terminal_fraction <= 1)) add(ErrorCode::InvalidConfig, "terminal_fraction must be in (0,1]");
    if (p.max_time_ms <= 0) add(ErrorCode::InvalidConfig, "max_time_ms must be > 0");

    if (!diags.empty()) throw ValidationError(std::move(diags));

    ValidatedScenario out;
    out.graph = TaskGraph(std::move(tasks));
    out.initial.timestamp = 0;
    for (const auto& e : config.edges) {
        EdgeState s;
        s.id = e.id;
        s.cpu_capacity = e.cpu_capacity;
        s.mem_capacity = e.mem_capacity;
        s.cpu_used = e.background.cpu;
        s.mem_used = e.background.mem;
        s.speed_factor = e.speed;
        for (const auto& r : config.robots) {
            auto it = e.links.find(r.id);
            const LinkConfig& l = it == e.links.end() ? e.default_link : it->second;
            s.links[r.id] = LinkState{l.thp_capacity, l.thp_background};
        }
        out.initial.edges.emplace(e.id, std::move(s));
    }
    return out;
}

}  // namespace offload

#include "offload/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace offload::sim {

const char* to_string(SimEventKind kind) noexcept {
    switch (kind) {
        case SimEventKind::TaskCompleted: return "TaskCompleted";
        case SimEventKind::TaskProgress: return "TaskProgress";
        case SimEventKind::HandoffDone: return "HandoffDone";
        case SimEventKind::TelemetryTick: return "TelemetryTick";
        case SimEventKind::RescheduleTick: return "RescheduleTick";
        case SimEventKind::TaskStarted: return "TaskStarted";
        case SimEventKind::HandoffBegun: return "HandoffBegun";
    }
    return "Unknown";
}

std::string format_event(const SimEvent& e) {
    std::ostringstream out;
    out << e.time << ' ' << to_string(e.kind) << ' ' << (e.task.empty() ? "-" : e.task.str()) << ' '
        << (e.node.empty() ? "-" : e.node.str());
    return out.str();
}

StrategySpec StrategySpec::parse(const std::string& token) {
    StrategySpec s;
    if (token == "local") {
        s.kind = StrategyKind::Local;
        s.label = "local";
        s.variant = "";
    } else if (token == "static") {
        s.kind = StrategyKind::Static;
        s.label = "static";
        s.variant = "";
    } else if (token == "dynamic") {
        s.label = "dynamic-all";
    } else if (token.rfind("dynamic-", 0) == 0 && token.size() > 8) {
        s.variant = token.substr(8);
        s.label = token;
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + token + "'");
    }
    return s;
}

double contention_service_rate(double task_demand, double total_demand, double capacity) {
    if (task_demand <= 0.0 || total_demand <= capacity) return 1.0;
    if (capacity <= 0.0) return 0.0;
    double share = task_demand * capacity / total_demand;
    return std::min(1.0, share / task_demand);
}

SummaryStat summarize(const std::vector<double>& values) {
    SummaryStat s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return s;
}

SummaryStat MetricsReport::latency_ms() const {
    std::vector<double> v;
    v.reserve(tasks.size());
    for (const auto& t : tasks) v.push_back(static_cast<double>(t.latency_ms()));
    return summarize(v);
}

SummaryStat MetricsReport::node_metric(const EdgeId& node, const std::string& metric) const {
    auto it = series.find(node);
    if (it == series.end()) throw Error(ErrorCode::UnknownReference, "node " + node.str());
    std::vector<double> v;
    for (const auto& s : it->second.samples) {
        if (metric == "cpu")
            v.push_back(s.cpu);
        else if (metric == "mem")
            v.push_back(s.mem);
        else if (metric == "thp")
            v.push_back(s.thp);
        else
            throw Error(ErrorCode::InvalidConfig, "unknown metric " + metric);
    }
    return summarize(v);
}

std::vector<EdgeId> MetricsReport::edge_ids() const {
    std::vector<EdgeId> out;
    for (const auto& [id, s] : series)
        if (!s.robot) out.push_back(id);
    return out;
}

std::vector<EdgeId> MetricsReport::robot_ids() const {
    std::vector<EdgeId> out;
    for (const auto& [id, s] : series)
        if (s.robot) out.push_back(id);
    return out;
}

double MetricsReport::terminal_edge_cpu() const {
    const double from = static_cast<double>(end_time) * (1.0 - terminal_fraction);
    std::vector<double> v;
    for (const auto& [id, s] : series) {
        if (s.robot) continue;
        for (const auto& sample : s.samples)
            if (static_cast<double>(sample.time) >= from) v.push_back(sample.cpu);
    }
    return summarize(v).mean;
}

namespace {

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        eng_.seed(seq);
    }
    // Uniform in [0, 1) from the top 53 bits; identical on every platform.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double between(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 eng_;
};

enum class Phase { Idle, Initializing, Running, Resident, Done };

struct Node {
    EdgeId id;
    bool robot = false;
    double cpu_capacity = 100.0;
    double mem_capacity = 100.0;
    double speed = 1.0;
    BackgroundLoad background;
    std::map<RobotId, LinkConfig> links;
    double bg_cpu = 0.0;
    double bg_mem = 0.0;
    Stream rng;

    double cpu_total = 0.0;
    double mem_total = 0.0;
    std::map<RobotId, double> link_total;
};

struct TaskRt {
    const TaskSpec* spec = nullptr;
    ResourceDemand actual;
    double remaining = 0.0;
    Phase phase = Phase::Idle;
    std::optional<EdgeId> node;
    std::int64_t init_until = 0;
    bool handoff = false;
    bool transfer = false;
    double rate = 0.0;
    std::int64_t ready_at = -1;
    std::int64_t first_start = -1;
    std::int64_t completed_at = -1;
    std::int64_t starts = 0;
    std::optional<EdgeId> completed_node;

    bool occupies() const { return phase == Phase::Initializing || phase == Phase::Running || phase == Phase::Resident; }
};

constexpr double kDoneEpsilon = 1e-6;

class World {
public:
    World(const ScenarioConfig& config, const TaskGraph& graph, std::uint64_t seed) : params_(config.sim) {
        std::uint64_t stream = 1;
        for (const auto& e : config.edges) {
            Node n{e.id, false, e.cpu_capacity, e.mem_capacity, e.speed, e.background, {}, 0, 0, Stream(seed, stream++), 0, 0, {}};
            for (const auto& r : config.robots) {
                auto it = e.links.find(r.id);
                n.links[r.id] = it != e.links.end() ? it->second : e.default_link;
            }
            nodes_.emplace(e.id, std::move(n));
        }
        for (const auto& r : config.robots) {
            EdgeId id(r.id.str());
            nodes_.emplace(id, Node{id, true, r.cpu_capacity, r.mem_capacity, r.speed, r.background, {}, 0, 0,
                                    Stream(seed, stream++), 0, 0, {}});
        }
        for (auto& [id, n] : nodes_) {
            n.bg_cpu = n.background.cpu;
            n.bg_mem = n.background.mem;
        }
        Stream jitter(seed, 0);
        for (const auto& [id, spec] : graph.tasks()) {
            TaskRt t;
            t.spec = &spec;
            double d = jitter.between(1.0 - params_.demand_jitter, 1.0 + params_.demand_jitter);
            double w = jitter.between(1.0 - params_.work_jitter, 1.0 + params_.work_jitter);
            t.actual = {spec.demand.cpu * d, spec.demand.mem * d, spec.demand.thp * d};
            t.remaining = static_cast<double>(spec.work_ms) * w;
            if (spec.predecessors.empty()) t.ready_at = 0;
            tasks_.emplace(id, std::move(t));
        }
    }

    std::map<EdgeId, Node>& nodes() { return nodes_; }
    std::map<TaskId, TaskRt>& tasks() { return tasks_; }
    std::vector<SimEvent>& pending_events() { return events_; }
    std::int64_t handoffs_begun() const { return handoffs_; }

    Receipt start(const Action& a, std::int64_t now) {
        Receipt r{a, false, now, {}};
        auto n = nodes_.find(a.edge);
        if (n == nodes_.end()) {
            r.note = "no agent on " + a.edge.str();
            return r;
        }
        auto& t = tasks_.at(a.task);
        if (t.phase != Phase::Idle) {
            r.note = "task not idle";
            return r;
        }
        t.node = a.edge;
        t.handoff = a.handoff;
        t.transfer = false;
        if (!n->second.robot) {
            for (const auto& p : t.spec->predecessors) {
                const auto& pc = tasks_.at(p).completed_node;
                if (pc && !nodes_.at(*pc).robot && *pc != a.edge) t.transfer = true;
            }
        }
        std::int64_t latency = a.handoff ? params_.handoff_penalty_ms : params_.start_latency_ms;
        t.init_until = now + latency;
        t.phase = latency > 0 ? Phase::Initializing : Phase::Running;
        if (t.first_start < 0) t.first_start = now;
        ++t.starts;
        if (a.handoff) ++handoffs_;
        events_.push_back({now, a.handoff ? SimEventKind::HandoffBegun : SimEventKind::TaskStarted, a.task, a.edge});
        if (latency == 0)
            events_.push_back({now, a.handoff ? SimEventKind::HandoffDone : SimEventKind::TaskProgress, a.task, a.edge});
        r.accepted = true;
        return r;
    }

    Receipt stop(const Action& a, std::int64_t now) {
        Receipt r{a, false, now, {}};
        if (!nodes_.count(a.edge)) {
            r.note = "no agent on " + a.edge.str();
            return r;
        }
        auto& t = tasks_.at(a.task);
        if (t.node != a.edge || !t.occupies()) {
            r.note = "task not on node";
            return r;
        }
        if (t.phase == Phase::Resident) {
            t.phase = Phase::Done;
        } else {
            t.phase = Phase::Idle;
        }
        t.node.reset();
        r.accepted = true;
        return r;
    }

    void advance(std::int64_t from, std::int64_t to) {
        if (to <= from) return;
        double dt = static_cast<double>(to - from);
        for (auto& [id, t] : tasks_)
            if (t.phase == Phase::Running) t.remaining -= t.rate * dt;
    }

    void recompute() {
        for (auto& [id, n] : nodes_) {
            n.cpu_total = n.bg_cpu;
            n.mem_total = n.bg_mem;
            n.link_total.clear();
            for (const auto& [r, l] : n.links) n.link_total[r] = l.thp_background;
        }
        for (auto& [id, t] : tasks_) {
            if (!t.occupies() || t.phase == Phase::Initializing) continue;
            auto& n = nodes_.at(*t.node);
            n.cpu_total += t.actual.cpu / n.speed;
            n.mem_total += t.actual.mem;
            if (!n.robot) n.link_total[t.spec->owner] += t.actual.thp * (t.transfer ? 2.0 : 1.0);
        }
        for (auto& [id, t] : tasks_) {
            if (t.phase != Phase::Running) {
                t.rate = 0.0;
                continue;
            }
            const auto& n = nodes_.at(*t.node);
            double rate = std::min(contention_service_rate(t.actual.cpu / n.speed, n.cpu_total, n.cpu_capacity),
                                   contention_service_rate(t.actual.mem, n.mem_total, n.mem_capacity));
            if (!n.robot) {
                const auto& owner = t.spec->owner;
                rate = std::min(rate, contention_service_rate(t.actual.thp, n.link_total.at(owner),
                                                              n.links.at(owner).thp_capacity));
            }
            t.rate = std::max(rate, 1e-9);
        }
    }

    void draw_background() {
        for (auto& [id, n] : nodes_) {
            const auto& b = n.background;
            n.bg_cpu = std::clamp(b.cpu + n.rng.between(-b.cpu_jitter, b.cpu_jitter), 0.0, n.cpu_capacity);
            n.bg_mem = std::clamp(b.mem + n.rng.between(-b.mem_jitter, b.mem_jitter), 0.0, n.mem_capacity);
        }
    }

private:
    SimParams params_;
    std::map<EdgeId, Node> nodes_;
    std::map<TaskId, TaskRt> tasks_;
    std::vector<SimEvent> events_;
    std::int64_t handoffs_ = 0;
};

class SimTransport : public AgentTransport {
public:
    explicit SimTransport(World& world) : world_(world) {}
    Receipt send(const Action& action, std::int64_t now) override {
        return action.kind == ActionKind::Start ? world_.start(action, now) : world_.stop(action, now);
    }

private:
    World& world_;
};

void check_conservation(World& world, const Executor& executor, std::int64_t now) {
    for (const auto& [id, t] : world.tasks()) {
        const auto& lc = executor.lifecycle(id);
        bool live = t.phase == Phase::Initializing || t.phase == Phase::Running;
        std::optional<EdgeId> actual = live ? t.node : std::nullopt;
        if (actual != lc.placed_on)
            throw std::logic_error("placement mismatch for " + id.str() + " at " + std::to_string(now));
    }
}

}  // namespace

MetricsReport run_scenario(const ScenarioConfig& config, const StrategySpec& strategy, std::uint64_t seed) {
    auto validated = validate_scenario(config);
    std::string variant = strategy.kind == StrategyKind::Dynamic ? strategy.variant : config.strategy.variant;
    if (variant.empty()) variant = "all";
    auto options = ControllerOptions::from_scenario(config, strategy.kind, variant);
    if (strategy.diff_enabled) options.executor.diff_enabled = *strategy.diff_enabled;
    if (strategy.unload_completed) options.executor.unload_completed = *strategy.unload_completed;

    Controller controller(config, validated, options);
    World world(config, validated.graph, seed);
    SimTransport transport(world);
    const auto& p = config.sim;

    MetricsReport report;
    report.scenario = config.name;
    report.strategy = strategy.label.empty() ? to_string(strategy.kind) : strategy.label;
    report.variant = strategy.kind == StrategyKind::Dynamic ? variant : "";
    report.seed = seed;
    report.terminal_fraction = p.terminal_fraction;
    for (const auto& [id, n] : world.nodes()) report.series[id] = NodeSeries{id, n.robot, {}};

    auto flush_events = [&] {
        auto& pending = world.pending_events();
        std::stable_sort(pending.begin(), pending.end(), [](const SimEvent& a, const SimEvent& b) {
            if (a.kind != b.kind) return a.kind < b.kind;
            return a.task < b.task;
        });
        report.events.insert(report.events.end(), pending.begin(), pending.end());
        pending.clear();
    };

    std::int64_t now = 0;
    std::int64_t last = 0;
    const std::size_t total = world.tasks().size();
    std::size_t finished = 0;

    while (true) {
        world.advance(last, now);
        last = now;
        std::vector<TelemetryMessage> inbox;

        for (auto& [id, t] : world.tasks()) {
            if (t.phase != Phase::Running || t.remaining > kDoneEpsilon) continue;
            t.phase = Phase::Resident;
            t.completed_at = now;
            t.completed_node = t.node;
            ++finished;
            world.pending_events().push_back({now, SimEventKind::TaskCompleted, id, *t.node});
            std::optional<EdgeId> edge;
            if (!world.nodes().at(*t.node).robot) edge = t.node;
            inbox.push_back({kProtocolVersion, t.spec->owner.str(), now, CompletionPayload{id, edge}});
        }
        for (auto& [id, t] : world.tasks()) {
            if (t.completed_at != now) continue;
            for (auto& [sid, s] : world.tasks()) {
                if (s.ready_at >= 0) continue;
                const auto& preds = s.spec->predecessors;
                if (std::find(preds.begin(), preds.end(), id) == preds.end()) continue;
                bool all = std::all_of(preds.begin(), preds.end(),
                                       [&](const TaskId& q) { return world.tasks().at(q).completed_at >= 0; });
                if (all) s.ready_at = now;
            }
        }

        for (auto& [id, t] : world.tasks()) {
            if (t.phase != Phase::Initializing || t.init_until > now) continue;
            t.phase = Phase::Running;
            world.pending_events().push_back(
                {now, t.handoff ? SimEventKind::HandoffDone : SimEventKind::TaskProgress, id, *t.node});
        }

        if (now % p.telemetry_tick_ms == 0) {
            world.draw_background();
            world.recompute();
            world.pending_events().push_back({now, SimEventKind::TelemetryTick, {}, {}});
            for (auto& [id, n] : world.nodes()) {
                Sample s;
                s.time = now;
                s.cpu = 100.0 * std::min(n.cpu_capacity, n.cpu_total) / n.cpu_capacity;
                s.mem = 100.0 * std::min(n.mem_capacity, n.mem_total) / n.mem_capacity;
                if (n.robot) {
                    report.series[id].samples.push_back(s);
                    inbox.push_back({kProtocolVersion, id.str(), now, HeartbeatPayload{}});
                    continue;
                }
                NetworkPayload net;
                for (const auto& [r, used] : n.link_total) {
                    double cap = n.links.at(r).thp_capacity;
                    net.thp_used[r] = 100.0 * std::min(cap, used) / cap;
                    s.thp += std::min(cap, used);
                }
                report.series[id].samples.push_back(s);
                TaskPayload tasks;
                for (const auto& [tid, t] : world.tasks())
                    if (t.phase == Phase::Running && t.node == id)
                        tasks.tasks[tid] = {t.actual.cpu / n.speed, t.actual.mem, t.actual.thp * (t.transfer ? 2.0 : 1.0)};
                inbox.push_back({kProtocolVersion, id.str(), now,
                                 DevicePayload{std::min(n.cpu_capacity, n.cpu_total),
                                               std::min(n.mem_capacity, n.mem_total)}});
                inbox.push_back({kProtocolVersion, id.str(), now, std::move(net)});
                inbox.push_back({kProtocolVersion, id.str(), now, std::move(tasks)});
            }
        }

        std::stable_sort(inbox.begin(), inbox.end(), message_before);
        for (const auto& m : inbox) {
            report.trace.push_back(m);
            controller.on_message(m, transport);
        }

        if (finished == total) {
            flush_events();
            report.end_time = now;
            break;
        }

        if (controller.round_due(now)) {
            world.pending_events().push_back({now, SimEventKind::RescheduleTick, {}, {}});
            controller.run_round(now, transport);
            check_conservation(world, controller.executor(), now);
            bool active = std::any_of(world.tasks().begin(), world.tasks().end(), [](const auto& kv) {
                return kv.second.phase == Phase::Initializing || kv.second.phase == Phase::Running;
            });
            if (!active) {
                std::string stuck;
                for (const auto& [id, t] : world.tasks())
                    if (t.completed_at < 0) stuck += (stuck.empty() ? "" : ", ") + id.str();
                std::string why;
                for (const auto& d : controller.diagnostics()) why += "; " + d;
                throw Error(ErrorCode::Deadlock, "no runnable task at " + std::to_string(now) + " ms, waiting: " +
                                                     stuck + why);
            }
        }
        flush_events();
        world.recompute();

        std::int64_t next = now - now % p.telemetry_tick_ms + p.telemetry_tick_ms;
        for (const auto& [id, t] : world.tasks()) {
            if (t.phase == Phase::Running) {
                double need = std::max(0.0, t.remaining) / t.rate;
                auto at = now + static_cast<std::int64_t>(std::ceil(need - 1e-9));
                next = std::min(next, std::max(at, now + 1));
            } else if (t.phase == Phase::Initializing) {
                next = std::min(next, std::max(t.init_until, now + 1));
            }
        }
        if (next > p.max_time_ms)
            throw Error(ErrorCode::TimeLimit, "simulation exceeded " + std::to_string(p.max_time_ms) + " ms");
        now = next;
    }

    for (const auto& [id, t] : world.tasks()) {
        TaskOutcome o;
        o.task = id;
        o.node = t.completed_node.value_or(EdgeId{});
        o.ready_at = t.ready_at;
        o.first_start = t.first_start;
        o.completed_at = t.completed_at;
        o.restarts = std::max<std::int64_t>(0, t.starts - 1);
        report.tasks.push_back(o);
    }
    report.actions = controller.executor().action_log();
    report.rounds = controller.rounds();
    report.handoffs = world.handoffs_begun();
    report.handoff_penalty_ms = report.handoffs * p.handoff_penalty_ms;
    report.overcommit_warnings = controller.overcommit_warnings();
    report.diagnostics = controller.diagnostics();
    return report;
}

std::vector<std::string> audit_precedence(const std::vector<SimEvent>& events, const TaskGraph& graph) {
    std::vector<std::string> out;
    std::map<TaskId, std::int64_t> completed;
    for (const auto& e : events) {
        if (e.kind == SimEventKind::TaskCompleted) {
            completed.emplace(e.task, e.time);
            continue;
        }
        if (e.kind != SimEventKind::TaskStarted && e.kind != SimEventKind::HandoffBegun) continue;
        if (!graph.contains(e.task)) {
            out.push_back("start of unknown task " + e.task.str());
            continue;
        }
        for (const auto& p : graph.at(e.task).predecessors) {
            auto it = completed.find(p);
            if (it == completed.end() || it->second > e.time)
                out.push_back(e.task.str() + " started at " + std::to_string(e.time) + " before " + p.str() +
                              " completed");
        }
    }
    return out;
}

const StrategyStats* ComparisonReport::find(const std::string& label) const {
    for (const auto& s : strategies)
        if (s.spec.label == label) return &s;
    return nullptr;
}

double ComparisonReport::latency_reduction(const std::string& a, const std::string& b) const {
    const auto* sa = find(a);
    const auto* sb = find(b);
    if (!sa || !sb || !sa->metrics.count("latency_s") || !sb->metrics.count("latency_s"))
        throw Error(ErrorCode::UnknownReference, "no latency for " + a + " or " + b);
    return 1.0 - sa->metrics.at("latency_s").mean / sb->metrics.at("latency_s").mean;
}

ComparisonReport compare_strategies(const ScenarioConfig& config, const std::vector<StrategySpec>& strategies,
                                    const std::vector<std::uint64_t>& seeds, unsigned max_threads) {
    struct Cell {
        std::size_t strategy = 0;
        std::uint64_t seed = 0;
        std::optional<MetricsReport> report;
        std::string error;
    };
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < strategies.size(); ++s)
        for (auto seed : seeds) cells.push_back({s, seed, std::nullopt, {}});

    unsigned threads = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            auto& c = cells[i];
            try {
                c.report = run_scenario(config, strategies[c.strategy], c.seed);
            } catch (const std::exception& e) {
                c.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    ComparisonReport out;
    out.scenario = config.name;
    out.seeds = seeds;
    out.metric_names.push_back("latency_s");
    std::vector<std::string> nodes;
    for (const auto& e : config.edges) nodes.push_back(e.id.str());
    for (const auto& r : config.robots) nodes.push_back(r.id.str());
    for (const auto& n : nodes)
        for (const char* m : {"cpu", "mem", "thp"}) out.metric_names.push_back(n + "." + m);

    for (std::size_t s = 0; s < strategies.size(); ++s) {
        StrategyStats st;
        st.spec = strategies[s];
        std::map<std::string, std::vector<double>> values;
        for (const auto& c : cells) {
            if (c.strategy != s) continue;
            if (!c.report) {
                st.errors.push_back("seed " + std::to_string(c.seed) + ": " + c.error);
                continue;
            }
            st.ok_seeds.push_back(c.seed);
            values["latency_s"].push_back(c.report->latency_ms().mean / 1000.0);
            for (const auto& n : nodes)
                for (const char* m : {"cpu", "mem", "thp"})
                    values[n + "." + m].push_back(c.report->node_metric(EdgeId(n), m).mean);
        }
        for (const auto& [k, v] : values) st.metrics[k] = summarize(v);
        out.strategies.push_back(std::move(st));
    }

    std::vector<const StrategyStats*> ranked;
    for (const auto& s : out.strategies)
        if (s.metrics.count("latency_s")) ranked.push_back(&s);
    std::stable_sort(ranked.begin(), ranked.end(), [](const StrategyStats* a, const StrategyStats* b) {
        return a->metrics.at("latency_s").mean < b->metrics.at("latency_s").mean;
    });
    std::ostringstream verdict;
    verdict << "latency order:";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out.latency_order.push_back(ranked[i]->spec.label);
        verdict << (i ? " < " : " ") << ranked[i]->spec.label;
    }
    if (ranked.size() > 1) {
        const auto& best = ranked.front()->spec.label;
        for (std::size_t i = 1; i < ranked.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.1f", 100.0 * out.latency_reduction(best, ranked[i]->spec.label));
            verdict << "; " << best << " " << buf << "% below " << ranked[i]->spec.label;
        }
    }
    for (const auto& s : out.strategies)
        if (!s.errors.empty()) verdict << "; " << s.spec.label << " failed on " << s.errors.size() << " seed(s)";
    out.verdict = verdict.str();
    return out;
}

}  // namespace offload::sim

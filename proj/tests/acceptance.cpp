// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <string>

#include <unistd.h>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "offload/executor.hpp"
#include "offload/net.hpp"
#include "offload/report.hpp"
#include "offload/scheduler.hpp"
#include "offload/sim.hpp"
#include "offload/utility.hpp"

using namespace offload;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

ScenarioConfig shipped(const std::string& name) { return load_scenario(resolve_scenario_path(name)); }

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

struct AcceptAll : AgentTransport {
    Receipt send(const Action& a, std::int64_t now) override { return {a, true, now, ""}; }
};

Outcome utility_math() {
    Outcome o;
    auto t0 = Clock::now();
    constexpr double tol = 1e-9;
    auto near = [&](double got, double want, const std::string& what) {
        o.require(std::abs(got - want) <= tol, what + ": got " + std::to_string(got));
    };
    using namespace utility;
    auto edge = [](double cpu, double mem, double thp) { return fixtures::edge("e1", cpu, mem, {{"r1", thp}}); };
    near(cpu_utility(edge(0, 0, 0), {}).value, 1.0, "cpu idle");
    near(cpu_utility(edge(40, 0, 0), {20, 0, 0}).value, 0.40, "cpu 40/20");
    near(cpu_utility(edge(90, 0, 0), {20, 0, 0}).value, -0.10, "cpu 90/20");
    near(mem_utility(edge(0, 0, 0), {}).value, 1.0, "mem idle");
    near(mem_utility(edge(0, 50, 0), {0, 25, 0}).value, 0.25, "mem 50/25");
    near(mem_utility(edge(0, 75, 0), {0, 25, 0}).value, 0.0, "mem 75/25");
    near(net_utility(LinkState{100, 0}, {}).value, 1.0, "net idle");
    near(net_utility(LinkState{100, 30}, {0, 0, 30}).value, 0.40, "net 30/30");
    try {
        net_utility(edge(0, 0, 0), RobotId("r9"), {});
        o.require(false, "missing link accepted");
    } catch (const Error& e) {
        o.require(e.code() == ErrorCode::MissingLink, "missing link code");
    }
    auto nav = fixtures::task("nav", {}, {"slam"});
    std::map<TaskId, EdgeId> slam_on_e1{{TaskId("slam"), EdgeId("e1")}};
    near(task_reward(nav, EdgeId("e1"), slam_on_e1), 1.0, "reward same");
    near(task_reward(nav, EdgeId("e2"), slam_on_e1), -1.0, "reward other");
    near(task_reward(fixtures::task("root"), EdgeId("e1"), slam_on_e1), 0.0, "reward root");
    auto ranks = normalize_task_rewards({{EdgeId("e1"), 1}, {EdgeId("e2"), -1}, {EdgeId("e3"), -1}});
    near(ranks[EdgeId("e1")], 1.0, "rank e1");
    near(ranks[EdgeId("e2")], 0.0, "rank e2");
    near(ranks[EdgeId("e3")], 0.0, "rank e3");
    near(normalize_task_rewards({{EdgeId("e1"), 0}, {EdgeId("e2"), 0}})[EdgeId("e2")], 1.0, "rank equal");
    near(normalize_task_rewards({{EdgeId("e1"), -1}})[EdgeId("e1")], 1.0, "rank single");
    WeightVector q{0.25, 0.25, 0.25, 0.25};
    near(total_utility({0.4}, {0.6}, {1.0}, 0.2, q).total, 0.55, "total quarter");
    near(total_utility({0.37}, {0.1}, {0.9}, 0.5, {1, 0, 0, 0}).total, 0.37, "total projection");
    o.require(select_edge({{EdgeId("e1"), 0.55}, {EdgeId("e2"), 0.30}, {EdgeId("e3"), 0.41}}) == EdgeId("e1"),
              "argmax");
    o.require(select_edge({{EdgeId("e3"), 0.55}, {EdgeId("e1"), 0.55}}) == EdgeId("e1"), "tie-break");
    try {
        select_edge({});
        o.require(false, "empty argmax accepted");
    } catch (const Error& e) {
        o.require(e.code() == ErrorCode::NoEdges, "NoEdges code");
    }

    oracle::Random rng(101);
    int mono = 0, inv = 0;
    for (int i = 0; i < 1000; ++i, ++mono) {
        double cap = rng.real(1, 200), need = rng.real(0, 100);
        double g1 = rng.real(0, 150), g2 = g1 + rng.real(1e-6, 50);
        auto a = edge(g1, g1, g1), b = edge(g2, g2, g2);
        for (auto* e : {&a, &b}) e->cpu_capacity = e->mem_capacity = e->links.at(RobotId("r1")).thp_capacity = cap;
        ResourceDemand d{need, need, need};
        o.require(cpu_utility(a, d) > cpu_utility(b, d), "cpu monotonicity");
        o.require(mem_utility(a, d) > mem_utility(b, d), "mem monotonicity");
        o.require(net_utility(a, RobotId("r1"), d) > net_utility(b, RobotId("r1"), d), "net monotonicity");
        o.require(std::abs(cpu_utility(a, d).value - oracle::cpu(a, d)) <= tol, "cpu vs reference");
    }
    for (int i = 0; i < 1000; ++i, ++inv) {
        std::map<EdgeId, double> totals, scaled;
        double k = rng.real(1e-3, 1e3);
        for (int j = 0, n = rng.integer(1, 6); j < n; ++j) {
            double v = rng.coarse(-1, 1, 0.25);
            totals[EdgeId("e" + std::to_string(j))] = v;
            scaled[EdgeId("e" + std::to_string(j))] = v * k;
        }
        std::vector<std::pair<EdgeId, double>> reversed(totals.rbegin(), totals.rend());
        o.require(select_edge(totals) == select_edge(scaled), "argmax scale invariance");
        o.require(select_edge(totals) == oracle::argmax(reversed), "argmax vs reference");
    }
    double secs = seconds_since(t0);
    o.require(secs < 5.0, "runtime " + std::to_string(secs) + " s");
    if (o.pass) o.detail = std::to_string(mono) + " monotonicity + " + std::to_string(inv) + " invariance cases, " +
                           fmt("%.2f s", secs);
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    auto t0 = Clock::now();
    oracle::Random rng(102);
    int n = 0;
    for (; n < 500; ++n) {
        auto w = oracle::random_world(rng, 4, 6);
        auto weights = rng.weights();
        auto plan = schedule(w.snapshot, TaskGraph(w.tasks), SchedulerConfig{weights}, n);
        auto ref = oracle::schedule(w.snapshot, w.tasks, weights);
        o.require(plan.assignments == ref.assignments, "assignments differ in case " + std::to_string(n));
        o.require(plan.expected_usage == ref.ledger, "ledger differs in case " + std::to_string(n));
    }
    double secs = seconds_since(t0);
    o.require(secs < 30.0, "runtime " + std::to_string(secs) + " s");
    if (o.pass) o.detail = std::to_string(n) + " random cases, " + fmt("%.2f s", secs);
    return o;
}

Outcome handoff_idempotence() {
    Outcome o;
    oracle::Random rng(103);
    int n = 0;
    for (; n < 500; ++n) {
        auto w = oracle::random_world(rng, 4, 6);
        TaskGraph g(w.tasks);
        SchedulerConfig cfg{rng.weights()};
        auto first = schedule(w.snapshot, g, cfg, 1);
        auto second = schedule(w.snapshot, g, cfg, 2);
        auto delta = diff_plan(first.as_map(), second);
        o.require(delta.starts.empty() && delta.stops.empty(), "plain diff moved tasks in case " + std::to_string(n));

        // Same check through the executor once the first plan is in place.
        Executor ex;
        for (const auto& [id, _] : w.tasks) ex.register_task(id);
        AcceptAll transport;
        ex.apply_actions(ex.reconcile(first), transport, 0, 1);
        for (const auto& [t, e] : first.assignments) ex.observe_running(t, e);
        auto again = ex.reconcile(second);
        o.require(again.starts.empty() && again.stops.empty(), "executor moved tasks in case " + std::to_string(n));
    }
    if (o.pass) o.detail = std::to_string(n) + " random snapshots";
    return o;
}

Outcome precedence_safety() {
    Outcome o;
    int runs = 0;
    for (const char* name : {"scenario1", "scenario2", "anticorrelated"}) {
        auto cfg = shipped(name);
        auto v = validate_scenario(cfg);
        for (const char* s : {"local", "static", "dynamic-all", "dynamic-cpu", "dynamic-mem", "dynamic-net"}) {
            for (auto seed : kSeeds) {
                auto r = sim::run_scenario(cfg, sim::StrategySpec::parse(s), seed);
                auto bad = sim::audit_precedence(r.events, v.graph);
                o.require(bad.empty(), std::string(name) + "/" + s + ": " + (bad.empty() ? "" : bad.front()));
                ++runs;
            }
        }
    }
    oracle::Random rng(104);
    int dags = 0;
    for (; dags < 100; ++dags) {
        auto cfg = fixtures::random_scenario(rng, 10);
        auto v = validate_scenario(cfg);
        static const char* kinds[] = {"local", "static", "dynamic-all", "dynamic-cpu", "dynamic-mem", "dynamic-net"};
        auto r = sim::run_scenario(cfg, sim::StrategySpec::parse(kinds[rng.integer(0, 5)]), cfg.seed);
        auto bad = sim::audit_precedence(r.events, v.graph);
        o.require(bad.empty(), "random DAG " + std::to_string(dags) + ": " + (bad.empty() ? "" : bad.front()));
        o.require(r.tasks.size() == cfg.tasks.size(), "random DAG " + std::to_string(dags) + " incomplete");
    }
    if (o.pass) o.detail = std::to_string(runs) + " shipped-scenario runs + " + std::to_string(dags) + " random DAGs";
    return o;
}

Outcome latency_ordering() {
    Outcome o;
    auto t0 = Clock::now();
    auto cfg = shipped("scenario1");
    auto r = sim::compare_strategies(cfg,
                                     {sim::StrategySpec::parse("local"), sim::StrategySpec::parse("static"),
                                      sim::StrategySpec::parse("dynamic-all")},
                                     kSeeds);
    for (const auto& s : r.strategies)
        o.require(s.errors.empty() && s.ok_seeds.size() == kSeeds.size(), s.spec.label + " had failing seeds");
    if (!o.pass) return o;
    double local = r.find("local")->metrics.at("latency_s").mean;
    double stat = r.find("static")->metrics.at("latency_s").mean;
    double dyn = r.find("dynamic-all")->metrics.at("latency_s").mean;
    double vs_static = r.latency_reduction("dynamic-all", "static");
    double vs_local = r.latency_reduction("dynamic-all", "local");
    o.require(dyn < stat && stat < local, "ordering violated");
    o.require(vs_static >= 0.25, "dynamic-all only " + std::to_string(vs_static * 100) + "% below static");
    o.require(vs_local >= 0.40, "dynamic-all only " + std::to_string(vs_local * 100) + "% below local");
    double secs = seconds_since(t0);
    o.require(secs < 120.0, "runtime " + std::to_string(secs) + " s");
    o.detail = fmt("mean latency local %.2f s, static %.2f s, dynamic-all %.2f s; ", local, stat, dyn) +
               fmt("dynamic-all %.1f%% below static, %.1f%% below local", vs_static * 100, vs_local * 100);
    return o;
}

Outcome handoff_avoidance() {
    Outcome o;
    auto cfg = shipped("scenario1");
    auto with_diff = sim::StrategySpec::parse("dynamic-all");
    auto forced = with_diff;
    forced.diff_enabled = false;
    std::string detail = "per-seed latency s (diff/forced):";
    for (auto seed : kSeeds) {
        double a = sim::run_scenario(cfg, with_diff, seed).latency_ms().mean / 1000;
        double b = sim::run_scenario(cfg, forced, seed).latency_ms().mean / 1000;
        o.require(b > a, "seed " + std::to_string(seed) + fmt(": forced %.3f s <= %.3f s", b, a));
        detail += fmt(" %.1f/%.1f", a, b);
    }
    if (o.pass) o.detail = detail;
    return o;
}

Outcome unloading_value() {
    Outcome o;
    std::string detail = "scenario1 terminal edge cpu % (unload/keep):";
    for (const std::string name : {"scenario1", "scenario2"}) {
        auto cfg = shipped(name);
        for (const std::string s : {"local", "static", "dynamic-all"}) {
            auto on = sim::StrategySpec::parse(s);
            auto off = on;
            off.unload_completed = false;
            double sum_on = 0, sum_off = 0;
            for (auto seed : kSeeds) {
                double a = sim::run_scenario(cfg, on, seed).terminal_edge_cpu();
                double b = sim::run_scenario(cfg, off, seed).terminal_edge_cpu();
                o.require(b >= a - 1e-9, name + "/" + s + " seed " + std::to_string(seed) +
                                             fmt(": keeping completed tasks lowered terminal cpu %.2f -> %.2f", a, b));
                sum_on += a;
                sum_off += b;
            }
            if (name == "scenario1" && s != "local") {
                double n = static_cast<double>(kSeeds.size());
                o.require(sum_off > sum_on, s + ": no strict increase on scenario1");
                detail += " " + s + fmt(" %.1f/%.1f", sum_on / n, sum_off / n);
            }
        }
    }
    if (o.pass) o.detail = detail;
    return o;
}

Outcome variant_divergence() {
    Outcome o;
    auto cfg = shipped("anticorrelated");
    auto cpu = sim::run_scenario(cfg, sim::StrategySpec::parse("dynamic-cpu"), cfg.seed);
    auto net = sim::run_scenario(cfg, sim::StrategySpec::parse("dynamic-net"), cfg.seed);
    o.require(cpu.tasks.size() == 1 && net.tasks.size() == 1, "probe did not run");
    if (!o.pass) return o;
    o.require(cpu.tasks[0].node != net.tasks[0].node, "both variants chose " + cpu.tasks[0].node.str());
    o.detail = "cpu variant -> " + cpu.tasks[0].node.str() + ", net variant -> " + net.tasks[0].node.str();
    return o;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "meta.json") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), dir).string()] = ss.str();
    }
    return out;
}

Outcome determinism() {
    Outcome o;
    auto root = fs::temp_directory_path() / ("offload_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    int pairs = 0;
    for (const char* name : {"scenario1", "scenario2", "anticorrelated"}) {
        auto cfg = shipped(name);
        for (const char* s : {"local", "static", "dynamic-all", "dynamic-net"}) {
            for (std::uint64_t seed : {1, 4}) {
                std::map<std::string, std::string> files[2];
                for (int k = 0; k < 2; ++k) {
                    auto dir = root / std::to_string(k);
                    fs::remove_all(dir);
                    report::prepare_output_dir(dir, false);
                    auto r = sim::run_scenario(cfg, sim::StrategySpec::parse(s), seed);
                    report::write_run(dir, r, {{"command", "acceptance"}});
                    files[k] = read_tree(dir);
                }
                o.require(!files[0].empty() && files[0] == files[1],
                          std::string(name) + "/" + s + " seed " + std::to_string(seed) + " differs");
                ++pairs;
            }
        }
        auto specs = std::vector{sim::StrategySpec::parse("local"), sim::StrategySpec::parse("static"),
                                 sim::StrategySpec::parse("dynamic-all")};
        auto a = sim::compare_strategies(cfg, specs, kSeeds, 4);
        auto b = sim::compare_strategies(cfg, specs, kSeeds, 1);
        o.require(report::comparison_csv(a) == report::comparison_csv(b), std::string(name) + " comparison differs");
    }
    fs::remove_all(root);
    if (o.pass) o.detail = std::to_string(pairs) + " run pairs byte-identical, comparisons identical across thread counts";
    return o;
}

Outcome live_parity() {
    Outcome o;
    auto cfg = shipped("scenario1");
    auto v = validate_scenario(cfg);
    std::size_t total = 0;
    for (auto seed : kSeeds) {
        auto r = sim::run_scenario(cfg, sim::StrategySpec::parse("dynamic-all"), seed);
        std::vector<std::string> lines;
        for (const auto& m : r.trace) lines.push_back(encode_line(m));

        Controller controller(cfg, v, ControllerOptions::from_scenario(cfg, StrategyKind::Dynamic, "all"));
        net::ServeOptions opts;
        opts.port = 0;
        opts.expect_agents = static_cast<int>(cfg.edges.size() + cfg.robots.size());
        opts.max_runtime_s = 60;
        std::promise<int> port;
        auto port_future = port.get_future();
        opts.on_listening = [&](int p) { port.set_value(p); };
        auto server = std::async(std::launch::async, [&] { return net::serve(controller, opts); });
        auto replay = net::replay_lines(lines, "127.0.0.1", port_future.get());
        auto served = server.get();
        o.require(served.malformed == 0 && served.rejected == 0, "seed " + std::to_string(seed) + ": bad messages");

        const auto& live = controller.executor().action_log();
        bool same = live.size() == r.actions.size();
        for (std::size_t i = 0; same && i < live.size(); ++i)
            same = live[i].round == r.actions[i].round && live[i].task == r.actions[i].task &&
                   live[i].edge == r.actions[i].edge;
        o.require(same, "seed " + std::to_string(seed) + ": " + std::to_string(live.size()) + " live actions vs " +
                            std::to_string(r.actions.size()) + " simulated");
        o.require(replay.received > 0, "no action lines reached the agents");
        total += live.size();
    }
    if (o.pass) o.detail = std::to_string(total) + " actions matched over " + std::to_string(kSeeds.size()) + " seeds";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"utility math", utility_math},
        {"scheduler matches brute-force oracle", oracle_equivalence},
        {"rescheduling a stable system moves nothing", handoff_idempotence},
        {"no task starts before its predecessors finish", precedence_safety},
        {"latency ordering dynamic-all < static < local", latency_ordering},
        {"forced reassignment is slower on every seed", handoff_avoidance},
        {"keeping completed tasks raises terminal edge cpu", unloading_value},
        {"cpu and network variants pick different edges", variant_divergence},
        {"runs are byte-identical", determinism},
        {"live server reproduces simulated actions", live_parity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::printf("criterion %zu: %s - %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}

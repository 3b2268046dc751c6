#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "oracle.hpp"
#include "offload/scenario.hpp"
#include "offload/types.hpp"

namespace fixtures {

using namespace offload;

inline EdgeState edge(const std::string& id, double cpu_used = 0, double mem_used = 0,
                      std::initializer_list<std::pair<const char*, double>> links = {{"r1", 0.0}}) {
    EdgeState e;
    e.id = EdgeId(id);
    e.cpu_used = cpu_used;
    e.mem_used = mem_used;
    for (const auto& [r, used] : links) e.links[RobotId(r)] = {100.0, used};
    return e;
}

inline TaskSpec task(const std::string& id, ResourceDemand d = {}, std::initializer_list<const char*> preds = {},
                     const std::string& owner = "r1", int priority = 0) {
    TaskSpec t;
    t.id = TaskId(id);
    t.owner = RobotId(owner);
    t.demand = d;
    t.priority = priority;
    for (const char* p : preds) t.predecessors.insert(TaskId(p));
    return t;
}

inline TaskGraph graph(std::initializer_list<TaskSpec> tasks) {
    std::map<TaskId, TaskSpec> m;
    for (const auto& t : tasks) m.emplace(t.id, t);
    return TaskGraph(std::move(m));
}

// Two edges, one robot, a three-task chain a -> b -> c.
inline nlohmann::json small_scenario() {
    return nlohmann::json::parse(R"({
      "name": "small",
      "seed": 3,
      "edges": [
        {"id": "e1", "background": {"cpu": 10, "mem": 10}},
        {"id": "e2", "background": {"cpu": 30, "mem": 20, "cpu_jitter": 2}}
      ],
      "robots": [{"id": "r1"}],
      "tasks": [
        {"id": "a", "owner": "r1", "demand": {"cpu": 20, "mem": 10, "thp": 5}, "work_ms": 3000},
        {"id": "b", "owner": "r1", "demand": {"cpu": 30, "mem": 10, "thp": 5}, "work_ms": 4000, "predecessors": ["a"]},
        {"id": "c", "owner": "r1", "demand": {"cpu": 10, "mem": 5, "thp": 5}, "work_ms": 2000, "predecessors": ["b"]}
      ],
      "strategy": {"kind": "dynamic", "static_map": {"a": "e1", "b": "e2", "c": "e1"}}
    })");
}

// A random valid scenario: 1-3 edges, 1-2 robots, up to `max_tasks` tasks in a
// random DAG, some pinned, under a random strategy.
inline ScenarioConfig random_scenario(oracle::Random& rng, int max_tasks = 8) {
    ScenarioConfig cfg;
    cfg.name = "random";
    cfg.variants = default_variants();
    int ne = rng.integer(1, 3), nr = rng.integer(1, 2), nt = rng.integer(1, max_tasks);
    for (int i = 0; i < ne; ++i) {
        EdgeConfig e;
        e.id = EdgeId("e" + std::to_string(i));
        e.speed = rng.coarse(0.5, 1.5, 0.25);
        e.background = {rng.coarse(0, 50, 5), rng.coarse(0, 50, 5), rng.coarse(0, 5, 1), rng.coarse(0, 5, 1)};
        e.default_link.thp_background = rng.coarse(0, 40, 5);
        cfg.edges.push_back(e);
    }
    for (int i = 0; i < nr; ++i) {
        RobotConfig r;
        r.id = RobotId("r" + std::to_string(i));
        r.background = {rng.coarse(0, 30, 5), rng.coarse(0, 30, 5), 0, 0};
        cfg.robots.push_back(r);
    }
    for (int i = 0; i < nt; ++i) {
        TaskSpec t;
        t.id = TaskId("t" + std::to_string(i));
        t.owner = RobotId("r" + std::to_string(rng.integer(0, nr - 1)));
        t.demand = {rng.coarse(5, 60, 5), rng.coarse(0, 40, 5), rng.coarse(0, 30, 5)};
        t.priority = rng.integer(0, 2);
        t.work_ms = rng.coarse(500, 8000, 250);
        for (int j = 0; j < i; ++j)
            if (rng.coin(0.3)) t.predecessors.insert(TaskId("t" + std::to_string(j)));
        if (rng.coin(0.15)) {
            t.pin.kind = TaskPin::Kind::Local;
        } else if (rng.coin(0.1)) {
            t.pin.kind = TaskPin::Kind::Edge;
            t.pin.edge = EdgeId("e" + std::to_string(rng.integer(0, ne - 1)));
        }
        cfg.strategy.static_map[t.id] = EdgeId("e" + std::to_string(rng.integer(0, ne - 1)));
        cfg.tasks.push_back(t);
    }
    cfg.strategy.kind = static_cast<StrategyKind>(rng.integer(0, 2));
    static const char* variants[] = {"cpu", "mem", "net", "all"};
    cfg.strategy.variant = variants[rng.integer(0, 3)];
    cfg.seed = static_cast<std::uint64_t>(rng.integer(1, 1000));
    return cfg;
}

}  // namespace fixtures

#include <doctest.h>

#include "oracle.hpp"
#include "offload/executor.hpp"

using namespace offload;

namespace {

struct FakeTransport : AgentTransport {
    std::set<EdgeId> down;
    std::vector<Action> sent;
    Receipt send(const Action& a, std::int64_t now) override {
        sent.push_back(a);
        bool ok = !down.count(a.edge);
        return {a, ok, now, ok ? "" : "AgentUnreachable"};
    }
};

AssignmentPlan plan(std::initializer_list<std::pair<const char*, const char*>> xs) {
    AssignmentPlan p;
    for (const auto& [t, e] : xs) p.assignments.emplace_back(TaskId(t), EdgeId(e));
    return p;
}

std::map<TaskId, EdgeId> placed(std::initializer_list<std::pair<const char*, const char*>> xs) {
    std::map<TaskId, EdgeId> m;
    for (const auto& [t, e] : xs) m[TaskId(t)] = EdgeId(e);
    return m;
}

Placement pl(const char* t, const char* e) { return {TaskId(t), EdgeId(e)}; }

Executor with_tasks(std::initializer_list<const char*> ids, ExecutorOptions o = {}) {
    Executor ex(o);
    for (const char* id : ids) ex.register_task(TaskId(id));
    return ex;
}

}  // namespace

TEST_CASE("diff examples") {
    auto same = diff_plan(placed({{"T1", "e1"}}), plan({{"T1", "e1"}}));
    CHECK(same.keeps == std::vector{pl("T1", "e1")});
    CHECK(same.starts.empty());
    CHECK(same.stops.empty());

    auto moved = diff_plan(placed({{"T1", "e1"}}), plan({{"T1", "e2"}}));
    CHECK(moved.stops == std::vector{pl("T1", "e1")});
    CHECK(moved.starts == std::vector{pl("T1", "e2")});

    auto cold = diff_plan({}, plan({{"T1", "e1"}, {"T2", "e2"}}));
    CHECK(cold.starts == std::vector{pl("T1", "e1"), pl("T2", "e2")});
    CHECK(cold.stops.empty());

    auto dropped = diff_plan(placed({{"T1", "e1"}}), plan({}));
    CHECK(dropped.stops == std::vector{pl("T1", "e1")});
}

TEST_CASE("diff lists are disjoint and a plan diffed against itself is empty") {
    oracle::Random rng(41);
    for (int i = 0; i < 500; ++i) {
        std::map<TaskId, EdgeId> prev;
        AssignmentPlan next;
        for (int t = 0; t < 8; ++t) {
            TaskId id("t" + std::to_string(t));
            if (rng.coin()) prev[id] = EdgeId("e" + std::to_string(rng.integer(0, 2)));
            if (rng.coin()) next.assignments.emplace_back(id, EdgeId("e" + std::to_string(rng.integer(0, 2))));
        }
        auto d = diff_plan(prev, next);
        std::set<TaskId> keeps, moving;
        for (const auto& p : d.keeps) keeps.insert(p.first);
        for (const auto& p : d.starts) moving.insert(p.first);
        for (const auto& p : d.stops) moving.insert(p.first);
        for (const auto& t : keeps) CHECK_FALSE(moving.count(t));
        auto again = diff_plan(next.as_map(), next);
        CHECK(again.empty());
        CHECK(again.keeps.size() == next.assignments.size());
    }
}

TEST_CASE("start to a live agent makes the task Starting") {
    auto ex = with_tasks({"T1"});
    FakeTransport tr;
    auto receipts = ex.apply_actions(diff_plan({}, plan({{"T1", "e1"}})), tr, 100, 1);
    REQUIRE(receipts.size() == 1);
    CHECK(receipts[0].accepted);
    CHECK(ex.lifecycle(TaskId("T1")).state == LifecycleState::Starting);
    CHECK(ex.lifecycle(TaskId("T1")).placed_on == EdgeId("e1"));
    ex.observe_running(TaskId("T1"), EdgeId("e1"));
    CHECK(ex.lifecycle(TaskId("T1")).state == LifecycleState::Running);
}

TEST_CASE("start to an unreachable agent leaves the task Pending") {
    auto ex = with_tasks({"T1"});
    FakeTransport tr;
    tr.down.insert(EdgeId("e1"));
    auto receipts = ex.apply_actions(diff_plan({}, plan({{"T1", "e1"}})), tr, 0, 1);
    REQUIRE(receipts.size() == 1);
    CHECK_FALSE(receipts[0].accepted);
    CHECK(receipts[0].note == "AgentUnreachable");
    CHECK(ex.lifecycle(TaskId("T1")).state == LifecycleState::Pending);
    CHECK_FALSE(ex.lifecycle(TaskId("T1")).placed_on.has_value());
}

TEST_CASE("handoff sends the stop before the start") {
    oracle::Random rng(42);
    for (int i = 0; i < 200; ++i) {
        auto ex = with_tasks({"a", "b", "c", "d"});
        FakeTransport tr;
        AssignmentPlan first, second;
        for (const char* t : {"a", "b", "c", "d"}) {
            first.assignments.emplace_back(TaskId(t), EdgeId("e" + std::to_string(rng.integer(0, 2))));
            second.assignments.emplace_back(TaskId(t), EdgeId("e" + std::to_string(rng.integer(0, 2))));
        }
        ex.apply_actions(ex.reconcile(first), tr, 0, 1);
        for (const auto& [t, e] : first.assignments) ex.observe_running(t, e);
        tr.sent.clear();
        ex.apply_actions(ex.reconcile(second), tr, 10, 2);
        std::map<TaskId, std::size_t> stop_at;
        for (std::size_t k = 0; k < tr.sent.size(); ++k) {
            const auto& a = tr.sent[k];
            if (a.kind == ActionKind::Stop) stop_at[a.task] = k;
            else {
                CHECK(a.handoff == (stop_at.count(a.task) != 0));
                if (a.handoff) CHECK(stop_at.at(a.task) < k);
            }
        }
        // Conservation: each task is on at most one node and matches the second plan.
        CHECK(ex.placements() == second.as_map());
    }
}

TEST_CASE("handoff count follows accepted moves") {
    auto ex = with_tasks({"T1"});
    FakeTransport tr;
    ex.apply_actions(ex.reconcile(plan({{"T1", "e1"}})), tr, 0, 1);
    ex.observe_running(TaskId("T1"), EdgeId("e1"));
    ex.apply_actions(ex.reconcile(plan({{"T1", "e2"}})), tr, 1, 2);
    CHECK(ex.handoffs() == 1);
    CHECK(ex.action_log().back().action == "handoff");
    CHECK(ex.lifecycle(TaskId("T1")).placed_on == EdgeId("e2"));
}

TEST_CASE("a rejected stop blocks the matching start") {
    auto ex = with_tasks({"T1"});
    FakeTransport tr;
    ex.apply_actions(ex.reconcile(plan({{"T1", "e1"}})), tr, 0, 1);
    ex.observe_running(TaskId("T1"), EdgeId("e1"));
    tr.down.insert(EdgeId("e1"));
    ex.apply_actions(ex.reconcile(plan({{"T1", "e2"}})), tr, 1, 2);
    CHECK(ex.lifecycle(TaskId("T1")).placed_on == EdgeId("e1"));
    CHECK(ex.action_log().back().result == "skipped: stop rejected");
}

TEST_CASE("a task still initializing is not handed off by default") {
    auto ex = with_tasks({"T1"});
    FakeTransport tr;
    ex.apply_actions(ex.reconcile(plan({{"T1", "e1"}})), tr, 0, 1);
    auto d = ex.reconcile(plan({{"T1", "e2"}}));
    CHECK(d.empty());
    CHECK(d.keeps == std::vector{pl("T1", "e1")});

    auto eager = with_tasks({"T1"}, ExecutorOptions{true, true, true});
    eager.apply_actions(eager.reconcile(plan({{"T1", "e1"}})), tr, 0, 1);
    auto d2 = eager.reconcile(plan({{"T1", "e2"}}));
    CHECK(d2.starts == std::vector{pl("T1", "e2")});
}

TEST_CASE("with the diff disabled every running task is restarted except fixed ones") {
    auto ex = with_tasks({"T1", "T2"}, ExecutorOptions{false, true, false});
    FakeTransport tr;
    auto p = plan({{"T1", "e1"}, {"T2", "e2"}});
    ex.apply_actions(ex.reconcile(p), tr, 0, 1);
    ex.observe_running(TaskId("T1"), EdgeId("e1"));
    ex.observe_running(TaskId("T2"), EdgeId("e2"));
    auto d = ex.reconcile(p, {TaskId("T2")});
    CHECK(d.stops == std::vector{pl("T1", "e1")});
    CHECK(d.starts == std::vector{pl("T1", "e1")});
    CHECK(d.keeps == std::vector{pl("T2", "e2")});
}

TEST_CASE("unloading a completed task") {
    auto ex = with_tasks({"T1", "T2"});
    FakeTransport tr;
    ex.apply_actions(ex.reconcile(plan({{"T1", "e1"}, {"T2", "e1"}})), tr, 0, 1);
    ex.observe_running(TaskId("T1"), EdgeId("e1"));
    CHECK_THROWS_AS(ex.unload_completed(TaskId("T1")), Error);
    try {
        ex.unload_completed(TaskId("T2"));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotCompleted);
    }

    ex.mark_completed(TaskId("T1"), 50);
    CHECK(ex.lifecycle(TaskId("T1")).state == LifecycleState::Completed);
    CHECK_FALSE(ex.lifecycle(TaskId("T1")).placed_on.has_value());
    auto first = ex.unload_completed(TaskId("T1"));
    CHECK(first.delta.stops == std::vector{pl("T1", "e1")});
    CHECK_FALSE(first.warning.has_value());
    CHECK(ex.lifecycle(TaskId("T1")).state == LifecycleState::Removed);
    auto second = ex.unload_completed(TaskId("T1"));
    CHECK(second.delta.empty());
    CHECK(second.warning.has_value());

    // The next plan no longer carries the finished task, and nothing is restarted.
    auto d = ex.reconcile(plan({{"T2", "e1"}}));
    CHECK(d.empty());
}

TEST_CASE("completion of a pending task is rejected") {
    auto ex = with_tasks({"T1"});
    try {
        ex.mark_completed(TaskId("T1"), 0);
        FAIL("expected NotCompleted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotCompleted);
    }
    CHECK_THROWS_AS(ex.lifecycle(TaskId("nope")), Error);
}

TEST_CASE("action log entries round-trip") {
    ActionLogEntry e{3, 4500, "handoff", TaskId("nav1"), EdgeId("edge2"), "accepted"};
    CHECK(action_log_entry_from_json(nlohmann::json::parse(to_json(e).dump())) == e);
    CHECK(to_json(e).dump() ==
          R"({"round":3,"time":4500,"action":"handoff","task":"nav1","edge":"edge2","result":"accepted"})");
    CHECK_THROWS_AS(action_log_entry_from_json(nlohmann::json::object()), Error);
}

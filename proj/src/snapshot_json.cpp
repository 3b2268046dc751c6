#include "offload/snapshot_json.hpp"

namespace offload {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json snapshot_to_json(const SystemSnapshot& s) {
    ordered_json j;
    j["timestamp"] = s.timestamp;
    ordered_json edges = ordered_json::array();
    for (const auto& [id, e] : s.edges) {
        ordered_json je;
        je["id"] = id.str();
        je["cpu_capacity"] = e.cpu_capacity;
        je["mem_capacity"] = e.mem_capacity;
        je["cpu_used"] = e.cpu_used;
        je["mem_used"] = e.mem_used;
        je["speed_factor"] = e.speed_factor;
        ordered_json links = ordered_json::object();
        for (const auto& [robot, l] : e.links)
            links[robot.str()] = {{"thp_capacity", l.thp_capacity}, {"thp_used", l.thp_used}};
        je["links"] = std::move(links);
        ordered_json running = ordered_json::array();
        for (const auto& t : e.running_tasks) running.push_back(t.str());
        je["running_tasks"] = std::move(running);
        edges.push_back(std::move(je));
    }
    j["edges"] = std::move(edges);
    ordered_json placements = ordered_json::object();
    for (const auto& [t, e] : s.placements) placements[t.str()] = e.str();
    j["placements"] = std::move(placements);
    ordered_json completed = ordered_json::array();
    for (const auto& t : s.completed) completed.push_back(t.str());
    j["completed"] = std::move(completed);
    ordered_json completed_on = ordered_json::object();
    for (const auto& [t, e] : s.completed_on) completed_on[t.str()] = e.str();
    j["completed_on"] = std::move(completed_on);
    return j;
}

SystemSnapshot snapshot_from_json(const json& j) {
    try {
        SystemSnapshot s;
        s.timestamp = j.at("timestamp").get<std::int64_t>();
        for (const auto& je : j.at("edges")) {
            EdgeState e;
            e.id = EdgeId(je.at("id").get<std::string>());
            e.cpu_capacity = je.at("cpu_capacity").get<double>();
            e.mem_capacity = je.at("mem_capacity").get<double>();
            e.cpu_used = je.at("cpu_used").get<double>();
            e.mem_used = je.at("mem_used").get<double>();
            e.speed_factor = je.at("speed_factor").get<double>();
            for (const auto& [robot, l] : je.at("links").items())
                e.links[RobotId(robot)] = {l.at("thp_capacity").get<double>(), l.at("thp_used").get<double>()};
            for (const auto& t : je.at("running_tasks")) e.running_tasks.insert(TaskId(t.get<std::string>()));
            s.edges.emplace(e.id, std::move(e));
        }
        for (const auto& [t, e] : j.at("placements").items()) s.placements[TaskId(t)] = EdgeId(e.get<std::string>());
        for (const auto& t : j.at("completed")) s.completed.insert(TaskId(t.get<std::string>()));
        for (const auto& [t, e] : j.at("completed_on").items())
            s.completed_on[TaskId(t)] = EdgeId(e.get<std::string>());
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProtocolError, std::string("bad snapshot: ") + e.what());
    }
}

}  // namespace offload

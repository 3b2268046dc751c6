#pragma once

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "offload/controller.hpp"

namespace offload::net {

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 7400;
    // Trace clock: simulated time advances with message timestamps, and a
    // timestamp is processed once every open connection has moved past it.
    // Wall clock: messages are handled on arrival and rounds follow real time.
    bool trace_clock = true;
    // Trace clock: hold processing until this many agents have connected, and
    // return once they have all disconnected.
    int expect_agents = 0;
    double max_runtime_s = 0.0;
    const volatile std::sig_atomic_t* stop_flag = nullptr;
    std::function<void(int)> on_listening;
};

struct ServeResult {
    std::int64_t messages = 0;
    std::int64_t malformed = 0;
    std::int64_t rejected = 0;
    std::int64_t connections = 0;
    std::vector<std::string> diagnostics;
};

// Single-threaded poll loop; the controller is only touched from it.
// Throws Error(AddressInUse) if the listen address is taken.
ServeResult serve(Controller& controller, const ServeOptions& options);

// {"v":1,"kind":"action","round":..,"action":"start|stop","task":..,"edge":..,"handoff":..}
std::string encode_action(const Action& action, std::int64_t round);

struct ReplayResult {
    std::int64_t sent = 0;
    std::int64_t connections = 0;
    std::int64_t received = 0;
};

// One connection per message source; lines go out in trace order, then the
// client drains whatever the server sends back until it closes.
ReplayResult replay_trace(const std::filesystem::path& trace, const std::string& host, int port);
ReplayResult replay_lines(const std::vector<std::string>& lines, const std::string& host, int port);

}  // namespace offload::net

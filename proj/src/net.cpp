#include "offload/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

namespace offload::net {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Fd& operator=(Fd&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    ~Fd() { reset(); }
    int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

sockaddr_in resolve(const std::string& host, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
        throw Error(ErrorCode::Io, "cannot resolve " + host);
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
    return addr;
}

// Splits complete lines off a receive buffer.
template <class F>
void drain_lines(std::string& buffer, F&& on_line) {
    std::size_t start = 0;
    for (auto nl = buffer.find('\n', start); nl != std::string::npos; nl = buffer.find('\n', start)) {
        std::string line = buffer.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        start = nl + 1;
        on_line(line);
    }
    buffer.erase(0, start);
}

struct Connection {
    Fd fd;
    std::string in;
    std::string out;
    std::string source;
    std::optional<std::int64_t> watermark;
    bool read_closed = false;
    bool failed = false;
};

class LiveTransport : public AgentTransport {
public:
    LiveTransport(std::map<int, Connection>& conns, const Controller& controller, bool trace_clock)
        : conns_(conns), controller_(controller), trace_clock_(trace_clock) {}

    Receipt send(const Action& action, std::int64_t now) override {
        Receipt r{action, false, now, {}};
        const auto& edges = controller_.gateway();
        bool known = edges.is_registered(action.edge.str());
        if (!known) {
            r.note = "unknown node " + action.edge.str();
            return r;
        }
        Connection* target = nullptr;
        for (auto& [fd, c] : conns_)
            if (c.source == action.edge.str() && !c.failed) target = &c;
        if (target) {
            target->out += encode_action(action, controller_.rounds()) + '\n';
        } else if (!trace_clock_) {
            r.note = to_string(ErrorCode::AgentUnreachable);
            return r;
        }
        r.accepted = true;
        return r;
    }

private:
    std::map<int, Connection>& conns_;
    const Controller& controller_;
    bool trace_clock_;
};

void flush_out(Connection& c) {
    while (!c.out.empty() && !c.failed) {
        auto n = ::send(c.fd.get(), c.out.data(), c.out.size(), MSG_NOSIGNAL);
        if (n > 0) {
            c.out.erase(0, static_cast<std::size_t>(n));
        } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
            return;
        } else if (n < 0 && errno == EINTR) {
            continue;
        } else {
            c.failed = true;
        }
    }
}

}  // namespace

std::string encode_action(const Action& action, std::int64_t round) {
    nlohmann::ordered_json j;
    j["v"] = kProtocolVersion;
    j["kind"] = "action";
    j["round"] = round;
    j["action"] = action.kind == ActionKind::Start ? "start" : "stop";
    j["task"] = action.task.str();
    j["edge"] = action.edge.str();
    j["handoff"] = action.handoff;
    return j.dump();
}

ServeResult serve(Controller& controller, const ServeOptions& options) {
    ServeResult result;
    Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
    if (listener.get() < 0) throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
    int yes = 1;
    ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    auto addr = resolve(options.host, options.port);
    if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        if (errno == EADDRINUSE)
            throw Error(ErrorCode::AddressInUse, options.host + ":" + std::to_string(options.port));
        throw Error(ErrorCode::Io, std::string("bind: ") + std::strerror(errno));
    }
    if (::listen(listener.get(), 64) != 0) throw Error(ErrorCode::Io, std::string("listen: ") + std::strerror(errno));
    set_nonblocking(listener.get());
    socklen_t len = sizeof addr;
    ::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    if (options.on_listening) options.on_listening(ntohs(addr.sin_port));

    std::map<int, Connection> conns;
    LiveTransport transport(conns, controller, options.trace_clock);
    std::map<std::int64_t, std::vector<TelemetryMessage>> pending;
    const auto started = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
            .count();
    };
    const std::int64_t interval = controller.options().scheduler.reschedule_interval_ms;
    std::int64_t next_wall_round = interval;
    bool finished = false;

    auto note = [&](std::string text) {
        if (result.diagnostics.size() < 1000) result.diagnostics.push_back(std::move(text));
    };

    auto handle = [&](const TelemetryMessage& msg) {
        ++result.messages;
        try {
            controller.on_message(msg, transport);
        } catch (const Error& e) {
            ++result.rejected;
            note(std::string("rejected message from ") + msg.source + ": " + e.what());
        }
    };

    auto run_round = [&](std::int64_t now) {
        auto before = controller.diagnostics().size();
        try {
            controller.run_round(now, transport);
        } catch (const Error& e) {
            note("round at " + std::to_string(now) + ": " + e.what());
        }
        for (auto i = before; i < controller.diagnostics().size(); ++i) note(controller.diagnostics()[i]);
    };

    // Trace clock: process every timestamp that no open connection can still send.
    auto process_trace = [&](bool all_closed) {
        if (static_cast<int>(result.connections) < options.expect_agents && !all_closed) return;
        std::int64_t horizon = std::numeric_limits<std::int64_t>::max();
        if (!all_closed) {
            for (const auto& [fd, c] : conns) {
                if (c.read_closed) continue;
                if (!c.watermark) return;
                horizon = std::min(horizon, *c.watermark);
            }
        }
        while (!pending.empty() && pending.begin()->first < horizon) {
            auto node = pending.extract(pending.begin());
            auto& group = node.mapped();
            std::stable_sort(group.begin(), group.end(), message_before);
            const std::int64_t t = node.key();
            for (const auto& m : group) handle(m);
            if (controller.all_completed()) continue;
            if (controller.round_due(t)) run_round(t);
        }
    };

    auto on_line = [&](Connection& c, const std::string& line) {
        if (line.empty()) return;
        TelemetryMessage msg;
        try {
            msg = decode_line(line);
        } catch (const Error& e) {
            ++result.malformed;
            note(std::string("malformed line: ") + e.what());
            return;
        }
        if (c.source.empty()) c.source = msg.source;
        if (options.trace_clock) {
            c.watermark = std::max(c.watermark.value_or(msg.timestamp), msg.timestamp);
            pending[msg.timestamp].push_back(std::move(msg));
        } else {
            handle(msg);
        }
    };

    while (!finished) {
        if (options.stop_flag && *options.stop_flag) break;
        if (options.max_runtime_s > 0 && elapsed_ms() >= static_cast<std::int64_t>(options.max_runtime_s * 1000)) {
            note("max runtime reached");
            break;
        }

        std::vector<pollfd> fds;
        fds.push_back({listener.get(), POLLIN, 0});
        for (auto& [fd, c] : conns) {
            short ev = 0;
            if (!c.read_closed) ev |= POLLIN;
            if (!c.out.empty() && !c.failed) ev |= POLLOUT;
            fds.push_back({fd, ev, 0});
        }
        int ready = ::poll(fds.data(), fds.size(), 20);
        if (ready < 0 && errno != EINTR) throw Error(ErrorCode::Io, std::string("poll: ") + std::strerror(errno));

        if (ready > 0 && (fds[0].revents & POLLIN)) {
            while (true) {
                int fd = ::accept(listener.get(), nullptr, nullptr);
                if (fd < 0) break;
                set_nonblocking(fd);
                ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
                conns[fd].fd = Fd(fd);
                ++result.connections;
            }
        }

        for (std::size_t i = 1; ready > 0 && i < fds.size(); ++i) {
            auto it = conns.find(fds[i].fd);
            if (it == conns.end()) continue;
            auto& c = it->second;
            if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) {
                char buf[65536];
                while (!c.read_closed) {
                    auto n = ::recv(fds[i].fd, buf, sizeof buf, 0);
                    if (n > 0) {
                        c.in.append(buf, static_cast<std::size_t>(n));
                        drain_lines(c.in, [&](const std::string& line) { on_line(c, line); });
                        if (c.in.size() > kMaxLine) {
                            ++result.malformed;
                            note("line exceeds limit, dropped");
                            c.in.clear();
                        }
                    } else if (n == 0) {
                        c.read_closed = true;
                    } else if (errno == EINTR) {
                        continue;
                    } else {
                        if (errno != EAGAIN && errno != EWOULDBLOCK) c.read_closed = c.failed = true;
                        break;
                    }
                }
            }
            if (fds[i].revents & POLLOUT) flush_out(c);
        }

        bool all_closed = std::all_of(conns.begin(), conns.end(), [](const auto& kv) { return kv.second.read_closed; });
        if (options.trace_clock) {
            bool enough = static_cast<int>(result.connections) >= std::max(1, options.expect_agents);
            process_trace(all_closed && enough);
            for (auto& [fd, c] : conns) flush_out(c);
            if (all_closed && enough && pending.empty()) finished = true;
        } else {
            const std::int64_t now = elapsed_ms();
            if (now >= next_wall_round) {
                run_round(now);
                next_wall_round += interval * ((now - next_wall_round) / interval + 1);
            } else if (controller.round_due(now)) {
                run_round(now);
            }
            for (auto& [fd, c] : conns) flush_out(c);
        }

        for (auto it = conns.begin(); it != conns.end();) {
            auto& c = it->second;
            if (c.failed || (c.read_closed && c.out.empty() && !options.trace_clock))
                it = conns.erase(it);
            else
                ++it;
        }
    }

    // Graceful shutdown: hand every agent its remaining output.
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (std::chrono::steady_clock::now() < deadline) {
        std::vector<pollfd> fds;
        for (auto& [fd, c] : conns)
            if (!c.out.empty() && !c.failed) fds.push_back({fd, POLLOUT, 0});
        if (fds.empty()) break;
        ::poll(fds.data(), fds.size(), 20);
        for (auto& [fd, c] : conns) flush_out(c);
    }
    return result;
}

ReplayResult replay_trace(const std::filesystem::path& trace, const std::string& host, int port) {
    std::ifstream in(trace);
    if (!in) throw Error(ErrorCode::Io, "cannot open trace " + trace.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
    return replay_lines(lines, host, port);
}

ReplayResult replay_lines(const std::vector<std::string>& lines, const std::string& host, int port) {
    ReplayResult result;
    std::vector<std::string> order;
    std::map<std::string, std::string> outgoing;
    for (const auto& line : lines) {
        auto msg = decode_line(line);
        if (!outgoing.count(msg.source)) order.push_back(msg.source);
        outgoing[msg.source] += line + '\n';
        ++result.sent;
    }

    auto addr = resolve(host, port);
    struct Peer {
        Fd fd;
        std::string out;
        std::string in;
        bool write_done = false;
        bool read_done = false;
    };
    std::vector<Peer> peers;
    for (const auto& src : order) {
        Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
        if (fd.get() < 0 || ::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw Error(ErrorCode::AgentUnreachable, "cannot connect to " + host + ":" + std::to_string(port));
        set_nonblocking(fd.get());
        peers.push_back({std::move(fd), std::move(outgoing[src]), {}, false, false});
    }
    result.connections = static_cast<std::int64_t>(peers.size());

    while (std::any_of(peers.begin(), peers.end(), [](const Peer& p) { return !p.read_done; })) {
        std::vector<pollfd> fds;
        for (auto& p : peers) {
            short ev = 0;
            if (!p.read_done) ev |= POLLIN;
            if (!p.write_done) ev |= POLLOUT;
            fds.push_back({p.fd.get(), ev, 0});
        }
        if (::poll(fds.data(), fds.size(), 1000) < 0 && errno != EINTR)
            throw Error(ErrorCode::Io, std::string("poll: ") + std::strerror(errno));
        for (std::size_t i = 0; i < peers.size(); ++i) {
            auto& p = peers[i];
            if (!p.write_done && (fds[i].revents & POLLOUT)) {
                auto n = ::send(p.fd.get(), p.out.data(), p.out.size(), MSG_NOSIGNAL);
                if (n > 0) p.out.erase(0, static_cast<std::size_t>(n));
                if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)
                    throw Error(ErrorCode::AgentUnreachable, std::string("send: ") + std::strerror(errno));
                if (p.out.empty()) {
                    ::shutdown(p.fd.get(), SHUT_WR);
                    p.write_done = true;
                }
            }
            if (!p.read_done && (fds[i].revents & (POLLIN | POLLHUP | POLLERR))) {
                char buf[65536];
                while (true) {
                    auto n = ::recv(p.fd.get(), buf, sizeof buf, 0);
                    if (n > 0) {
                        p.in.append(buf, static_cast<std::size_t>(n));
                        drain_lines(p.in, [&](const std::string&) { ++result.received; });
                    } else if (n == 0) {
                        p.read_done = true;
                        break;
                    } else {
                        if (errno == EINTR) continue;
                        if (errno != EAGAIN && errno != EWOULDBLOCK) p.read_done = true;
                        break;
                    }
                }
            }
        }
    }
    return result;
}

}  // namespace offload::net

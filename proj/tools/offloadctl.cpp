#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "offload/net.hpp"
#include "offload/report.hpp"
#include "offload/sim.hpp"

using namespace offload;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

bool is_config_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::CyclicGraph:
        case ErrorCode::UnknownReference:
        case ErrorCode::DemandOutOfRange:
        case ErrorCode::InvalidConfig:
        case ErrorCode::ZeroCapacity:
        case ErrorCode::MissingLink:
        case ErrorCode::NoEdges:
            return true;
        default:
            return false;
    }
}

struct ConfigFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ScenarioConfig load_config(const std::string& name_or_path) {
    auto path = resolve_scenario_path(name_or_path);
    if (!std::filesystem::exists(path)) throw ConfigFailure("config file not found: " + path.string());
    return load_scenario(path);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            auto a = std::stoull(text.substr(0, dots));
            auto b = std::stoull(text.substr(dots + 2));
            if (b < a) throw ConfigFailure("empty seed range " + text);
            for (auto s = a; s <= b; ++s) out.push_back(s);
        } else {
            std::size_t start = 0;
            while (start <= text.size()) {
                auto comma = text.find(',', start);
                out.push_back(std::stoull(text.substr(start, comma - start)));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
    } catch (const std::logic_error&) {
        throw ConfigFailure("bad seed list '" + text + "'");
    }
    return out;
}

sim::StrategySpec strategy_from_flags(const ScenarioConfig& cfg, const std::string& strategy,
                                      const std::string& variant) {
    std::string token = strategy.empty() ? to_string(cfg.strategy.kind) : strategy;
    auto spec = sim::StrategySpec::parse(token);
    if (spec.kind == StrategyKind::Dynamic && token == "dynamic") {
        spec.variant = variant.empty() ? cfg.strategy.variant : variant;
        spec.label = "dynamic-" + spec.variant;
    }
    if (spec.kind == StrategyKind::Dynamic) cfg.weights(spec.variant);
    return spec;
}

nlohmann::json base_meta(const std::string& command) {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return {{"command", command}, {"written_at", buf}};
}

void print_diagnostics(const ValidationError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "  " << to_string(d.code) << ": " << d.message << '\n';
}

template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const ConfigFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "invalid config:\n";
        print_diagnostics(e);
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_config_error(e.code()) ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge task offloading: scenario runner, strategy comparison and live resource manager"};
    app.require_subcommand(1);

    std::string config;
    std::string strategy;
    std::string variant;
    std::uint64_t seed = 0;
    std::string seeds = "1..5";
    std::string strategies = "local,static,dynamic-all";
    std::string out_dir;
    bool force = false;
    bool no_diff = false;
    bool no_unload = false;
    unsigned threads = 0;

    auto* validate = app.add_subcommand("validate", "Check a scenario config; writes nothing");
    validate->add_option("--config,-c", config, "Scenario file or shipped scenario name")->required();

    auto* run = app.add_subcommand("run", "Simulate one strategy on one seed");
    run->add_option("--config,-c", config, "Scenario file or shipped scenario name")->required();
    run->add_option("--strategy", strategy, "local, static or dynamic (default: from config)");
    run->add_option("--variant", variant, "Weight variant for dynamic: cpu, mem, net, all");
    run->add_option("--seed", seed, "Seed (default: from config)");
    run->add_option("--out,-o", out_dir, "Output directory");
    run->add_flag("--force", force, "Overwrite a non-empty output directory");
    run->add_flag("--no-diff", no_diff, "Restart every planned task each round");
    run->add_flag("--no-unload", no_unload, "Keep completed tasks resident");

    auto* compare = app.add_subcommand("compare", "Compare strategies over a seed list");
    compare->add_option("--config,-c", config, "Scenario file or shipped scenario name")->required();
    compare->add_option("--strategies", strategies, "Comma-separated: local, static, dynamic-<variant>");
    compare->add_option("--seeds", seeds, "a..b or a comma list")->capture_default_str();
    compare->add_option("--out,-o", out_dir, "Output directory");
    compare->add_option("--threads", threads, "Parallel runs (default: hardware threads)");
    compare->add_flag("--force", force, "Overwrite a non-empty output directory");

    net::ServeOptions serve_opts;
    std::string clock = "trace";
    std::string actions_path;
    auto* serve = app.add_subcommand("serve", "Run the resource manager over the line protocol");
    serve->add_option("--config,-c", config, "Scenario file or shipped scenario name")->required();
    serve->add_option("--strategy", strategy, "local, static or dynamic (default: from config)");
    serve->add_option("--variant", variant, "Weight variant for dynamic");
    serve->add_option("--host", serve_opts.host)->capture_default_str();
    serve->add_option("--port", serve_opts.port, "0 picks a free port")->capture_default_str();
    serve->add_option("--clock", clock, "trace: advance on message timestamps; wall: real time")
        ->check(CLI::IsMember({"trace", "wall"}))
        ->capture_default_str();
    serve->add_option("--expect-agents", serve_opts.expect_agents,
                      "Trace clock: wait for this many connections before processing");
    serve->add_option("--max-runtime-s", serve_opts.max_runtime_s, "Stop after this many seconds (0: no limit)");
    serve->add_option("--actions", actions_path, "Action log file (default: stdout summary only)");
    serve->add_flag("--no-diff", no_diff, "Restart every planned task each round");
    serve->add_flag("--no-unload", no_unload, "Keep completed tasks resident");

    std::string trace_path;
    std::string host = "127.0.0.1";
    int port = 0;
    auto* replay = app.add_subcommand("replay", "Feed a recorded trace to a running server, one connection per agent");
    replay->add_option("--trace", trace_path, "trace.ndjson from a run")->required();
    replay->add_option("--host", host)->capture_default_str();
    replay->add_option("--port", port)->required();

    CLI11_PARSE(app, argc, argv);

    if (*validate) {
        return guarded([&] {
            auto cfg = load_config(config);
            auto v = validate_scenario(cfg);
            std::cout << "ok: " << cfg.name << ": " << cfg.edges.size() << " edges, " << cfg.robots.size()
                      << " robots, " << v.graph.size() << " tasks, depth " << v.graph.depth() << '\n';
            return kExitOk;
        });
    }

    if (*run) {
        return guarded([&] {
            auto cfg = load_config(config);
            auto spec = strategy_from_flags(cfg, strategy, variant);
            if (no_diff) spec.diff_enabled = false;
            if (no_unload) spec.unload_completed = false;
            std::uint64_t s = run->count("--seed") ? seed : cfg.seed;
            std::filesystem::path dir =
                out_dir.empty() ? std::filesystem::path("runs") / (cfg.name + "_" + spec.label + "_s" + std::to_string(s))
                                : std::filesystem::path(out_dir);
            report::prepare_output_dir(dir, force);
            auto r = sim::run_scenario(cfg, spec, s);
            auto meta = base_meta("run");
            meta["config"] = config;
            meta["strategy"] = spec.label;
            meta["seed"] = s;
            report::write_run(dir, r, meta);
            std::cout << report::summary_csv(r);
            std::cout << "wrote " << dir.string() << '\n';
            return kExitOk;
        });
    }

    if (*compare) {
        return guarded([&] {
            auto cfg = load_config(config);
            std::vector<sim::StrategySpec> specs;
            std::size_t start = 0;
            while (start <= strategies.size()) {
                auto comma = strategies.find(',', start);
                auto token = strategies.substr(start, comma - start);
                if (!token.empty()) {
                    auto spec = sim::StrategySpec::parse(token);
                    if (spec.kind == StrategyKind::Dynamic) cfg.weights(spec.variant);
                    specs.push_back(spec);
                }
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (specs.size() < 2) throw ConfigFailure("compare needs at least two strategies");
            auto seed_list = parse_seeds(seeds);
            if (seed_list.empty()) throw ConfigFailure("compare needs at least one seed");
            validate_scenario(cfg);
            std::filesystem::path dir =
                out_dir.empty() ? std::filesystem::path("runs") / (cfg.name + "_compare") : std::filesystem::path(out_dir);
            report::prepare_output_dir(dir, force);
            auto r = sim::compare_strategies(cfg, specs, seed_list, threads);
            auto meta = base_meta("compare");
            meta["config"] = config;
            meta["strategies"] = strategies;
            meta["seeds"] = seed_list;
            report::write_comparison(dir, r, meta);
            std::cout << report::comparison_table(r);
            std::cout << "wrote " << dir.string() << '\n';
            for (const auto& s : r.strategies)
                if (!s.errors.empty()) return kExitRuntime;
            return kExitOk;
        });
    }

    if (*serve) {
        return guarded([&] {
            auto cfg = load_config(config);
            auto spec = strategy_from_flags(cfg, strategy, variant);
            auto validated = validate_scenario(cfg);
            auto options = ControllerOptions::from_scenario(cfg, spec.kind, spec.kind == StrategyKind::Dynamic
                                                                                ? spec.variant
                                                                                : cfg.strategy.variant);
            if (no_diff) options.executor.diff_enabled = false;
            if (no_unload) options.executor.unload_completed = false;
            serve_opts.trace_clock = clock == "trace";
            serve_opts.stop_flag = &g_stop;
            serve_opts.on_listening = [](int p) { std::cerr << "listening on port " << p << std::endl; };
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            Controller controller(cfg, validated, options);
            auto result = net::serve(controller, serve_opts);
            if (!actions_path.empty()) report::write_file(actions_path, report::actions_log(controller.executor().action_log()));
            std::cerr << "rounds " << controller.rounds() << ", actions " << controller.executor().action_log().size()
                      << ", messages " << result.messages << ", malformed " << result.malformed << ", stale "
                      << controller.gateway().counters().stale << '\n';
            for (const auto& d : result.diagnostics) std::cerr << "  " << d << '\n';
            return kExitOk;
        });
    }

    if (*replay) {
        return guarded([&] {
            auto result = net::replay_trace(trace_path, host, port);
            std::cerr << "sent " << result.sent << " messages on " << result.connections << " connections, received "
                      << result.received << " action lines\n";
            return kExitOk;
        });
    }
    return kExitOk;
}

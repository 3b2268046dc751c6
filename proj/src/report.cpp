#include "offload/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace offload::report {

namespace fs = std::filesystem;

std::string num(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

std::string summary_csv(const sim::MetricsReport& r) {
    std::vector<EdgeId> nodes = r.edge_ids();
    for (const auto& id : r.robot_ids()) nodes.push_back(id);

    std::ostringstream out;
    out << "metric,stat";
    for (const auto& n : nodes) out << ',' << n.str();
    out << ",overall\n";

    for (const char* m : {"cpu", "mem", "thp"}) {
        std::vector<sim::SummaryStat> stats;
        std::vector<double> all;
        for (const auto& n : nodes) {
            stats.push_back(r.node_metric(n, m));
            for (const auto& s : r.series.at(n).samples)
                all.push_back(std::string(m) == "cpu" ? s.cpu : std::string(m) == "mem" ? s.mem : s.thp);
        }
        auto overall = sim::summarize(all);
        out << m << "_pct,mean";
        for (const auto& s : stats) out << ',' << num(s.mean);
        out << ',' << num(overall.mean) << '\n';
        out << m << "_pct,std";
        for (const auto& s : stats) out << ',' << num(s.stddev);
        out << ',' << num(overall.stddev) << '\n';
    }

    auto lat = r.latency_ms();
    std::string blanks(nodes.size(), ',');
    out << "latency_s,mean" << blanks << ',' << num(lat.mean / 1000.0) << '\n';
    out << "latency_s,std" << blanks << ',' << num(lat.stddev / 1000.0) << '\n';
    out << "terminal_edge_cpu_pct,mean" << blanks << ',' << num(r.terminal_edge_cpu()) << '\n';
    out << "handoffs,count" << blanks << ',' << r.handoffs << '\n';
    out << "makespan_s,value" << blanks << ',' << num(static_cast<double>(r.end_time) / 1000.0) << '\n';
    return out.str();
}

std::string timeseries_csv(const sim::NodeSeries& series, const std::string& metric) {
    std::ostringstream out;
    out << "time_ms," << metric << "_pct\n";
    for (const auto& s : series.samples) {
        double v = metric == "cpu" ? s.cpu : metric == "mem" ? s.mem : s.thp;
        out << s.time << ',' << num(v) << '\n';
    }
    return out.str();
}

std::string latency_csv(const sim::MetricsReport& r) {
    std::ostringstream out;
    out << "task,node,ready_ms,start_ms,completed_ms,latency_ms,restarts\n";
    for (const auto& t : r.tasks)
        out << t.task.str() << ',' << t.node.str() << ',' << t.ready_at << ',' << t.first_start << ','
            << t.completed_at << ',' << t.latency_ms() << ',' << t.restarts << '\n';
    return out.str();
}

std::string events_log(const sim::MetricsReport& r) {
    std::string out;
    for (const auto& e : r.events) out += sim::format_event(e) + '\n';
    return out;
}

std::string actions_log(const std::vector<ActionLogEntry>& actions) {
    std::string out;
    for (const auto& a : actions) out += to_json(a).dump() + '\n';
    return out;
}

std::string trace_ndjson(const std::vector<TelemetryMessage>& trace) {
    std::string out;
    for (const auto& m : trace) out += encode_line(m) + '\n';
    return out;
}

std::string comparison_csv(const sim::ComparisonReport& r) {
    std::ostringstream out;
    out << "metric,stat";
    for (const auto& s : r.strategies) out << ',' << s.spec.label;
    out << '\n';
    for (const auto& m : r.metric_names) {
        for (const char* stat : {"mean", "std"}) {
            out << m << ',' << stat;
            for (const auto& s : r.strategies) {
                auto it = s.metrics.find(m);
                out << ',';
                if (it != s.metrics.end()) out << num(std::string(stat) == "mean" ? it->second.mean : it->second.stddev);
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string comparison_table(const sim::ComparisonReport& r) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> head{"metric", "stat"};
    for (const auto& s : r.strategies) head.push_back(s.spec.label);
    rows.push_back(head);
    for (const auto& m : r.metric_names) {
        for (const char* stat : {"mean", "std"}) {
            std::vector<std::string> row{m, stat};
            for (const auto& s : r.strategies) {
                auto it = s.metrics.find(m);
                if (it == s.metrics.end()) {
                    row.push_back("n/a");
                    continue;
                }
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.3f", std::string(stat) == "mean" ? it->second.mean : it->second.stddev);
                row.push_back(buf);
            }
            rows.push_back(row);
        }
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << "  ";
            if (i < 2)
                out << row[i] << std::string(width[i] - row[i].size(), ' ');
            else
                out << std::string(width[i] - row[i].size(), ' ') << row[i];
        }
        out << '\n';
    }
    for (const auto& s : r.strategies)
        for (const auto& e : s.errors) out << s.spec.label << ": " << e << '\n';
    out << r.verdict << '\n';
    return out.str();
}

void prepare_output_dir(const fs::path& dir, bool force) {
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec))
            throw Error(ErrorCode::InvalidConfig, "output path " + dir.string() + " is not a directory");
        if (!fs::is_empty(dir, ec) && !force)
            throw Error(ErrorCode::InvalidConfig,
                        "output directory " + dir.string() + " is not empty (use --force to overwrite)");
    }
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_run(const fs::path& dir, const sim::MetricsReport& r, const nlohmann::json& meta) {
    write_file(dir / "summary.csv", summary_csv(r));
    write_file(dir / "latency.csv", latency_csv(r));
    write_file(dir / "events.log", events_log(r));
    write_file(dir / "actions.log", actions_log(r.actions));
    write_file(dir / "trace.ndjson", trace_ndjson(r.trace));
    fs::create_directories(dir / "timeseries");
    for (const auto& [id, s] : r.series)
        for (const char* m : {"cpu", "mem", "thp"})
            write_file(dir / "timeseries" / (id.str() + "_" + m + ".csv"), timeseries_csv(s, m));
    write_file(dir / "meta.json", meta.dump(2) + '\n');
}

void write_comparison(const fs::path& dir, const sim::ComparisonReport& r, const nlohmann::json& meta) {
    write_file(dir / "comparison.csv", comparison_csv(r));
    write_file(dir / "comparison.txt", comparison_table(r));
    write_file(dir / "meta.json", meta.dump(2) + '\n');
}

}  // namespace offload::report

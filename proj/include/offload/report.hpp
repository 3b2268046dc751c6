#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "offload/sim.hpp"

namespace offload::report {

// Fixed-precision decimal used by every data file.
std::string num(double value);

// metric,stat,<nodes...>,overall rows for cpu/mem/thp plus task latency.
std::string summary_csv(const sim::MetricsReport& report);
// time_ms,<metric>_pct
std::string timeseries_csv(const sim::NodeSeries& series, const std::string& metric);
// task,node,ready_ms,start_ms,completed_ms,latency_ms,restarts
std::string latency_csv(const sim::MetricsReport& report);
std::string events_log(const sim::MetricsReport& report);
std::string actions_log(const std::vector<ActionLogEntry>& actions);
std::string trace_ndjson(const std::vector<TelemetryMessage>& trace);

// metric,stat,<strategy labels...>
std::string comparison_csv(const sim::ComparisonReport& report);
std::string comparison_table(const sim::ComparisonReport& report);

// Refuses a non-empty directory unless `force`; creates it otherwise.
// Throws Error(InvalidConfig).
void prepare_output_dir(const std::filesystem::path& dir, bool force);

// Data files are a pure function of the report; `meta` goes to meta.json only.
void write_run(const std::filesystem::path& dir, const sim::MetricsReport& report, const nlohmann::json& meta);
void write_comparison(const std::filesystem::path& dir, const sim::ComparisonReport& report,
                      const nlohmann::json& meta);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace offload::report

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sliceshift/simengine.hpp"

namespace sliceshift {

// Fixed cross-platform numeric format: 6 significant digits, '.' separator.
std::string fmt_num(double v);

std::string summary_json_text(const std::string& scenario_id, std::uint64_t seed, Policy policy,
                              const MetricsReport& report);
std::string events_log_text(const RunResult& result);
std::string timeseries_csv_text(const RunResult& result);

struct CompareRow {
    Policy policy;
    double total_revenue = 0;
    double total_penalties = 0;
    double total_outage_s = 0;
    double kpi_violation_s = 0;
    long reconfig_ops = 0;
};

std::string compare_csv_text(const std::vector<CompareRow>& rows);

CompareRow compare_row(Policy policy, const MetricsReport& report);

void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace sliceshift

#include "sliceshift/report.hpp"

#include <charconv>
#include <fstream>

#include "json.hpp"

namespace sliceshift {

std::string fmt_num(double v) {
    if (v == 0) return "0"; // avoid "-0"
    char buf[48];
    auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    return std::string(buf, r.ptr);
}

std::string summary_json_text(const std::string& scenario_id, std::uint64_t seed, Policy policy,
                              const MetricsReport& report) {
    nlohmann::ordered_json doc;
    doc["scenario"] = scenario_id;
    doc["seed"] = seed;
    doc["policy"] = to_string(policy);
    doc["total_revenue"] = report.total_revenue;
    doc["total_penalties"] = report.total_penalties;
    nlohmann::ordered_json services = nlohmann::ordered_json::array();
    for (const auto& [sid, m] : report.per_service) {
        nlohmann::ordered_json s;
        s["id"] = sid;
        s["level_seconds"] = m.level_seconds;
        s["outage_s"] = m.outage_s;
        s["secondary_fraction"] = m.secondary_fraction;
        s["sla_ok"] = m.sla_ok;
        services.push_back(std::move(s));
    }
    doc["per_service"] = std::move(services);
    return doc.dump(2) + "\n";
}

std::string events_log_text(const RunResult& result) {
    std::string out;
    for (const auto& line : result.event_log) {
        out += line;
        out += "\n";
    }
    return out;
}

std::string timeseries_csv_text(const RunResult& result) {
    std::string out = "t,service,level,outage,node_util_max,link_util_max\n";
    for (const auto& row : result.timeseries) {
        out += fmt_num(row.t) + "," + row.service + "," + std::to_string(row.level) + "," +
               (row.outage ? "1" : "0") + "," + fmt_num(row.node_util_max) + "," +
               fmt_num(row.link_util_max) + "\n";
    }
    return out;
}

CompareRow compare_row(Policy policy, const MetricsReport& report) {
    CompareRow row;
    row.policy = policy;
    row.total_revenue = report.total_revenue;
    row.total_penalties = report.total_penalties;
    row.reconfig_ops = report.reconfig_ops;
    for (const auto& [sid, m] : report.per_service) {
        row.total_outage_s += m.outage_s;
        row.kpi_violation_s += m.kpi_violation_s;
    }
    return row;
}

std::string compare_csv_text(const std::vector<CompareRow>& rows) {
    std::string out = "policy,total_revenue,total_penalties,total_outage_s,kpi_violation_s,"
                      "reconfig_ops\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.policy)) + "," + fmt_num(r.total_revenue) + "," +
               fmt_num(r.total_penalties) + "," + fmt_num(r.total_outage_s) + "," +
               fmt_num(r.kpi_violation_s) + "," + std::to_string(r.reconfig_ops) + "\n";
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise("IoError", "cannot write " + path.string());
    out << text;
    if (!out) raise("IoError", "failed writing " + path.string());
}

} // namespace sliceshift

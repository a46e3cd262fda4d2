#include "sliceshift/cli.hpp"

#include <iostream>

#include "sliceshift/report.hpp"
#include "sliceshift/scenario.hpp"
#include "sliceshift/simengine.hpp"

namespace sliceshift {

namespace {

int run_one(const std::filesystem::path& scenario_path, std::uint64_t seed, Policy policy,
            const std::filesystem::path& out_dir, std::optional<double> duration_override,
            RunResult* result_out) {
    Scenario scenario;
    try {
        scenario = parse_scenario(scenario_path);
        if (duration_override) {
            if (*duration_override <= 0) raise("ParseError", "duration override must be positive");
            scenario.duration_s = *duration_override;
        }
    } catch (const Error& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    }

    RunResult result;
    try {
        result = run_scenario(scenario, seed, policy);
    } catch (const Error& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 2;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    try {
        write_text_file(out_dir / "summary.json",
                        summary_json_text(scenario.id, seed, policy, result.report));
        write_text_file(out_dir / "events.log", events_log_text(result));
        write_text_file(out_dir / "timeseries.csv", timeseries_csv_text(result));
    } catch (const Error& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 2;
    }
    if (result_out) *result_out = std::move(result);
    return 0;
}

} // namespace

int cmd_simulate(const std::filesystem::path& scenario_path, std::uint64_t seed, Policy policy,
                 const std::filesystem::path& out_dir, std::optional<double> duration_override) {
    return run_one(scenario_path, seed, policy, out_dir, duration_override, nullptr);
}

int cmd_compare(const std::filesystem::path& scenario_path, std::uint64_t seed,
                const std::vector<Policy>& policies, const std::filesystem::path& out_dir,
                std::optional<double> duration_override) {
    if (policies.size() < 2) {
        std::cerr << "usage error: compare needs at least two policies\n";
        return 2;
    }
    std::vector<CompareRow> rows;
    for (Policy policy : policies) {
        RunResult result;
        const int rc = run_one(scenario_path, seed, policy, out_dir / to_string(policy),
                               duration_override, &result);
        if (rc != 0) return rc;
        rows.push_back(compare_row(policy, result.report));
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    try {
        write_text_file(out_dir / "compare.csv", compare_csv_text(rows));
    } catch (const Error& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace sliceshift

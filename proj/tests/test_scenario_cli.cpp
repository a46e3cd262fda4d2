#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sliceshift/cli.hpp"
#include "sliceshift/report.hpp"
#include "sliceshift/scenario.hpp"
#include "sliceshift/simengine.hpp"
#include "support/builders.hpp"
#include "support/logparse.hpp"

using namespace sliceshift;
using namespace testsupport;

namespace {

std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(SLICESHIFT_FIXTURES_DIR) / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

TEST_CASE("bundled fixtures parse and encode the expected services") {
    auto sensor = load_fixture("sensor_monitoring.json");
    REQUIRE(sensor.services.size() == 1);
    const auto& svc = sensor.services[0];
    CHECK(svc.graph(0).vnfs.size() == 4);
    CHECK(svc.graph(1).vnfs.size() == 3);
    CHECK(shared_vnfs(svc.graph(0), svc.graph(1)).size() == 3);

    auto seethrough = load_fixture("see_through.json");
    const auto& st = seethrough.services[0];
    CHECK(shared_vnfs(st.graph(0), st.graph(1)).empty()); // disjoint pipelines

    auto disaster = load_fixture("disaster.json");
    CHECK(disaster.services.size() == 3);
    CHECK(disaster.events.size() == 6);
}

TEST_CASE("strict schema: unknown keys are rejected with their path") {
    nlohmann::json doc = nlohmann::json::parse(slurp(fixture_path("sensor_monitoring.json")));
    doc["services"][0]["foo"] = 1;
    try {
        parse_scenario_json(doc, "x");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == "ParseError");
        CHECK(std::string(e.what()).find("services[0]/foo") != std::string::npos);
    }

    nlohmann::json doc2 = nlohmann::json::parse(slurp(fixture_path("sensor_monitoring.json")));
    doc2["infrastructure"]["nodes"][0]["color"] = "red";
    CHECK(error_code_of([&] { parse_scenario_json(doc2, "x"); }) == "ParseError");
}

TEST_CASE("scenario validation failures carry their source path") {
    nlohmann::json doc = nlohmann::json::parse(slurp(fixture_path("sensor_monitoring.json")));
    doc["services"][0]["graphs"][1]["utility"] = 99; // breaks monotonicity
    try {
        parse_scenario_json(doc, "x");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == "ParseError");
        CHECK(std::string(e.what()).find("NonMonotoneUtility") != std::string::npos);
    }
}

TEST_CASE("round-trip: emit then parse reproduces every bundled fixture") {
    for (const char* name :
         {"sensor_monitoring.json", "see_through.json", "disaster.json"}) {
        auto original = load_fixture(name);
        auto emitted = emit_scenario(original);
        auto reparsed = parse_scenario_json(emitted, original.id);
        auto emitted_again = emit_scenario(reparsed);
        CHECK(emitted.dump(2) == emitted_again.dump(2));
        CHECK(reparsed.services.size() == original.services.size());
        CHECK(reparsed.duration_s == original.duration_s);
    }
}

TEST_CASE("cmd_simulate writes the three artifacts") {
    const auto out = std::filesystem::temp_directory_path() / "sliceshift_test_sim";
    std::filesystem::remove_all(out);
    const int rc = cmd_simulate(fixture_path("sensor_monitoring.json"), 1, Policy::payoff, out);
    REQUIRE(rc == 0);
    REQUIRE(std::filesystem::exists(out / "summary.json"));
    REQUIRE(std::filesystem::exists(out / "events.log"));
    REQUIRE(std::filesystem::exists(out / "timeseries.csv"));

    SUBCASE("summary keys match the documented schema") {
        auto doc = nlohmann::json::parse(slurp(out / "summary.json"));
        for (const char* key : {"scenario", "seed", "policy", "total_revenue", "total_penalties",
                                "per_service"})
            CHECK(doc.contains(key));
        CHECK(doc["scenario"] == "sensor_monitoring");
        for (const auto& s : doc["per_service"])
            for (const char* key :
                 {"id", "level_seconds", "outage_s", "secondary_fraction", "sla_ok"})
                CHECK(s.contains(key));
    }

    SUBCASE("summary is recomputable from the event log alone") {
        auto doc = nlohmann::json::parse(slurp(out / "summary.json"));
        std::vector<std::string> lines;
        std::istringstream in(slurp(out / "events.log"));
        for (std::string line; std::getline(in, line);)
            if (!line.empty()) lines.push_back(line);
        auto records = logparse::parse_log(lines);

        // Replay the accounting state machine: level changes come from
        // placed/apply records, outage spans from outage_begin/outage_end.
        std::map<std::string, double> outage, mark;
        std::map<std::string, std::vector<double>> level_seconds;
        std::map<std::string, int> level;
        std::map<std::string, bool> in_outage;
        auto flush = [&](const std::string& sid, double t) {
            const double span = t - mark[sid];
            if (span > 0) {
                if (in_outage[sid])
                    outage[sid] += span;
                else {
                    auto& buckets = level_seconds[sid];
                    if (buckets.size() <= static_cast<std::size_t>(level[sid]))
                        buckets.resize(level[sid] + 1, 0.0);
                    buckets[level[sid]] += span;
                }
            }
            mark[sid] = t;
        };
        double end_t = 0;
        for (const auto& r : records) {
            end_t = r.t;
            if (r.kind == "placed") {
                level[r.subject] = 0;
                mark[r.subject] = r.t;
            } else if (r.kind == "apply" && r.detail.count("level")) {
                flush(r.subject, r.t);
                if (r.detail.at("level") != "none")
                    level[r.subject] = std::stoi(r.detail.at("level"));
            } else if (r.kind == "outage_begin") {
                flush(r.subject, r.t);
                in_outage[r.subject] = true;
            } else if (r.kind == "outage_end") {
                flush(r.subject, r.t);
                in_outage[r.subject] = false;
            }
        }
        for (auto& [sid, lv] : level) flush(sid, end_t);

        for (const auto& s : doc["per_service"]) {
            const std::string sid = s["id"];
            CHECK(outage[sid] == doctest::Approx(s["outage_s"].get<double>()).epsilon(1e-4));
            const auto reported = s["level_seconds"].get<std::vector<double>>();
            auto& replayed = level_seconds[sid];
            replayed.resize(reported.size(), 0.0);
            for (std::size_t i = 0; i < reported.size(); ++i)
                CHECK(replayed[i] == doctest::Approx(reported[i]).epsilon(1e-4));
        }
    }

    SUBCASE("timeseries header is the documented contract") {
        std::istringstream in(slurp(out / "timeseries.csv"));
        std::string header;
        std::getline(in, header);
        CHECK(header == "t,service,level,outage,node_util_max,link_util_max");
    }
}

TEST_CASE("cmd_simulate error paths exit with code 2") {
    const auto out = std::filesystem::temp_directory_path() / "sliceshift_test_err";
    CHECK(cmd_simulate("no/such/file.json", 1, Policy::payoff, out) == 2);
    CHECK(cmd_simulate(fixture_path("sensor_monitoring.json"), 1, Policy::payoff,
                       "/proc/sliceshift_not_writable/out") == 2);
}

TEST_CASE("cmd_compare") {
    const auto out = std::filesystem::temp_directory_path() / "sliceshift_test_cmp";
    std::filesystem::remove_all(out);

    SUBCASE("fewer than two policies is a usage error") {
        CHECK(cmd_compare(fixture_path("see_through.json"), 1, {Policy::payoff}, out) == 2);
    }
    SUBCASE("rows follow the input policy order and share the seed") {
        const int rc = cmd_compare(
            fixture_path("see_through.json"), 1,
            {Policy::payoff, Policy::qoe, Policy::reaction, Policy::scale_only}, out);
        REQUIRE(rc == 0);
        std::istringstream in(slurp(out / "compare.csv"));
        std::string line;
        std::getline(in, line);
        CHECK(line ==
              "policy,total_revenue,total_penalties,total_outage_s,kpi_violation_s,reconfig_ops");
        std::vector<std::string> rows;
        while (std::getline(in, line))
            if (!line.empty()) rows.push_back(line);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].substr(0, 7) == "payoff,");
        CHECK(rows[1].substr(0, 4) == "qoe,");
        CHECK(rows[2].substr(0, 9) == "reaction,");
        CHECK(rows[3].substr(0, 11) == "scale_only,");
        for (const char* policy : {"payoff", "qoe", "reaction", "scale_only"}) {
            auto doc = nlohmann::json::parse(slurp(out / policy / "summary.json"));
            CHECK(doc["seed"] == 1);
        }
    }
    SUBCASE("shifting beats scale-only on the shortage fixture") {
        REQUIRE(cmd_compare(fixture_path("see_through.json"), 1,
                            {Policy::payoff, Policy::scale_only}, out) == 0);
        std::istringstream in(slurp(out / "compare.csv"));
        std::string header, payoff_row, scale_row;
        std::getline(in, header);
        std::getline(in, payoff_row);
        std::getline(in, scale_row);
        auto payoff_fields = logparse::split(payoff_row, ',');
        auto scale_fields = logparse::split(scale_row, ',');
        CHECK(std::stod(payoff_fields[4]) < std::stod(scale_fields[4])); // kpi_violation_s
        CHECK(std::stod(payoff_fields[1]) > std::stod(scale_fields[1])); // revenue
    }
}

TEST_CASE("CSV numbers use six significant digits") {
    CHECK(fmt_num(0) == "0");
    CHECK(fmt_num(1234.56789) == "1234.57");
    CHECK(fmt_num(0.000123456789) == "0.000123457");
    CHECK(fmt_num(3600) == "3600");
    CHECK(fmt_num(-2.5) == "-2.5");
}

TEST_CASE("duration override shortens the run") {
    auto scenario = load_fixture("sensor_monitoring.json");
    const auto out = std::filesystem::temp_directory_path() / "sliceshift_test_override";
    std::filesystem::remove_all(out);
    REQUIRE(cmd_simulate(fixture_path("sensor_monitoring.json"), 1, Policy::payoff, out, 400.0) ==
            0);
    auto doc = nlohmann::json::parse(slurp(out / "summary.json"));
    double total = 0;
    for (const auto& s : doc["per_service"]) {
        total = 0;
        for (double v : s["level_seconds"].get<std::vector<double>>()) total += v;
        total += s["outage_s"].get<double>();
    }
    CHECK(total == doctest::Approx(400.0));
}

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "sliceshift/delays.hpp"
#include "sliceshift/monitor.hpp"
#include "sliceshift/servicemodel.hpp"
#include "sliceshift/topology.hpp"

namespace sliceshift {

struct ScenarioEvent {
    enum class Kind { fail, recover, load };
    double t = 0;
    Kind kind = Kind::fail;
    std::string subject; // element id, or service id for load
    double factor = 1.0; // load only
};

struct Scenario {
    std::string id;
    std::vector<ComputeNode> nodes;
    std::vector<NetLink> links;
    std::vector<ServiceSpec> services; // validated
    std::map<std::string, std::vector<AlertRule>> alert_rules; // per service descriptor
    std::vector<ScenarioEvent> events;
    DelayConfig delays;
    double sampling_period_s = 5;
    double duration_s = 0;
};

// Strict-schema scenario codec: any unknown key anywhere is a ParseError
// naming the offending path. All inner validation errors surface with the
// file location attached.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_json(const nlohmann::json& doc, const std::string& scenario_id);

// Inverse writer; parse_scenario_json(emit_scenario(s)) == s for every
// valid scenario.
nlohmann::ordered_json emit_scenario(const Scenario& scenario);

} // namespace sliceshift

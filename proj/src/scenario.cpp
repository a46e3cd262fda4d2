#include "sliceshift/scenario.hpp"

#include <fstream>
#include <set>

namespace sliceshift {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    raise("ParseError", path + ": " + what);
}

void expect_keys(const json& obj, const std::string& path,
                 const std::set<std::string>& required, const std::set<std::string>& optional) {
    if (!obj.is_object()) parse_fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!required.count(key) && !optional.count(key))
            parse_fail(path + "/" + key, "unknown key");
    }
    for (const auto& key : required)
        if (!obj.contains(key)) parse_fail(path, "missing key '" + key + "'");
}

double num(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number()) parse_fail(path + "/" + key, "expected a number");
    return v.get<double>();
}

long integer(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) parse_fail(path + "/" + key, "expected an integer");
    return v.get<long>();
}

std::string str(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_string()) parse_fail(path + "/" + key, "expected a string");
    std::string s = v.get<std::string>();
    if (s.find(',') != std::string::npos || s.find(';') != std::string::npos)
        parse_fail(path + "/" + key, "identifiers must not contain ',' or ';'");
    return s;
}

const json& array(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_array()) parse_fail(path + "/" + key, "expected an array");
    return v;
}

DelayRange delay_range(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        parse_fail(path, "expected [lo, hi]");
    DelayRange r{v[0].get<double>(), v[1].get<double>()};
    if (r.lo < 0 || r.hi < r.lo) parse_fail(path, "need 0 <= lo <= hi");
    return r;
}

AlertRule parse_rule(const json& obj, const std::string& path) {
    expect_keys(obj, path, {"id", "source", "subject", "fire"},
                {"clear", "sustain", "aggregate", "window_s"});
    AlertRule rule;
    rule.rule_id = str(obj, path, "id");
    rule.source = source_kind_from_string(str(obj, path, "source"));
    rule.subject = str(obj, path, "subject");
    rule.fire_threshold = num(obj, path, "fire");
    rule.clear_threshold =
        obj.contains("clear") ? num(obj, path, "clear") : 0.8 * rule.fire_threshold;
    rule.sustain_samples =
        obj.contains("sustain") ? static_cast<int>(integer(obj, path, "sustain")) : 3;
    if (obj.contains("aggregate")) {
        const std::string agg = str(obj, path, "aggregate");
        if (agg == "instant")
            rule.aggregate = Aggregate::instant;
        else if (agg == "sliding_mean")
            rule.aggregate = Aggregate::sliding_mean;
        else
            parse_fail(path + "/aggregate", "expected 'instant' or 'sliding_mean'");
    }
    if (rule.aggregate == Aggregate::sliding_mean) {
        if (!obj.contains("window_s")) parse_fail(path, "sliding_mean needs window_s");
        rule.window_s = num(obj, path, "window_s");
    } else if (obj.contains("window_s")) {
        parse_fail(path + "/window_s", "window_s only applies to sliding_mean");
    }
    return rule;
}

} // namespace

Scenario parse_scenario_json(const json& doc, const std::string& scenario_id) {
    Scenario sc;
    sc.id = scenario_id;
    expect_keys(doc, "", {"infrastructure", "services", "events", "duration_s"},
                {"delays", "monitor"});

    const json& infra = doc.at("infrastructure");
    expect_keys(infra, "infrastructure", {"nodes", "links"}, {});
    for (std::size_t i = 0; i < array(infra, "infrastructure", "nodes").size(); ++i) {
        const std::string path = "infrastructure/nodes[" + std::to_string(i) + "]";
        const json& n = infra.at("nodes")[i];
        expect_keys(n, path, {"id", "cpu", "mem"}, {});
        ComputeNode node;
        node.id = str(n, path, "id");
        node.cpu_capacity = num(n, path, "cpu");
        node.mem_capacity = num(n, path, "mem");
        sc.nodes.push_back(std::move(node));
    }
    for (std::size_t i = 0; i < array(infra, "infrastructure", "links").size(); ++i) {
        const std::string path = "infrastructure/links[" + std::to_string(i) + "]";
        const json& l = infra.at("links")[i];
        expect_keys(l, path, {"id", "a", "b", "bw", "latency_ms"}, {});
        NetLink link;
        link.id = str(l, path, "id");
        link.node_a = str(l, path, "a");
        link.node_b = str(l, path, "b");
        link.bandwidth_capacity = num(l, path, "bw");
        link.latency_ms = num(l, path, "latency_ms");
        sc.links.push_back(std::move(link));
    }

    for (std::size_t i = 0; i < array(doc, "", "services").size(); ++i) {
        const std::string path = "services[" + std::to_string(i) + "]";
        const json& s = doc.at("services")[i];
        expect_keys(s, path,
                    {"id", "vertical", "priority", "popularity", "sla", "vnfs", "graphs"},
                    {"alert_rules"});
        ServiceSpec spec;
        spec.service_id = str(s, path, "id");
        spec.vertical_id = str(s, path, "vertical");
        spec.sla.priority = static_cast<int>(integer(s, path, "priority"));
        spec.popularity = integer(s, path, "popularity");
        if (spec.popularity <= 0) parse_fail(path + "/popularity", "must be positive");

        const json& sla = s.at("sla");
        const std::string sla_path = path + "/sla";
        expect_keys(sla, sla_path,
                    {"max_secondary_fraction", "window_s", "violation_penalty",
                     "outage_penalty_rate"},
                    {});
        spec.sla.max_secondary_fraction = num(sla, sla_path, "max_secondary_fraction");
        if (spec.sla.max_secondary_fraction < 0 || spec.sla.max_secondary_fraction > 1)
            parse_fail(sla_path + "/max_secondary_fraction", "must lie in [0, 1]");
        spec.sla.window_s = num(sla, sla_path, "window_s");
        if (spec.sla.window_s <= 0) parse_fail(sla_path + "/window_s", "must be positive");
        const json& vp = sla.at("violation_penalty");
        if (vp.is_string()) {
            if (vp.get<std::string>() != "SAFETY")
                parse_fail(sla_path + "/violation_penalty", "expected a number or \"SAFETY\"");
            spec.sla.violation_penalty.safety = true;
        } else if (vp.is_number()) {
            spec.sla.violation_penalty.amount = vp.get<double>();
            if (spec.sla.violation_penalty.amount < 0)
                parse_fail(sla_path + "/violation_penalty", "must be >= 0");
        } else {
            parse_fail(sla_path + "/violation_penalty", "expected a number or \"SAFETY\"");
        }
        spec.sla.outage_penalty_rate = num(sla, sla_path, "outage_penalty_rate");
        if (spec.sla.outage_penalty_rate < 0)
            parse_fail(sla_path + "/outage_penalty_rate", "must be >= 0");

        for (std::size_t j = 0; j < array(s, path, "vnfs").size(); ++j) {
            const std::string vpath = path + "/vnfs[" + std::to_string(j) + "]";
            const json& v = s.at("vnfs")[j];
            expect_keys(v, vpath, {"id", "cpu", "mem", "proc_ms"}, {});
            VnfDescriptor d;
            d.vnf_id = str(v, vpath, "id");
            d.cpu_demand = num(v, vpath, "cpu");
            d.mem_demand = num(v, vpath, "mem");
            d.proc_delay_ms = num(v, vpath, "proc_ms");
            spec.vnf_catalog.push_back(std::move(d));
        }

        for (std::size_t j = 0; j < array(s, path, "graphs").size(); ++j) {
            const std::string gpath = path + "/graphs[" + std::to_string(j) + "]";
            const json& g = s.at("graphs")[j];
            expect_keys(g, gpath,
                        {"level", "utility", "revenue_per_h", "kpi_max_delay_ms", "vnfs",
                         "vlinks"},
                        {});
            VnfGraph graph;
            graph.level = static_cast<int>(integer(g, gpath, "level"));
            graph.utility = num(g, gpath, "utility");
            graph.revenue_per_hour = num(g, gpath, "revenue_per_h");
            graph.kpi_max_delay_ms = num(g, gpath, "kpi_max_delay_ms");
            for (const auto& v : array(g, gpath, "vnfs")) {
                if (!v.is_string()) parse_fail(gpath + "/vnfs", "expected vnf id strings");
                graph.vnfs.push_back(v.get<std::string>());
            }
            for (std::size_t k = 0; k < array(g, gpath, "vlinks").size(); ++k) {
                const std::string lpath = gpath + "/vlinks[" + std::to_string(k) + "]";
                const json& e = g.at("vlinks")[k];
                expect_keys(e, lpath, {"src", "dst", "bw"}, {});
                VLink vl;
                vl.src = str(e, lpath, "src");
                vl.dst = str(e, lpath, "dst");
                vl.bw_demand = num(e, lpath, "bw");
                graph.vlinks.push_back(std::move(vl));
            }
            spec.graphs.push_back(std::move(graph));
        }

        std::vector<AlertRule> rules;
        if (s.contains("alert_rules")) {
            for (std::size_t j = 0; j < array(s, path, "alert_rules").size(); ++j)
                rules.push_back(parse_rule(s.at("alert_rules")[j],
                                           path + "/alert_rules[" + std::to_string(j) + "]"));
        }

        try {
            spec = validate_service(std::move(spec));
        } catch (const Error& e) {
            parse_fail(path, e.what());
        }
        sc.alert_rules[spec.service_id] = std::move(rules);
        sc.services.push_back(std::move(spec));
    }

    for (std::size_t i = 0; i < array(doc, "", "events").size(); ++i) {
        const std::string path = "events[" + std::to_string(i) + "]";
        const json& e = doc.at("events")[i];
        expect_keys(e, path, {"t", "kind", "args"}, {});
        ScenarioEvent ev;
        ev.t = num(e, path, "t");
        if (ev.t < 0) parse_fail(path + "/t", "must be >= 0");
        const std::string kind = str(e, path, "kind");
        const json& args = e.at("args");
        if (kind == "fail" || kind == "recover") {
            ev.kind = kind == "fail" ? ScenarioEvent::Kind::fail : ScenarioEvent::Kind::recover;
            expect_keys(args, path + "/args", {"id"}, {});
            ev.subject = str(args, path + "/args", "id");
        } else if (kind == "load") {
            ev.kind = ScenarioEvent::Kind::load;
            expect_keys(args, path + "/args", {"service", "factor"}, {});
            ev.subject = str(args, path + "/args", "service");
            ev.factor = num(args, path + "/args", "factor");
            if (ev.factor <= 0) parse_fail(path + "/args/factor", "must be positive");
        } else {
            parse_fail(path + "/kind", "expected fail, recover or load");
        }
        sc.events.push_back(std::move(ev));
    }

    if (doc.contains("delays")) {
        const json& d = doc.at("delays");
        expect_keys(d, "delays", {},
                    {"vnf_instantiate", "vnf_teardown", "vm_migrate", "route_update"});
        if (d.contains("vnf_instantiate"))
            sc.delays.vnf_instantiate = delay_range(d.at("vnf_instantiate"),
                                                    "delays/vnf_instantiate");
        if (d.contains("vnf_teardown"))
            sc.delays.vnf_teardown = delay_range(d.at("vnf_teardown"), "delays/vnf_teardown");
        if (d.contains("vm_migrate"))
            sc.delays.vm_migrate = delay_range(d.at("vm_migrate"), "delays/vm_migrate");
        if (d.contains("route_update"))
            sc.delays.route_update = delay_range(d.at("route_update"), "delays/route_update");
    }
    if (doc.contains("monitor")) {
        const json& m = doc.at("monitor");
        expect_keys(m, "monitor", {"sampling_period_s"}, {});
        sc.sampling_period_s = num(m, "monitor", "sampling_period_s");
        if (sc.sampling_period_s <= 0) parse_fail("monitor/sampling_period_s", "must be positive");
    }
    sc.duration_s = num(doc, "", "duration_s");
    if (sc.duration_s <= 0) parse_fail("duration_s", "must be positive");

    // Cross-references: every id in events and rules must resolve.
    std::set<std::string> element_ids, service_ids;
    for (const auto& n : sc.nodes) element_ids.insert(n.id);
    for (const auto& l : sc.links) element_ids.insert(l.id);
    for (const auto& s : sc.services) service_ids.insert(s.service_id);
    // Validates duplicate/endpoint constraints up front.
    build_infrastructure(sc.nodes, sc.links);
    for (std::size_t i = 0; i < sc.events.size(); ++i) {
        const ScenarioEvent& ev = sc.events[i];
        const std::string path = "events[" + std::to_string(i) + "]";
        if (ev.kind == ScenarioEvent::Kind::load) {
            if (!service_ids.count(ev.subject)) parse_fail(path, "unknown service " + ev.subject);
        } else if (!element_ids.count(ev.subject)) {
            parse_fail(path, "unknown element " + ev.subject);
        }
    }
    for (const auto& [sid, rules] : sc.alert_rules)
        for (const auto& r : rules) {
            if (r.subject == "*") continue;
            const bool is_service =
                r.source == SourceKind::service_delay || r.source == SourceKind::app_custom;
            if (is_service && !service_ids.count(r.subject))
                parse_fail("alert rule " + r.rule_id, "unknown service " + r.subject);
            if (!is_service && !element_ids.count(r.subject))
                parse_fail("alert rule " + r.rule_id, "unknown element " + r.subject);
        }
    return sc;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise("ParseError", "cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        raise("ParseError", path.string() + ": " + e.what());
    }
    return parse_scenario_json(doc, path.stem().string());
}

nlohmann::ordered_json emit_scenario(const Scenario& sc) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : sc.nodes)
        nodes.push_back({{"id", n.id}, {"cpu", n.cpu_capacity}, {"mem", n.mem_capacity}});
    nlohmann::ordered_json links = nlohmann::ordered_json::array();
    for (const auto& l : sc.links)
        links.push_back({{"id", l.id},
                         {"a", l.node_a},
                         {"b", l.node_b},
                         {"bw", l.bandwidth_capacity},
                         {"latency_ms", l.latency_ms}});
    doc["infrastructure"] = {{"nodes", nodes}, {"links", links}};

    nlohmann::ordered_json services = nlohmann::ordered_json::array();
    for (const auto& s : sc.services) {
        nlohmann::ordered_json svc;
        svc["id"] = s.service_id;
        svc["vertical"] = s.vertical_id;
        svc["priority"] = s.sla.priority;
        svc["popularity"] = s.popularity;
        svc["sla"] = {{"max_secondary_fraction", s.sla.max_secondary_fraction},
                      {"window_s", s.sla.window_s},
                      {"violation_penalty",
                       s.sla.violation_penalty.safety
                           ? nlohmann::ordered_json("SAFETY")
                           : nlohmann::ordered_json(s.sla.violation_penalty.amount)},
                      {"outage_penalty_rate", s.sla.outage_penalty_rate}};
        nlohmann::ordered_json vnfs = nlohmann::ordered_json::array();
        for (const auto& d : s.vnf_catalog)
            vnfs.push_back({{"id", d.vnf_id},
                            {"cpu", d.cpu_demand},
                            {"mem", d.mem_demand},
                            {"proc_ms", d.proc_delay_ms}});
        svc["vnfs"] = std::move(vnfs);
        nlohmann::ordered_json graphs = nlohmann::ordered_json::array();
        for (const auto& g : s.graphs) {
            nlohmann::ordered_json vlinks = nlohmann::ordered_json::array();
            for (const auto& e : g.vlinks)
                vlinks.push_back({{"src", e.src}, {"dst", e.dst}, {"bw", e.bw_demand}});
            graphs.push_back({{"level", g.level},
                              {"utility", g.utility},
                              {"revenue_per_h", g.revenue_per_hour},
                              {"kpi_max_delay_ms", g.kpi_max_delay_ms},
                              {"vnfs", g.vnfs},
                              {"vlinks", std::move(vlinks)}});
        }
        svc["graphs"] = std::move(graphs);
        auto rules_it = sc.alert_rules.find(s.service_id);
        if (rules_it != sc.alert_rules.end() && !rules_it->second.empty()) {
            nlohmann::ordered_json rules = nlohmann::ordered_json::array();
            for (const auto& r : rules_it->second) {
                nlohmann::ordered_json rule;
                rule["id"] = r.rule_id;
                rule["source"] = to_string(r.source);
                rule["subject"] = r.subject;
                rule["fire"] = r.fire_threshold;
                rule["clear"] = r.clear_threshold;
                rule["sustain"] = r.sustain_samples;
                rule["aggregate"] =
                    r.aggregate == Aggregate::instant ? "instant" : "sliding_mean";
                if (r.aggregate == Aggregate::sliding_mean) rule["window_s"] = r.window_s;
                rules.push_back(std::move(rule));
            }
            svc["alert_rules"] = std::move(rules);
        }
        services.push_back(std::move(svc));
    }
    doc["services"] = std::move(services);

    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto& ev : sc.events) {
        nlohmann::ordered_json e;
        e["t"] = ev.t;
        switch (ev.kind) {
        case ScenarioEvent::Kind::fail:
            e["kind"] = "fail";
            e["args"] = {{"id", ev.subject}};
            break;
        case ScenarioEvent::Kind::recover:
            e["kind"] = "recover";
            e["args"] = {{"id", ev.subject}};
            break;
        case ScenarioEvent::Kind::load:
            e["kind"] = "load";
            e["args"] = {{"service", ev.subject}, {"factor", ev.factor}};
            break;
        }
        events.push_back(std::move(e));
    }
    doc["events"] = std::move(events);
    doc["delays"] = {
        {"vnf_instantiate",
         {sc.delays.vnf_instantiate.lo, sc.delays.vnf_instantiate.hi}},
        {"vnf_teardown", {sc.delays.vnf_teardown.lo, sc.delays.vnf_teardown.hi}},
        {"vm_migrate", {sc.delays.vm_migrate.lo, sc.delays.vm_migrate.hi}},
        {"route_update", {sc.delays.route_update.lo, sc.delays.route_update.hi}},
    };
    doc["monitor"] = {{"sampling_period_s", sc.sampling_period_s}};
    doc["duration_s"] = sc.duration_s;
    return doc;
}

} // namespace sliceshift

#include "doctest.h"

#include <algorithm>

#include "sliceshift/decision.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace sliceshift;
using namespace testsupport;

namespace {

ServiceSpec sensor_like(const std::string& id = "sensor") {
    return service(id, "factory", 1, 500,
                   {vnfd("acquire", 1, 1, 5), vnfd("threshold-check", 1, 1, 5),
                    vnfd("predictor", 2, 2, 10), vnfd("alarm", 1, 1, 5)},
                   {graph(0, 10, 10, 200, {"acquire", "threshold-check", "predictor", "alarm"},
                          {vl("acquire", "threshold-check", 5), vl("threshold-check", "predictor", 5),
                           vl("predictor", "alarm", 2), vl("threshold-check", "alarm", 2)}),
                    graph(1, 5, 6, 200, {"acquire", "threshold-check", "alarm"},
                          {vl("acquire", "threshold-check", 5), vl("threshold-check", "alarm", 2)})});
}

ServiceSpec stream_like(const std::string& id = "stream") {
    return service(id, "auto", 1, 2000,
                   {vnfd("v1", 2, 2, 5), vnfd("v2", 2, 2, 5), vnfd("c1", 1, 1, 5),
                    vnfd("c2", 1, 1, 5)},
                   {graph(0, 10, 20, 200, {"v1", "v2"}, {vl("v1", "v2", 50)}),
                    graph(1, 3, 8, 200, {"c1", "c2"}, {vl("c1", "c2", 2)})});
}

Infrastructure ring4() {
    return build_infrastructure(
        {node("q1", 3, 16), node("q2", 3, 16), node("q3", 3, 16), node("q4", 3, 16)},
        {link("r12", "q1", "q2", 100, 2), link("r23", "q2", "q3", 100, 2),
         link("r34", "q3", "q4", 100, 2), link("r41", "q4", "q1", 100, 2)});
}

struct RealPlanner : PlannerIface {
    const ResourcePlanner& rp;
    SplitMix64 rng{99};
    explicit RealPlanner(const ResourcePlanner& rp_in) : rp(rp_in) {}
    PlanResult try_plan(const std::string& service, int from, int to, bool with_ripple) override {
        SplitMix64 probe = rng;
        if (with_ripple) return rp.plan_with_ripple(service, from, to, probe);
        if (from == kNotDeployedLevel) return rp.plan_deploy(service, to, probe);
        return rp.plan_transition(service, from, to, probe);
    }
};

ShortageAssessment fake_assessment(std::set<std::string> affected) {
    ShortageAssessment a;
    a.triggering.emplace_back(Consumer::resource_layer, Alert{"r", "x", 0, true});
    a.affected_services = std::move(affected);
    return a;
}

} // namespace

TEST_CASE("detect_shortage maps alerts to affected services") {
    auto spec = sensor_like();
    auto infra = ring4();
    auto active = initial_deployments({spec}, infra);
    std::vector<AlertRule> rules;
    AlertRule cpu_rule;
    cpu_rule.rule_id = "cpu";
    cpu_rule.source = SourceKind::node_cpu;
    rules.push_back(cpu_rule);
    std::map<std::string, bool> status{{"q1", true}, {"q2", true}, {"q3", true}, {"q4", true}};

    SUBCASE("no alerts, empty assessment") {
        auto a = detect_shortage({}, active, status, rules);
        CHECK(a.empty());
        CHECK(a.affected_services.empty());
    }
    SUBCASE("node alert maps to hosted services") {
        const std::string host = active.at("sensor").placement.vnf_map.at("acquire");
        std::vector<std::pair<Consumer, Alert>> notes{
            {Consumer::resource_layer, Alert{"cpu", host, 10, true}}};
        auto a = detect_shortage(notes, active, status, rules);
        CHECK(a.affected_services == std::set<std::string>{"sensor"});
    }
    SUBCASE("an alerted node hosting two services affects both") {
        auto other = sensor_like("sensor2");
        auto both = initial_deployments({spec, other}, infra);
        // Find a node hosting VNFs from both services.
        std::string shared_node;
        for (const auto& [v1, n1] : both.at("sensor").placement.vnf_map)
            for (const auto& [v2, n2] : both.at("sensor2").placement.vnf_map)
                if (n1 == n2) shared_node = n1;
        REQUIRE_FALSE(shared_node.empty());
        std::vector<std::pair<Consumer, Alert>> notes{
            {Consumer::resource_layer, Alert{"cpu", shared_node, 10, true}}};
        auto a = detect_shortage(notes, both, status, rules);
        CHECK(a.affected_services == std::set<std::string>{"sensor", "sensor2"});
    }
}

TEST_CASE("count_reconfig_ops") {
    SUBCASE("identity plan is zero") {
        TransitionPlan plan;
        CHECK(count_reconfig_ops(plan) == 0);
    }
    SUBCASE("A,B,C to A,D diff equals six, plus one per ripple migration") {
        // Chain A->B->C across three 2-cpu nodes; secondary A->D.
        auto spec = service("s", "v", 1, 10,
                            {vnfd("A", 2, 1, 1), vnfd("B", 2, 1, 1), vnfd("C", 2, 1, 1),
                             vnfd("D", 2, 1, 1)},
                            {graph(0, 10, 10, 200, {"A", "B", "C"},
                                   {vl("A", "B", 5), vl("B", "C", 5)}),
                             graph(1, 5, 5, 200, {"A", "D"}, {vl("A", "D", 5)})});
        auto infra = build_infrastructure(
            {node("n1", 2, 8), node("n2", 2, 8), node("n3", 2, 8), node("n4", 2, 8)},
            {link("l12", "n1", "n2", 100, 2), link("l23", "n2", "n3", 100, 2),
             link("l34", "n3", "n4", 100, 2), link("l41", "n4", "n1", 100, 2)});
        auto active = initial_deployments({spec}, infra);
        ResourcePlanner planner(infra, active, {{"s", spec}}, DelayConfig{}, 2);
        SplitMix64 rng(1);
        auto plan = planner.plan_transition("s", 0, 1, rng);
        REQUIRE(plan.ok());
        CHECK(plan.plan->removals.size() == 2);        // B, C
        CHECK(plan.plan->instantiations.size() == 1);  // D
        CHECK(plan.plan->route_removals.size() == 2);  // A>B, B>C
        CHECK(plan.plan->route_additions.size() == 1); // A>D
        CHECK(count_reconfig_ops(*plan.plan) == 6);

        const int diff = oracles::graph_diff_ops(
            spec.graph(0), spec.graph(1), active.at("s").placement, plan.plan->target_placement,
            static_cast<int>(plan.plan->ripple_migrations.size()));
        CHECK(count_reconfig_ops(*plan.plan) == diff);

        plan.plan->ripple_migrations.push_back({"x", "f", "n1", "n2"});
        CHECK(count_reconfig_ops(*plan.plan) == 7);
    }
}

TEST_CASE("plan_transition") {
    auto spec = sensor_like();
    auto infra = ring4();
    auto active = initial_deployments({spec}, infra);
    ServiceCatalog catalog{{"sensor", spec}};
    ResourcePlanner planner(infra, active, catalog, DelayConfig{}, 2);
    SplitMix64 rng(1);

    SUBCASE("same level over an intact placement is the empty plan") {
        auto plan = planner.plan_transition("sensor", 0, 0, rng);
        REQUIRE(plan.ok());
        CHECK(plan.plan->empty());
        CHECK(plan.plan->total_duration_s == 0);
    }
    SUBCASE("subset shift-down removes only the extra VNF") {
        auto plan = planner.plan_transition("sensor", 0, 1, rng);
        REQUIRE(plan.ok());
        CHECK(plan.plan->removals == std::vector<std::string>{"predictor"});
        CHECK(plan.plan->instantiations.empty());
        CHECK(plan.plan->ripple_migrations.empty());

        // Shared VNFs appear in neither removals nor instantiations, and
        // they keep their nodes.
        auto shared = shared_vnfs(spec.graph(0), spec.graph(1));
        for (const auto& v : shared) {
            CHECK(std::find(plan.plan->removals.begin(), plan.plan->removals.end(), v) ==
                  plan.plan->removals.end());
            CHECK(plan.plan->target_placement.vnf_map.at(v) ==
                  active.at("sensor").placement.vnf_map.at(v));
        }
    }
    SUBCASE("disjoint shift-down swaps everything") {
        auto st = stream_like();
        auto both = initial_deployments({st}, infra);
        ServiceCatalog cat2{{"stream", st}};
        ResourcePlanner p2(infra, both, cat2, DelayConfig{}, 2);
        auto plan = p2.plan_transition("stream", 0, 1, rng);
        REQUIRE(plan.ok());
        CHECK(plan.plan->removals == std::vector<std::string>{"v1", "v2"});
        REQUIRE(plan.plan->instantiations.size() == 2);
        CHECK(plan.plan->instantiations[0].first == "c1");
        CHECK(plan.plan->instantiations[1].first == "c2");
    }
    SUBCASE("timeline phases respect break-before-make") {
        auto plan = planner.plan_transition("sensor", 1, 0, rng);
        // Moving up instantiates the predictor and adds its routes.
        if (plan.ok() && !plan.plan->actions.empty()) {
            double teardown_end = 0, inst_start = 1e18;
            for (const auto& a : plan.plan->actions) {
                if (a.kind == ActionKind::vnf_teardown)
                    teardown_end = std::max(teardown_end, a.start_s + a.duration_s);
                if (a.kind == ActionKind::vnf_instantiate)
                    inst_start = std::min(inst_start, a.start_s);
            }
            if (inst_start < 1e18) CHECK(inst_start >= teardown_end - 1e-9);
        }
    }
}

TEST_CASE("select_shift_down policies") {
    auto infra = ring4();

    SUBCASE("payoff picks the smallest revenue loss") {
        // s1 loses 10/h by shifting, s2 loses 4/h.
        auto s1 = service("s1", "v", 1, 100, {vnfd("f", 1)},
                          {graph(0, 10, 20, 100, {"f"}, {}), graph(1, 5, 10, 100, {"f"}, {})});
        auto s2 = service("s2", "w", 1, 100, {vnfd("f", 1)},
                          {graph(0, 10, 9, 100, {"f"}, {}), graph(1, 5, 5, 100, {"f"}, {})});
        ServiceCatalog catalog{{"s1", s1}, {"s2", s2}};
        auto active = initial_deployments({s1, s2}, infra);
        ResourcePlanner rp(infra, active, catalog, DelayConfig{}, 2);
        RealPlanner planner(rp);
        SlaState sla;
        auto out = select_shift_down({Policy::payoff, 2, 120}, fake_assessment({"s1", "s2"}),
                                     catalog, sla, {{"s1", 0}, {"s2", 0}}, {}, 100, 120, planner);
        REQUIRE(out.decision.has_value());
        CHECK(out.decision->service_id == "s2");
        CHECK(out.decision->from_level == 0);
        CHECK(out.decision->to_level == 1);
        // Policy-argmin audit over the candidate keys.
        for (const auto& [sid, key] : out.candidate_keys)
            CHECK(key >= (sid == "s2" ? 4.0 : 4.0) - 1e-12);
    }
    SUBCASE("qoe picks the least popular") {
        auto s1 = service("s1", "v", 1, 1000, {vnfd("f", 1)},
                          {graph(0, 10, 10, 100, {"f"}, {}), graph(1, 5, 5, 100, {"f"}, {})});
        auto s2 = service("s2", "w", 1, 50, {vnfd("f", 1)},
                          {graph(0, 10, 10, 100, {"f"}, {}), graph(1, 5, 5, 100, {"f"}, {})});
        ServiceCatalog catalog{{"s1", s1}, {"s2", s2}};
        auto active = initial_deployments({s1, s2}, infra);
        ResourcePlanner rp(infra, active, catalog, DelayConfig{}, 2);
        RealPlanner planner(rp);
        SlaState sla;
        auto out = select_shift_down({Policy::qoe, 2, 120}, fake_assessment({"s1", "s2"}), catalog,
                                     sla, {{"s1", 0}, {"s2", 0}}, {}, 100, 120, planner);
        REQUIRE(out.decision.has_value());
        CHECK(out.decision->service_id == "s2");
    }
    SUBCASE("reaction prefers the shared-VNF family; keys match the graph diff") {
        auto sensor = sensor_like();
        auto stream = stream_like();
        ServiceCatalog catalog{{"sensor", sensor}, {"stream", stream}};
        auto active = initial_deployments({sensor, stream}, infra);
        ResourcePlanner rp(infra, active, catalog, DelayConfig{}, 2);
        RealPlanner planner(rp);
        SlaState sla;
        auto out = select_shift_down({Policy::reaction, 2, 120},
                                     fake_assessment({"sensor", "stream"}), catalog, sla,
                                     {{"sensor", 0}, {"stream", 0}}, {}, 100, 120, planner);
        REQUIRE(out.decision.has_value());
        CHECK(out.decision->service_id == "sensor");

        // Each candidate's key equals the independent graph-diff count.
        for (const auto& [sid, key] : out.candidate_keys) {
            const ServiceSpec& spec = catalog.at(sid);
            SplitMix64 probe(7);
            auto plan = rp.plan_transition(sid, 0, 1, probe);
            REQUIRE(plan.ok());
            const int diff = oracles::graph_diff_ops(
                spec.graph(0), spec.graph(1), active.at(sid).placement,
                plan.plan->target_placement,
                static_cast<int>(plan.plan->ripple_migrations.size()));
            CHECK(key == doctest::Approx(diff));
        }
    }
    SUBCASE("SLA-denied candidates are skipped; NoCandidate when none remain") {
        auto s1 = service("s1", "v", 1, 100, {vnfd("f", 1)},
                          {graph(0, 10, 10, 100, {"f"}, {}), graph(1, 5, 5, 100, {"f"}, {})},
                          0.0); // zero budget: always denied
        ServiceCatalog catalog{{"s1", s1}};
        auto active = initial_deployments({s1}, infra);
        ResourcePlanner rp(infra, active, catalog, DelayConfig{}, 2);
        RealPlanner planner(rp);
        SlaState sla;
        auto out = select_shift_down({Policy::payoff, 2, 120}, fake_assessment({"s1"}), catalog,
                                     sla, {{"s1", 0}}, {}, 100, 120, planner);
        CHECK_FALSE(out.decision.has_value());
        CHECK(out.candidate_keys.empty());
    }
}

TEST_CASE("resolve_ripple") {
    // n1 holds foreign f_small(1) + f_big(3) + own bp(2); shifting bb to its
    // secondary needs 3 cpu, one short after bp leaves.
    auto aa = service("aa", "v", 1, 10, {vnfd("f_small", 1, 1), vnfd("f_big", 3, 1)},
                      {graph(0, 10, 10, 1000, {"f_small", "f_big"}, {})});
    auto bb = service("bb", "w", 1, 10, {vnfd("bp", 2, 1), vnfd("bs", 3, 1)},
                      {graph(0, 10, 10, 1000, {"bp"}, {}), graph(1, 5, 5, 1000, {"bs"}, {})});
    auto infra = build_infrastructure({node("n1", 6, 16), node("n2", 1, 16)},
                                      {link("l12", "n1", "n2", 100, 2)});
    ServiceCatalog catalog{{"aa", aa}, {"bb", bb}};

    std::map<std::string, Deployment> active;
    {
        Placement pa;
        pa.graph_level = 0;
        pa.vnf_map = {{"f_small", "n1"}, {"f_big", "n1"}};
        active["aa"] = make_deployment(aa, 0, pa);
        Placement pb;
        pb.graph_level = 0;
        pb.vnf_map = {{"bp", "n1"}};
        active["bb"] = make_deployment(bb, 0, pb);
    }
    ResourcePlanner planner(infra, active, catalog, DelayConfig{}, 2);
    SplitMix64 rng(3);

    SUBCASE("direct plan fails, one migration resolves it") {
        auto direct = planner.plan_transition("bb", 0, 1, rng);
        CHECK_FALSE(direct.ok());
        auto plan = planner.resolve_ripple("bb", 0, 1, 2, rng);
        REQUIRE(plan.ok());
        REQUIRE(plan.plan->ripple_migrations.size() == 1);
        CHECK(plan.plan->ripple_migrations[0].vnf_id == "f_small"); // smallest demand first
        CHECK(plan.plan->ripple_migrations[0].to_node == "n2");
        CHECK(count_reconfig_ops(*plan.plan) == 3); // remove bp, instantiate bs, migrate
    }
    SUBCASE("depth 0 is immediately exhausted") {
        auto plan = planner.resolve_ripple("bb", 0, 1, 0, rng);
        CHECK_FALSE(plan.ok());
        CHECK(plan.fail_reason == "RippleExhausted");
    }
    SUBCASE("migration count matches the exhaustive subset minimum") {
        auto plan = planner.resolve_ripple("bb", 0, 1, 2, rng);
        REQUIRE(plan.ok());

        // Oracle: try every subset of candidate relocations, smallest first.
        std::vector<oracles::MigrationCandidate> candidates = {
            {"aa", "f_small", "n2"}, {"aa", "f_big", "n2"}};
        auto feasible_with = [&](const std::vector<oracles::MigrationCandidate>& subset) {
            auto world = active;
            std::map<std::string, double> used{{"n1", 0.0}, {"n2", 0.0}};
            for (const auto& [sid, dep] : world)
                for (const auto& [v, host] : dep.placement.vnf_map)
                    used[host] += dep.effective_cpu(v);
            for (const auto& m : subset) {
                auto& dep = world.at(m.service_id);
                used[dep.placement.vnf_map.at(m.vnf_id)] -= dep.effective_cpu(m.vnf_id);
                used[m.to_node] += dep.effective_cpu(m.vnf_id);
                dep.placement.vnf_map[m.vnf_id] = m.to_node;
            }
            if (used["n2"] > 1 + 1e-9) return false; // relocations must fit
            // bb's secondary (3 cpu) must fit somewhere after bp leaves.
            used["n1"] -= 2;
            return 6 - used["n1"] >= 3 - 1e-9 || 1 - used["n2"] >= 3 - 1e-9;
        };
        auto minimum = oracles::min_migration_subset(candidates, feasible_with);
        REQUIRE(minimum.has_value());
        CHECK(plan.plan->ripple_migrations.size() == *minimum);
    }
}

TEST_CASE("choose_sla_violation") {
    SUBCASE("argmin excludes SAFETY") {
        std::vector<ViolationCandidate> cs = {{"s1", {false, 100}},
                                              {"s2", {true, 0}},
                                              {"s3", {false, 40}}};
        CHECK(choose_sla_violation(cs) == "s3");
    }
    SUBCASE("all SAFETY falls back to lexicographic order") {
        std::vector<ViolationCandidate> cs = {{"zeta", {true, 0}}, {"alpha", {true, 0}}};
        CHECK(choose_sla_violation(cs) == "alpha");
    }
    SUBCASE("single candidate wins by default") {
        std::vector<ViolationCandidate> cs = {{"only", {false, 9}}};
        CHECK(choose_sla_violation(cs) == "only");
    }
    SUBCASE("empty set is an error") {
        CHECK(error_code_of([] { choose_sla_violation({}); }) == "NoServices");
    }
}

namespace {

// Planner stub for the layering seam: the service layer sees only plan
// summaries, never residual capacities or infrastructure objects.
struct CannedPlanner : PlannerIface {
    std::map<std::string, bool> feasible;
    int calls = 0;
    PlanResult try_plan(const std::string& service, int from, int to, bool) override {
        ++calls;
        TransitionPlan plan;
        plan.service_id = service;
        plan.from_level = from;
        plan.to_level = to;
        if (feasible.count(service) && !feasible.at(service))
            return PlanResult{std::nullopt, "PlanFailed", ""};
        return PlanResult{std::move(plan), "", ""};
    }
};

} // namespace

TEST_CASE("consider_shift_up") {
    auto s1 = service("s1", "v", 1, 10, {vnfd("f", 1)},
                      {graph(0, 10, 16, 100, {"f"}, {}), graph(1, 5, 10, 100, {"f"}, {})});
    auto s2 = service("s2", "w", 1, 10, {vnfd("f", 1)},
                      {graph(0, 10, 12, 100, {"f"}, {}), graph(1, 5, 10, 100, {"f"}, {})});
    ServiceCatalog catalog{{"s1", s1}, {"s2", s2}};
    CannedPlanner planner;

    SUBCASE("nothing shifted, nothing to do") {
        SlaState sla;
        auto ups = consider_shift_up(catalog, sla, {{"s1", 0}, {"s2", 0}}, 1000, 120, planner);
        CHECK(ups.empty());
        CHECK(planner.calls == 0);
    }
    SUBCASE("dwell time gates the shift") {
        SlaState sla;
        sla.record("s1").level_since = 940; // only 60 s at level 1
        auto ups = consider_shift_up(catalog, sla, {{"s1", 1}, {"s2", 0}}, 1000, 120, planner);
        CHECK(ups.empty());
    }
    SUBCASE("largest revenue gain leads the list") {
        SlaState sla;
        sla.record("s1").level_since = 0; // gain 6
        sla.record("s2").level_since = 0; // gain 2
        auto ups = consider_shift_up(catalog, sla, {{"s1", 1}, {"s2", 1}}, 1000, 120, planner);
        REQUIRE(ups.size() == 2);
        CHECK(ups[0].service_id == "s1");
        CHECK_FALSE(ups[0].down);
        CHECK(ups[0].to_level == 0);
    }
    SUBCASE("infeasible trial drops the candidate") {
        SlaState sla;
        sla.record("s1").level_since = 0;
        sla.record("s2").level_since = 0;
        planner.feasible["s1"] = false;
        auto ups = consider_shift_up(catalog, sla, {{"s1", 1}, {"s2", 1}}, 1000, 120, planner);
        REQUIRE(ups.size() == 1);
        CHECK(ups[0].service_id == "s2");
    }
    SUBCASE("return to primary waits for higher-priority same-vertical peers") {
        auto lo = service("lo", "e", 1, 10, {vnfd("f", 1)},
                          {graph(0, 10, 12, 100, {"f"}, {}), graph(1, 5, 10, 100, {"f"}, {})});
        auto hi = service("hi", "e", 2, 10, {vnfd("f", 1)},
                          {graph(0, 10, 12, 100, {"f"}, {}), graph(1, 5, 10, 100, {"f"}, {})});
        ServiceCatalog cat2{{"lo", lo}, {"hi", hi}};
        SlaState sla;
        sla.record("lo").level_since = 0;
        sla.record("hi").level_since = 0;
        CannedPlanner p2;
        // Both at level 1: only the higher-priority service may return first.
        auto ups = consider_shift_up(cat2, sla, {{"lo", 1}, {"hi", 1}}, 1000, 120, p2);
        REQUIRE(ups.size() == 1);
        CHECK(ups[0].service_id == "hi");
    }
}

TEST_CASE("service layer runs against a planner stub with no resource inputs") {
    // Structural check of the layering: these calls receive no
    // Infrastructure and no CapacityView, only service-level data plus the
    // planning interface.
    auto s1 = service("s1", "v", 1, 100, {vnfd("f", 1)},
                      {graph(0, 10, 10, 100, {"f"}, {}), graph(1, 5, 4, 100, {"f"}, {})});
    auto s2 = service("s2", "w", 1, 100, {vnfd("f", 1)},
                      {graph(0, 10, 10, 100, {"f"}, {}), graph(1, 5, 9, 100, {"f"}, {})});
    ServiceCatalog catalog{{"s1", s1}, {"s2", s2}};
    SlaState sla;
    CannedPlanner planner;

    auto out = select_shift_down({Policy::payoff, 2, 120}, fake_assessment({"s1", "s2"}), catalog,
                                 sla, {{"s1", 0}, {"s2", 0}}, {}, 100, 120, planner);
    REQUIRE(out.decision.has_value());
    CHECK(out.decision->service_id == "s2"); // loss 1 < loss 6
    CHECK(out.candidate_keys.size() == 2);
}

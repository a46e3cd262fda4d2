#include "sliceshift/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sliceshift/report.hpp"

namespace sliceshift {

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::ElementFail: return "fail";
    case EventKind::ElementRecover: return "recover";
    case EventKind::LoadChange: return "load";
    case EventKind::EnactmentComplete: return "enact";
    case EventKind::MetricTick: return "tick";
    case EventKind::DecisionEpoch: return "epoch";
    case EventKind::End: return "end";
    }
    return "?";
}

namespace {

// Sentinel utilization reported for down elements; any threshold fires.
constexpr double kDownUtil = 999.0;

struct EventOrder {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.at != b.at) return a.at > b.at;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

std::string join_keys(const std::vector<std::pair<std::string, double>>& keys,
                      const std::map<std::string, int>& levels) {
    std::string out;
    for (const auto& [id, key] : keys) {
        if (!out.empty()) out += "|";
        out += id + ":" + std::to_string(levels.at(id)) + ":" +
               (std::isinf(key) ? "inf" : fmt_num(key));
    }
    return out;
}

} // namespace

// PlannerIface adapter: trials draw from a throwaway copy of the engine
// generator so that unenacted plans never disturb the event stream.
struct SimEngine::Planner : PlannerIface {
    const ResourcePlanner& rp;
    SplitMix64 snapshot;

    Planner(const ResourcePlanner& rp_in, const SplitMix64& rng) : rp(rp_in), snapshot(rng) {}

    PlanResult try_plan(const std::string& service, int from_level, int to_level,
                        bool with_ripple) override {
        SplitMix64 probe = snapshot;
        if (with_ripple) return rp.plan_with_ripple(service, from_level, to_level, probe);
        if (from_level == kNotDeployedLevel) return rp.plan_deploy(service, to_level, probe);
        return rp.plan_transition(service, from_level, to_level, probe);
    }
};

SimEngine::SimEngine(Scenario scenario, std::uint64_t seed, const EngineConfig& config)
    : scenario_(std::move(scenario)), config_(config), rng_(seed) {
    infra_ = build_infrastructure(scenario_.nodes, scenario_.links);
    for (const auto& svc : scenario_.services) catalog_[svc.service_id] = svc;

    std::vector<AlertRule> rules;
    for (const auto& [sid, svc_rules] : scenario_.alert_rules)
        rules.insert(rules.end(), svc_rules.begin(), svc_rules.end());
    monitor_.configure_rules(std::move(rules));

    // Initial deployment: every service's primary graph on the pristine
    // infrastructure, in service-id order.
    std::vector<Deployment> placed;
    for (const auto& [sid, spec] : catalog_) {
        CapacityView residual = residual_capacity(infra_, placed);
        PlaceResult r = place_graph(spec.graph(0), spec, infra_, residual);
        if (!r.ok())
            raise("ScenarioInfeasibleAtStart",
                  sid + ": cannot place " + r.infeasible_item + " of the primary graph");
        Deployment dep = make_deployment(spec, 0, r.outcome->placement);
        placed.push_back(dep);
        active_[sid] = std::move(dep);

        ServiceState st;
        st.level = 0;
        states_[sid] = st;
        sla_.record(sid).current_level = 0;
        sla_.record(sid).level_since = 0;
        log(0, "placed", sid, "level=0");
    }

    for (const auto& ev : scenario_.events) {
        switch (ev.kind) {
        case ScenarioEvent::Kind::fail:
            schedule(ev.t, EventKind::ElementFail, ev.subject);
            break;
        case ScenarioEvent::Kind::recover:
            schedule(ev.t, EventKind::ElementRecover, ev.subject);
            break;
        case ScenarioEvent::Kind::load:
            schedule(ev.t, EventKind::LoadChange, ev.subject, ev.factor);
            break;
        }
    }
    schedule(0, EventKind::MetricTick, "periodic");
    schedule(0, EventKind::DecisionEpoch, "periodic");
    schedule(scenario_.duration_s, EventKind::End);
}

void SimEngine::schedule(double at, EventKind kind, std::string subject, double value,
                         long action_id) {
    SimEvent ev;
    ev.at = at;
    ev.kind = kind;
    ev.subject = std::move(subject);
    ev.value = value;
    ev.action_id = action_id;
    ev.seq = next_seq_++;
    queue_.push_back(std::move(ev));
    std::push_heap(queue_.begin(), queue_.end(), EventOrder{});
}

void SimEngine::step() {
    if (queue_.empty()) raise("EmptyQueue", "no pending events");
    std::pop_heap(queue_.begin(), queue_.end(), EventOrder{});
    SimEvent ev = std::move(queue_.back());
    queue_.pop_back();
    now_ = ev.at;
    handle(ev);
}

void SimEngine::handle(const SimEvent& ev) {
    switch (ev.kind) {
    case EventKind::ElementFail:
    case EventKind::ElementRecover: {
        const bool up = ev.kind == EventKind::ElementRecover;
        apply_status_change(infra_, ev.subject, up);
        log(now_, up ? "recover" : "fail", ev.subject, "");
        if (config_.policy.policy == Policy::scale_only) update_scale_only_bandwidth();
        refresh_service_states();
        schedule(now_, EventKind::MetricTick, "event");
        break;
    }
    case EventKind::LoadChange: {
        auto st = states_.find(ev.subject);
        if (st == states_.end()) raise("UnknownElement", "load change for " + ev.subject);
        st->second.load_factor = ev.value;
        auto dep = active_.find(ev.subject);
        if (dep != active_.end()) dep->second.load_factor = ev.value;
        log(now_, "load", ev.subject, "factor=" + fmt_num(ev.value));
        if (config_.policy.policy == Policy::scale_only) update_scale_only_bandwidth();
        refresh_service_states();
        schedule(now_, EventKind::MetricTick, "event");
        break;
    }
    case EventKind::EnactmentComplete:
        handle_enactment_complete(ev.action_id);
        break;
    case EventKind::MetricTick:
        handle_metric_tick(ev);
        break;
    case EventKind::DecisionEpoch:
        handle_decision_epoch(ev);
        break;
    case EventKind::End: {
        for (auto& [sid, st] : states_) {
            mark_accounting(sid, now_);
            if (st.kpi_bad) {
                catalog_metrics_[sid].kpi_violation_s += now_ - st.kpi_mark;
                st.kpi_mark = now_;
            }
        }
        log(now_, "end", "", "");
        finished_ = true;
        break;
    }
    }
}

void SimEngine::handle_metric_tick(const SimEvent& ev) {
    if (ev.subject == "periodic" && now_ + scenario_.sampling_period_s <= scenario_.duration_s)
        schedule(now_ + scenario_.sampling_period_s, EventKind::MetricTick, "periodic");
    if (now_ == last_tick_) return; // a tick already sampled this instant
    last_tick_ = now_;

    emit_truth_samples();
    std::vector<Alert> alerts = monitor_.evaluate_rules(now_);
    for (const auto& a : alerts)
        log(now_, "alert", a.subject,
            "rule=" + a.rule_id + ";dir=" + (a.raised ? "raised" : "cleared"));

    bool any_raised = false;
    auto deliveries = dispatch(alerts, config_.subscriptions, monitor_.rules());
    for (const auto& [consumer, alert] : deliveries) {
        log(now_, "dispatch", alert.subject,
            "rule=" + alert.rule_id + ";consumer=" + to_string(consumer) + ";dir=" +
                (alert.raised ? "raised" : "cleared"));
        if (alert.raised) any_raised = true;
    }
    if (any_raised && last_epoch_scheduled_ != now_) {
        last_epoch_scheduled_ = now_;
        schedule(now_, EventKind::DecisionEpoch, "alert");
    }

    refresh_service_states();

    const auto node_util = node_utilization();
    const auto link_util = link_utilization();
    double max_node = 0, max_link = 0;
    for (const auto& [id, u] : node_util) max_node = std::max(max_node, u);
    for (const auto& [id, u] : link_util) max_link = std::max(max_link, u);
    for (const auto& [sid, st] : states_) {
        TimeseriesRow row;
        row.t = now_;
        row.service = sid;
        row.level = (st.in_transition || st.level == kNotDeployedLevel) ? -1 : st.level;
        row.outage = st.outage;
        row.node_util_max = max_node;
        row.link_util_max = max_link;
        timeseries_.push_back(std::move(row));
    }
}

std::map<std::string, double> SimEngine::node_utilization() const {
    std::map<std::string, double> demand;
    for (const auto& [sid, dep] : active_)
        for (const auto& [vnf, node] : dep.placement.vnf_map) demand[node] += dep.effective_cpu(vnf);
    std::map<std::string, double> util;
    for (const auto& [id, n] : infra_.nodes())
        util[id] = n.up ? demand[id] / n.cpu_capacity : kDownUtil;
    return util;
}

std::map<std::string, double> SimEngine::link_utilization() const {
    std::map<std::string, double> demand;
    for (const auto& [sid, dep] : active_)
        for (const auto& [vlink, path] : dep.placement.route_map)
            for (const auto& link_id : path) demand[link_id] += dep.effective_bw(vlink);
    std::map<std::string, double> util;
    for (const auto& [id, l] : infra_.links())
        util[id] = l.up ? demand[id] / l.bandwidth_capacity : kDownUtil;
    return util;
}

double SimEngine::reported_delay(const std::string& service, const Deployment& dep) const {
    const ServiceSpec& spec = catalog_.at(service);
    const VnfGraph& graph = spec.graph(dep.level);
    const double base = evaluate_kpis(dep.placement, graph, spec, infra_).end_to_end_delay_ms;

    // Contention inflates the delivered delay: a broken element makes the
    // service effectively unreachable, an oversubscribed one slows it down
    // proportionally, and scaled-down bandwidth reservations stretch it.
    bool down = false;
    double worst = 1.0;
    const auto node_util = node_utilization();
    const auto link_util = link_utilization();
    for (const auto& [vnf, node] : dep.placement.vnf_map) {
        const double u = node_util.at(node);
        if (u >= kDownUtil) down = true;
        worst = std::max(worst, u);
    }
    for (const auto& [vlink, path] : dep.placement.route_map)
        for (const auto& link_id : path) {
            const double u = link_util.at(link_id);
            if (u >= kDownUtil) down = true;
            worst = std::max(worst, u);
        }
    if (down) return base * 1000.0 + 1e6;
    if (dep.bw_scale < 1.0) worst = std::max(worst, 1.0 / dep.bw_scale);
    return base * worst;
}

void SimEngine::emit_truth_samples() {
    for (const auto& [id, u] : node_utilization())
        monitor_.ingest_sample({SourceKind::node_cpu, id, u, now_});
    std::map<std::string, double> mem_demand;
    for (const auto& [sid, dep] : active_)
        for (const auto& [vnf, node] : dep.placement.vnf_map)
            mem_demand[node] += dep.effective_mem(vnf);
    for (const auto& [id, n] : infra_.nodes())
        monitor_.ingest_sample({SourceKind::node_mem, id,
                                n.up ? mem_demand[id] / n.mem_capacity : kDownUtil, now_});
    for (const auto& [id, u] : link_utilization())
        monitor_.ingest_sample({SourceKind::link_util, id, u, now_});
    for (const auto& [sid, dep] : active_) {
        monitor_.ingest_sample({SourceKind::service_delay, sid, reported_delay(sid, dep), now_});
        monitor_.ingest_sample({SourceKind::app_custom, sid, dep.load_factor, now_});
    }
}

std::set<std::string> SimEngine::broken_services() const {
    FeasibilityReport feas = check_feasible(deployments_vector(), infra_);
    std::set<std::string> bad_elements;
    for (const auto& v : feas.violations) bad_elements.insert(v.element_id);

    std::set<std::string> broken;
    for (const auto& [sid, dep] : active_) {
        bool hit = false;
        for (const auto& [vnf, node] : dep.placement.vnf_map)
            if (bad_elements.count(node)) hit = true;
        for (const auto& [vlink, path] : dep.placement.route_map)
            for (const auto& link_id : path)
                if (bad_elements.count(link_id)) hit = true;
        if (hit) broken.insert(sid);
    }
    return broken;
}

void SimEngine::refresh_service_states() {
    const std::set<std::string> broken = broken_services();
    for (auto& [sid, st] : states_) {
        bool outage_now;
        if (st.in_transition || st.level == kNotDeployedLevel) {
            outage_now = true;
        } else {
            const bool delay_alert = monitor_.is_raised(SourceKind::service_delay, sid);
            outage_now = broken.count(sid) != 0 || delay_alert;
        }
        if (outage_now != st.outage) {
            st.outage = outage_now;
            log(now_, outage_now ? "outage_begin" : "outage_end", sid, "");
            set_entry(sid, outage_now ? kOutageEntry : st.level, now_);
        }

        const bool scaled = active_.count(sid) && active_.at(sid).bw_scale < 1.0;
        const bool kpi_bad_now = st.outage || st.degraded_migration || scaled ||
                                 (!st.in_transition && st.level != kNotDeployedLevel &&
                                  broken.count(sid) != 0);
        if (kpi_bad_now != st.kpi_bad) {
            if (st.kpi_bad) catalog_metrics_[sid].kpi_violation_s += now_ - st.kpi_mark;
            st.kpi_mark = now_;
            st.kpi_bad = kpi_bad_now;
        }
    }
}

void SimEngine::mark_accounting(const std::string& service, double t) {
    ServiceState& st = states_.at(service);
    if (t < st.last_mark) return;
    const ServiceSpec& spec = catalog_.at(service);
    if (t > st.last_mark) {
        record_interval(sla_, service, st.accounting_entry, st.last_mark, t, spec.sla.window_s);
        ServiceMetrics& m = catalog_metrics_[service];
        if (m.level_seconds.size() < spec.graphs.size()) m.level_seconds.resize(spec.graphs.size());
        if (st.accounting_entry == kOutageEntry)
            m.outage_s += t - st.last_mark;
        else
            m.level_seconds[static_cast<std::size_t>(st.accounting_entry)] += t - st.last_mark;
        st.last_mark = t;
    }
    // Track the peak rolling-window secondary share as it stood at t.
    ServiceMetrics& m = catalog_metrics_[service];
    const double frac =
        secondary_seconds_in_window(sla_, service, t, spec.sla.window_s) / spec.sla.window_s;
    m.max_window_fraction = std::max(m.max_window_fraction, frac);
}

void SimEngine::set_entry(const std::string& service, int entry, double t) {
    mark_accounting(service, t);
    states_.at(service).accounting_entry = entry;
}

double SimEngine::current_window_secondary(const std::string& service, double now) const {
    const ServiceSpec& spec = catalog_.at(service);
    double used = secondary_seconds_in_window(sla_, service, now, spec.sla.window_s);
    const ServiceState& st = states_.at(service);
    if (st.accounting_entry > 0) {
        const double t0 = std::max(st.last_mark, now - spec.sla.window_s);
        if (now > t0) used += now - t0;
    }
    return used;
}

void SimEngine::update_scale_only_bandwidth() {
    // Proportionally shrink bandwidth reservations so that no up link stays
    // oversubscribed; affected services run degraded instead of failing.
    for (auto& [sid, dep] : active_) dep.bw_scale = 1.0;
    std::map<std::string, double> demand;
    for (const auto& [sid, dep] : active_)
        for (const auto& [vlink, path] : dep.placement.route_map)
            for (const auto& link_id : path) demand[link_id] += dep.effective_bw(vlink);
    std::map<std::string, double> factor;
    for (const auto& [link_id, total] : demand) {
        const NetLink& l = infra_.link(link_id);
        if (l.up && total > l.bandwidth_capacity + kCapacityTolerance)
            factor[link_id] = l.bandwidth_capacity / total;
    }
    if (factor.empty()) return;
    for (auto& [sid, dep] : active_) {
        double scale = 1.0;
        for (const auto& [vlink, path] : dep.placement.route_map)
            for (const auto& link_id : path) {
                auto it = factor.find(link_id);
                if (it != factor.end()) scale = std::min(scale, it->second);
            }
        dep.bw_scale = scale;
    }
}

std::map<std::string, int> SimEngine::level_map() const {
    std::map<std::string, int> levels;
    for (const auto& [sid, st] : states_)
        levels[sid] = st.level;
    return levels;
}

std::map<std::string, double> SimEngine::load_factor_map() const {
    std::map<std::string, double> loads;
    for (const auto& [sid, st] : states_) loads[sid] = st.load_factor;
    return loads;
}

std::map<std::string, bool> SimEngine::element_status_map() const {
    std::map<std::string, bool> status;
    for (const auto& [id, n] : infra_.nodes()) status[id] = n.up;
    for (const auto& [id, l] : infra_.links()) status[id] = l.up;
    return status;
}

std::vector<Deployment> SimEngine::deployments_vector() const {
    std::vector<Deployment> deps;
    for (const auto& [sid, dep] : active_) deps.push_back(dep);
    return deps;
}


// --- Decision epoch ----------------------------------------------------------

void SimEngine::handle_decision_epoch(const SimEvent& ev) {
    if (ev.subject == "periodic" && now_ + config_.epoch_period_s <= scenario_.duration_s)
        schedule(now_ + config_.epoch_period_s, EventKind::DecisionEpoch, "periodic");
    if (in_flight_) return; // one enactment at a time

    // Bring the SLA accounting up to the decision instant.
    for (const auto& [sid, st] : states_) mark_accounting(sid, now_);

    ResourcePlanner planner(infra_, active_, catalog_, scenario_.delays,
                            config_.policy.ripple_depth_limit, load_factor_map());
    Planner iface(planner, rng_);

    if (epoch_try_budget_enforcement(planner)) return;

    auto notifications =
        dispatch(monitor_.standing_alerts(), config_.subscriptions, monitor_.rules());
    ShortageAssessment assessment =
        detect_shortage(notifications, active_, element_status_map(), monitor_.rules());

    if (!assessment.empty()) {
        if (epoch_try_repair(assessment, planner)) return;
        if (config_.policy.policy == Policy::scale_only) {
            if (epoch_try_forced(assessment, planner)) return;
        } else {
            if (epoch_try_shift_down(assessment, planner, iface)) return;
            if (epoch_try_violation(assessment, planner)) return;
        }
    }
    epoch_try_shift_up(planner, iface);
}

bool SimEngine::epoch_try_budget_enforcement(const ResourcePlanner& planner) {
    for (const auto& [sid, spec] : catalog_) {
        const ServiceState& st = states_.at(sid);
        if (st.level == kNotDeployedLevel || st.level <= 0) continue;
        if (spec.sla.max_secondary_fraction >= 1.0 - kSlaTimeTolerance) continue;
        const double budget = spec.sla.max_secondary_fraction * spec.sla.window_s;
        if (current_window_secondary(sid, now_) + kSlaTimeTolerance < budget) continue;

        // The budget is exhausted: return to the primary graph now, or
        // suspend the service when the primary cannot be placed or a
        // higher-priority same-vertical peer has not recovered yet.
        bool primary_blocked = false;
        for (const auto& [peer_id, peer] : catalog_) {
            if (peer_id == sid || peer.vertical_id != spec.vertical_id) continue;
            if (peer.sla.priority <= spec.sla.priority) continue;
            if (states_.at(peer_id).level != 0) primary_blocked = true;
        }
        if (!primary_blocked) {
            SplitMix64 probe = rng_;
            PlanResult up = planner.plan_with_ripple(sid, st.level, 0, probe);
            if (up.ok()) {
                log(now_, "decision", sid,
                    "action=up;from=" + std::to_string(st.level) + ";to=0;reason=sla_budget");
                start_plan(std::move(*up.plan), "up");
                return true;
            }
        }
        SplitMix64 probe = rng_;
        PlanResult down = planner.plan_undeploy(sid, probe);
        if (down.ok()) {
            log(now_, "decision", sid,
                "action=undeploy;from=" + std::to_string(st.level) + ";reason=sla_budget");
            start_plan(std::move(*down.plan), "undeploy");
            return true;
        }
    }
    return false;
}

bool SimEngine::epoch_try_repair(const ShortageAssessment& assessment,
                                 const ResourcePlanner& planner) {
    const std::set<std::string> broken = broken_services();
    for (const auto& sid : assessment.affected_services) {
        if (!broken.count(sid)) continue;
        const ServiceState& st = states_.at(sid);
        if (st.level == kNotDeployedLevel || st.in_transition) continue;
        SplitMix64 probe = rng_;
        PlanResult repair = planner.plan_with_ripple(sid, st.level, st.level, probe);
        if (!repair.ok() || repair.plan->empty()) continue;
        log(now_, "decision", sid,
            "action=repair;level=" + std::to_string(st.level) +
                ";ops=" + std::to_string(count_reconfig_ops(*repair.plan)));
        start_plan(std::move(*repair.plan), "repair");
        return true;
    }
    return false;
}

bool SimEngine::epoch_try_shift_down(const ShortageAssessment& assessment,
                                     const ResourcePlanner& planner, Planner& iface) {
    // Anything still in outage after repair attempts justifies shifting.
    bool shortage = false;
    for (const auto& sid : assessment.affected_services) {
        auto st = states_.find(sid);
        if (st != states_.end() && st->second.outage) shortage = true;
    }
    if (!shortage) return false;

    std::set<std::string> excluded;
    while (true) {
        SelectOutcome sel =
            select_shift_down(config_.policy, assessment, catalog_, sla_, level_map(), excluded,
                              now_, config_.minimum_dwell_s, iface);
        if (!sel.decision) return false;
        const ShiftDecision& d = *sel.decision;
        SplitMix64 probe = rng_;
        PlanResult plan = planner.plan_with_ripple(d.service_id, d.from_level, d.to_level, probe);
        if (!plan.ok()) {
            log(now_, "decision", d.service_id,
                "action=down_failed;from=" + std::to_string(d.from_level) +
                    ";to=" + std::to_string(d.to_level) + ";reason=" + plan.fail_reason);
            excluded.insert(d.service_id);
            continue;
        }
        log(now_, "decision", d.service_id,
            "action=down;from=" + std::to_string(d.from_level) + ";to=" +
                std::to_string(d.to_level) + ";policy=" + to_string(config_.policy.policy) +
                ";candidates=" + join_keys(sel.candidate_keys, level_map()) +
                ";ops=" + std::to_string(count_reconfig_ops(*plan.plan)));
        start_plan(std::move(*plan.plan), "down");
        return true;
    }
}

bool SimEngine::epoch_try_violation(const ShortageAssessment& assessment,
                                    const ResourcePlanner& planner) {
    bool shortage = false;
    for (const auto& sid : assessment.affected_services) {
        auto st = states_.find(sid);
        if (st != states_.end() && st->second.outage) shortage = true;
    }
    if (!shortage) return false;

    // Deny-set: shiftable services blocked purely by their SLA. Services
    // whose rolling window already carries more secondary time than their
    // budget are exempt from further violations: one emergency shift per
    // window keeps the fraction within the one-dwell allowance.
    std::vector<ViolationCandidate> candidates;
    for (const auto& [sid, spec] : catalog_) {
        const ServiceState& st = states_.at(sid);
        if (st.level == kNotDeployedLevel || st.level >= spec.deepest_level()) continue;
        DownshiftVerdict verdict = sla_allows_downshift(spec, sla_, now_, level_map(), catalog_,
                                                        config_.minimum_dwell_s);
        if (verdict.allowed) continue;
        if (current_window_secondary(sid, now_) >
            spec.sla.max_secondary_fraction * spec.sla.window_s + kSlaTimeTolerance)
            continue;
        candidates.push_back(ViolationCandidate{sid, spec.sla.violation_penalty});
    }

    std::vector<ViolationCandidate> remaining = candidates;
    while (!remaining.empty()) {
        const std::string victim = choose_sla_violation(remaining);
        const ServiceState& st = states_.at(victim);
        SplitMix64 probe = rng_;
        PlanResult plan = planner.plan_with_ripple(victim, st.level, st.level + 1, probe);
        if (!plan.ok()) {
            remaining.erase(std::remove_if(remaining.begin(), remaining.end(),
                                           [&](const ViolationCandidate& c) {
                                               return c.service_id == victim;
                                           }),
                            remaining.end());
            continue;
        }
        // The deny-set at decision time: candidates still enactable.
        std::string denyset;
        for (const auto& c : remaining) {
            if (!denyset.empty()) denyset += "|";
            denyset +=
                c.service_id + ":" +
                (c.penalty.safety ? std::string("SAFETY") : fmt_num(c.penalty.amount));
        }
        const Penalty& p = catalog_.at(victim).sla.violation_penalty;
        if (!p.safety) violation_charges_[victim] += p.amount;
        log(now_, "sla_violation", victim,
            "penalty=" + (p.safety ? std::string("SAFETY") : fmt_num(p.amount)) +
                ";denyset=" + denyset);
        log(now_, "decision", victim,
            "action=violate;from=" + std::to_string(st.level) + ";to=" +
                std::to_string(st.level + 1) + ";ops=" +
                std::to_string(count_reconfig_ops(*plan.plan)));
        start_plan(std::move(*plan.plan), "violate");
        return true;
    }
    return false;
}

bool SimEngine::epoch_try_forced(const ShortageAssessment& assessment,
                                 const ResourcePlanner& planner) {
    // Scale-only: keep the primary graph, re-host whatever sits on dead
    // elements, and accept the resulting overload as KPI violation.
    for (const auto& sid : assessment.affected_services) {
        auto it = active_.find(sid);
        if (it == active_.end()) continue;
        bool on_down = false;
        for (const auto& [vnf, node] : it->second.placement.vnf_map)
            if (!infra_.node(node).up) on_down = true;
        for (const auto& [vlink, path] : it->second.placement.route_map)
            for (const auto& link_id : path)
                if (!infra_.link(link_id).up) on_down = true;
        if (!on_down) continue;
        SplitMix64 probe = rng_;
        PlanResult plan = planner.plan_forced(sid, probe);
        if (!plan.ok() || plan.plan->empty()) continue;
        log(now_, "decision", sid,
            "action=forced;level=" + std::to_string(it->second.level) +
                ";ops=" + std::to_string(count_reconfig_ops(*plan.plan)));
        start_plan(std::move(*plan.plan), "forced");
        return true;
    }
    return false;
}

bool SimEngine::epoch_try_shift_up(const ResourcePlanner& planner, Planner& iface) {
    // While any service is down, freed capacity stays available for its
    // recovery: upward shifts wait, only suspended services may redeploy.
    bool any_outage = false;
    for (const auto& [sid, st] : states_)
        if (st.outage && st.level != kNotDeployedLevel) any_outage = true;

    auto ups = consider_shift_up(catalog_, sla_, level_map(), now_,
                                 config_.policy.shift_up_hysteresis_s, iface);
    for (const auto& d : ups) { // one per epoch, best revenue gain first
        if (any_outage && d.from_level != kNotDeployedLevel) continue;
        SplitMix64 probe = rng_;
        PlanResult plan =
            d.from_level == kNotDeployedLevel
                ? planner.plan_deploy(d.service_id, d.to_level, probe)
                : planner.plan_transition(d.service_id, d.from_level, d.to_level, probe);
        if (!plan.ok()) continue;
        const std::string action = d.from_level == kNotDeployedLevel ? "deploy" : "up";
        log(now_, "decision", d.service_id,
            "action=" + action + ";from=" +
                (d.from_level == kNotDeployedLevel ? std::string("none")
                                                   : std::to_string(d.from_level)) +
                ";to=" + std::to_string(d.to_level) +
                ";ops=" + std::to_string(count_reconfig_ops(*plan.plan)));
        start_plan(std::move(*plan.plan), action);
        return true;
    }
    return false;
}

// --- Enactment ----------------------------------------------------------------

void SimEngine::start_plan(TransitionPlan plan, const std::string& decision_kind,
                           const std::string& extra_detail) {
    // Enacted plans draw their real timeline from the engine generator.
    stamp_timeline(plan, scenario_.delays, rng_);
    for (auto& a : plan.actions) a.id = next_action_id_++;
    reconfig_ops_total_ += count_reconfig_ops(plan);

    std::string detail = "service=" + plan.service_id + ";kind=" + decision_kind +
                         ";ops=" + std::to_string(count_reconfig_ops(plan)) +
                         ";migrations=" + std::to_string(plan.ripple_migrations.size()) +
                         ";duration=" + fmt_num(plan.total_duration_s);
    if (!extra_detail.empty()) detail += ";" + extra_detail;
    log(now_, "plan", plan.service_id, detail);

    // Break-before-make: the old graph stops serving the moment enactment
    // starts. Ripple-migrated services keep serving, but degraded.
    const std::string sid = plan.service_id;
    active_.erase(sid);
    ServiceState& st = states_.at(sid);
    st.in_transition = true;
    for (const auto& m : plan.ripple_migrations) {
        auto ms = states_.find(m.service_id);
        if (ms != states_.end()) ms->second.degraded_migration = true;
    }

    InFlight fl;
    fl.started_at = now_;
    fl.decision_kind = decision_kind;
    for (const auto& a : plan.actions) {
        fl.pending_actions.insert(a.id);
        schedule(now_ + a.start_s + a.duration_s, EventKind::EnactmentComplete, a.subject, 0, a.id);
    }
    fl.plan = std::move(plan);
    const bool no_actions = fl.pending_actions.empty();
    in_flight_ = std::move(fl);
    refresh_service_states();
    if (no_actions) {
        apply_plan(in_flight_->plan);
        in_flight_.reset();
    }
}

void SimEngine::handle_enactment_complete(long action_id) {
    if (!in_flight_ || !in_flight_->pending_actions.count(action_id)) return;
    in_flight_->pending_actions.erase(action_id);
    for (const auto& a : in_flight_->plan.actions) {
        if (a.id != action_id) continue;
        log(now_, "enact", a.subject,
            "action_id=" + std::to_string(a.id) + ";kind=" + to_string(a.kind) +
                ";duration=" + fmt_num(a.duration_s));
    }
    if (in_flight_->pending_actions.empty()) {
        TransitionPlan plan = std::move(in_flight_->plan);
        in_flight_.reset();
        apply_plan(plan);
    }
}

void SimEngine::apply_plan(const TransitionPlan& plan) {
    const std::string& sid = plan.service_id;
    ServiceState& st = states_.at(sid);
    st.in_transition = false;

    if (plan.is_undeploy) {
        st.level = kNotDeployedLevel;
        log(now_, "apply", sid, "level=none");
    } else {
        const ServiceSpec& spec = catalog_.at(sid);
        active_[sid] = make_deployment(spec, plan.to_level, plan.target_placement, st.load_factor);
        st.level = plan.to_level;
        log(now_, "apply", sid, "level=" + std::to_string(plan.to_level));
    }
    ServiceSlaRecord& rec = sla_.record(sid);
    rec.current_level = st.level == kNotDeployedLevel ? kOutageEntry : st.level;
    rec.level_since = now_;

    for (const auto& [foreign, placement] : plan.migrated_placements) {
        auto it = active_.find(foreign);
        if (it != active_.end()) it->second.placement = placement;
        auto ms = states_.find(foreign);
        if (ms != states_.end()) ms->second.degraded_migration = false;
        log(now_, "apply", foreign, "migrated=1");
    }

    if (config_.policy.policy == Policy::scale_only) update_scale_only_bandwidth();
    refresh_service_states();
    schedule(now_, EventKind::MetricTick, "event");
}

// --- Reporting -----------------------------------------------------------------

void SimEngine::log(double t, const std::string& kind, const std::string& subject,
                    const std::string& detail) {
    event_log_.push_back(fmt_num(t) + "," + kind + "," + subject + "," + detail);
}

RunResult SimEngine::finish_and_report() {
    MetricsReport report;
    for (const auto& [sid, spec] : catalog_) {
        ServiceMetrics m = catalog_metrics_[sid];
        m.level_seconds.resize(spec.graphs.size(), 0.0);
        for (std::size_t level = 0; level < spec.graphs.size(); ++level)
            m.revenue += m.level_seconds[level] * spec.graphs[level].revenue_per_hour / 3600.0;
        m.penalties = m.outage_s * spec.sla.outage_penalty_rate;
        auto vc = violation_charges_.find(sid);
        if (vc != violation_charges_.end()) m.penalties += vc->second;
        double secondary = 0;
        for (std::size_t level = 1; level < m.level_seconds.size(); ++level)
            secondary += m.level_seconds[level];
        m.secondary_fraction = scenario_.duration_s > 0 ? secondary / scenario_.duration_s : 0;
        m.sla_ok = m.max_window_fraction <=
                   spec.sla.max_secondary_fraction +
                       config_.minimum_dwell_s / spec.sla.window_s + kSlaTimeTolerance;
        report.total_revenue += m.revenue;
        report.total_penalties += m.penalties;
        report.per_service[sid] = std::move(m);
    }
    report.reconfig_ops = reconfig_ops_total_;

    RunResult result;
    result.report = std::move(report);
    result.event_log = event_log_;
    result.timeseries = timeseries_;
    return result;
}

RunResult run_scenario(const Scenario& scenario, std::uint64_t seed, Policy policy,
                       EngineConfig config) {
    config.policy.policy = policy;
    SimEngine engine(scenario, seed, config);
    while (!engine.finished()) engine.step();
    return engine.finish_and_report();
}

} // namespace sliceshift

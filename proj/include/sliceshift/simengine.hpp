#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "sliceshift/decision.hpp"
#include "sliceshift/delays.hpp"
#include "sliceshift/monitor.hpp"
#include "sliceshift/placement.hpp"
#include "sliceshift/rng.hpp"
#include "sliceshift/scenario.hpp"

namespace sliceshift {

// Tie-break order for simultaneous events: state changes first, then
// sampling, then decisions, End last.
enum class EventKind {
    ElementFail,
    ElementRecover,
    LoadChange,
    EnactmentComplete,
    MetricTick,
    DecisionEpoch,
    End
};

const char* to_string(EventKind kind);

struct SimEvent {
    double at = 0;
    EventKind kind = EventKind::MetricTick;
    std::string subject;
    double value = 0;   // load factor
    long action_id = 0; // EnactmentComplete
    long seq = 0;       // insertion order, breaks remaining ties
};

struct EngineConfig {
    double epoch_period_s = 30;
    double minimum_dwell_s = 120;
    PolicyConfig policy;
    std::vector<Subscription> subscriptions = default_subscriptions();
};

struct ServiceMetrics {
    std::vector<double> level_seconds; // indexed by graph level
    double outage_s = 0;
    double kpi_violation_s = 0;
    double revenue = 0;
    double penalties = 0;
    double secondary_fraction = 0;    // share of the whole run at level > 0
    double max_window_fraction = 0;   // peak rolling-window secondary fraction
    bool sla_ok = true;
};

struct MetricsReport {
    std::map<std::string, ServiceMetrics> per_service;
    double total_revenue = 0;
    double total_penalties = 0;
    long reconfig_ops = 0;
};

struct TimeseriesRow {
    double t = 0;
    std::string service;
    int level = -1; // -1 = no active graph
    bool outage = false;
    double node_util_max = 0;
    double link_util_max = 0;
};

struct RunResult {
    MetricsReport report;
    std::vector<std::string> event_log; // one "t,kind,subject,detail" record per line
    std::vector<TimeseriesRow> timeseries;
};

class SimEngine {
public:
    SimEngine(Scenario scenario, std::uint64_t seed, const EngineConfig& config);

    // Handles exactly one event. Errors: EmptyQueue.
    void step();

    bool finished() const { return finished_; }
    double now() const { return now_; }

    RunResult finish_and_report();

    // Visible for tests.
    const std::map<std::string, Deployment>& active_deployments() const { return active_; }
    const Monitor& monitor() const { return monitor_; }
    const Infrastructure& infrastructure() const { return infra_; }

private:
    struct InFlight {
        TransitionPlan plan;
        double started_at = 0;
        std::set<long> pending_actions;
        std::string decision_kind; // down / up / repair / violate / undeploy / forced / deploy
    };

    struct ServiceState {
        int level = 0; // kNotDeployedLevel when undeployed
        bool in_transition = false;
        bool outage = false;
        bool degraded_migration = false; // being moved by a ripple migration
        bool kpi_bad = false;
        double kpi_mark = 0;
        double last_mark = 0; // start of the current accounting interval
        int accounting_entry = 0;
        double load_factor = 1.0;
    };

    struct Planner; // PlannerIface adapter over ResourcePlanner

    void schedule(double at, EventKind kind, std::string subject = "", double value = 0,
                  long action_id = 0);
    void handle(const SimEvent& ev);
    void handle_metric_tick(const SimEvent& ev);
    void handle_decision_epoch(const SimEvent& ev);
    void handle_enactment_complete(long action_id);
    void apply_plan(const TransitionPlan& plan);
    void start_plan(TransitionPlan plan, const std::string& decision_kind,
                    const std::string& extra_detail = "");

    void emit_truth_samples();
    std::map<std::string, double> node_utilization() const;
    std::map<std::string, double> link_utilization() const;
    double reported_delay(const std::string& service, const Deployment& dep) const;

    void refresh_service_states();
    void mark_accounting(const std::string& service, double t);
    void set_entry(const std::string& service, int entry, double t);
    double current_window_secondary(const std::string& service, double now) const;
    void update_scale_only_bandwidth();
    std::set<std::string> broken_services() const;

    bool epoch_try_budget_enforcement(const ResourcePlanner& planner);
    bool epoch_try_repair(const ShortageAssessment& assessment, const ResourcePlanner& planner);
    bool epoch_try_shift_down(const ShortageAssessment& assessment,
                              const ResourcePlanner& planner, Planner& iface);
    bool epoch_try_violation(const ShortageAssessment& assessment,
                             const ResourcePlanner& planner);
    bool epoch_try_forced(const ShortageAssessment& assessment, const ResourcePlanner& planner);
    bool epoch_try_shift_up(const ResourcePlanner& planner, Planner& iface);

    std::map<std::string, int> level_map() const;
    std::map<std::string, double> load_factor_map() const;
    std::map<std::string, bool> element_status_map() const;
    std::vector<Deployment> deployments_vector() const;
    void log(double t, const std::string& kind, const std::string& subject,
             const std::string& detail);

    Scenario scenario_;
    EngineConfig config_;
    ServiceCatalog catalog_;
    Infrastructure infra_;
    Monitor monitor_;
    SplitMix64 rng_;

    std::vector<SimEvent> queue_; // min-heap on (at, kind, seq)
    long next_seq_ = 0;
    long next_action_id_ = 1;
    double now_ = 0;
    bool finished_ = false;
    double last_tick_ = -1;
    double last_epoch_scheduled_ = -1;

    std::map<std::string, Deployment> active_;
    std::map<std::string, ServiceState> states_;
    std::optional<InFlight> in_flight_;
    SlaState sla_;

    std::vector<std::string> event_log_;
    std::vector<TimeseriesRow> timeseries_;
    std::map<std::string, ServiceMetrics> catalog_metrics_;
    std::map<std::string, double> violation_charges_;
    long reconfig_ops_total_ = 0;
};

// Places every primary graph, replays the scenario to its end, and returns
// the metrics report plus logs. Errors: ScenarioInfeasibleAtStart.
RunResult run_scenario(const Scenario& scenario, std::uint64_t seed, Policy policy,
                       EngineConfig config = {});

} // namespace sliceshift

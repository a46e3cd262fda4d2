#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sliceshift/delays.hpp"
#include "sliceshift/monitor.hpp"
#include "sliceshift/placement.hpp"

namespace sliceshift {

enum class Policy { payoff, qoe, reaction, scale_only };

const char* to_string(Policy p);
Policy policy_from_string(const std::string& s);

struct PolicyConfig {
    Policy policy = Policy::payoff;
    int ripple_depth_limit = 2;
    double shift_up_hysteresis_s = 120;
};

// Level marker for services that currently have no deployed graph.
inline constexpr int kNotDeployedLevel = std::numeric_limits<int>::max();

struct ShortageAssessment {
    std::vector<std::pair<Consumer, Alert>> triggering;
    std::set<std::string> affected_services;
    std::map<std::string, int> overload_by_element; // element -> raised alert count
    bool empty() const { return triggering.empty(); }
};

struct ShiftDecision {
    std::string service_id;
    int from_level = 0;
    int to_level = 0;
    bool down = true;
    std::string reason;
};

struct MigrationStep {
    std::string service_id; // foreign service whose VNF moves
    std::string vnf_id;
    std::string from_node;
    std::string to_node;
};

struct PlanAction {
    long id = 0;
    ActionKind kind = ActionKind::route_update;
    int phase = 0; // 0 teardown, 1 migrate, 2 instantiate, 3 route updates
    std::string subject;
    double start_s = 0; // offset from enactment start
    double duration_s = 0;
};

// The removals / instantiations / route updates (plus ripple migrations)
// realizing one transition, with an enactment timeline. Phases run
// break-before-make: all teardowns, then migrations, then instantiations,
// then route updates; actions within a phase run in parallel.
struct TransitionPlan {
    std::string service_id;
    int from_level = 0;
    int to_level = 0;
    std::vector<std::string> removals; // vnf instance ids of the shifted service
    std::vector<std::pair<std::string, std::string>> instantiations; // (vnf, node)
    std::vector<std::pair<VlinkKey, std::vector<std::string>>> route_removals;
    std::vector<std::pair<VlinkKey, std::vector<std::string>>> route_additions;
    std::vector<MigrationStep> ripple_migrations;
    Placement target_placement;
    std::map<std::string, Placement> migrated_placements; // foreign service -> new placement
    std::vector<PlanAction> actions;
    double total_duration_s = 0;
    bool is_undeploy = false;
    bool forced = false; // degraded re-hosting that ignores capacity (scale-only)

    bool empty() const {
        return removals.empty() && instantiations.empty() && route_removals.empty() &&
               route_additions.empty() && ripple_migrations.empty();
    }
};

int count_reconfig_ops(const TransitionPlan& plan);

struct PlanResult {
    std::optional<TransitionPlan> plan;
    std::string fail_reason; // PlanFailed / RippleExhausted detail
    std::string fail_item;   // first unplaceable vnf id or vlink name
    bool ok() const { return plan.has_value(); }
};

// Samples per-action durations and lays out the phase timeline. Actions are
// stamped in a deterministic order so a fixed seed yields a fixed timeline.
void stamp_timeline(TransitionPlan& plan, const DelayConfig& delays, SplitMix64& rng);

// --- Resource layer (SO) ---------------------------------------------------

// Plans placements and transitions against a snapshot of the infrastructure
// and the currently active deployments.
class ResourcePlanner {
public:
    ResourcePlanner(const Infrastructure& infra,
                    const std::map<std::string, Deployment>& active,
                    const ServiceCatalog& catalog, const DelayConfig& delays,
                    int ripple_depth_limit,
                    const std::map<std::string, double>& load_factors = {});

    // Three-step transition: shared VNFs stay pinned, everything else is
    // torn down, re-placed with the freed capacity credited, and routes are
    // recomputed wherever endpoints or demands changed. from == to re-places
    // only broken parts (an intact placement yields an empty plan).
    PlanResult plan_transition(const std::string& service, int from_level, int to_level,
                               SplitMix64& rng) const;

    // Retry of a failed plan that frees node capacity by migrating foreign
    // VNFs. Explores migration subsets smallest-demand-first and returns the
    // plan with the fewest migrations; recursion is bounded by depth_limit.
    PlanResult resolve_ripple(const std::string& service, int from_level, int to_level,
                              int depth_limit, SplitMix64& rng) const;

    // plan_transition with resolve_ripple as fallback.
    PlanResult plan_with_ripple(const std::string& service, int from_level, int to_level,
                                SplitMix64& rng) const;

    // Fresh deployment of one level for a currently undeployed service.
    PlanResult plan_deploy(const std::string& service, int level, SplitMix64& rng) const;

    // Teardown of the active graph (SLA-mandated suspension).
    PlanResult plan_undeploy(const std::string& service, SplitMix64& rng) const;

    // Scale-only fallback: re-hosts VNFs stranded on down elements onto up
    // nodes ignoring capacity and re-routes around down links. The result
    // may oversubscribe; the caller marks the service KPI-violating.
    PlanResult plan_forced(const std::string& service, SplitMix64& rng) const;

    const CapacityView& residual() const { return residual_; }

private:
    struct PlanBase {
        std::map<std::string, std::string> pinned;
        std::map<VlinkKey, std::vector<std::string>> keep;
        std::vector<std::string> removals;
        std::vector<std::pair<VlinkKey, std::vector<std::string>>> route_removals;
    };
    // Pinning, kept routes and removals for a transition; credits the freed
    // resources into `local`, leaving it as the post-removal residual.
    PlanBase plan_base(const std::string& service, int from_level, int to_level,
                       CapacityView& local) const;
    PlanResult build_plan(const std::string& service, int from_level, int to_level,
                          const std::vector<MigrationStep>& migrations,
                          const std::map<std::string, Placement>& migrated,
                          SplitMix64& rng) const;
    bool find_migrations(const std::string& service, int from_level, int to_level,
                         int depth_limit, SplitMix64& rng,
                         std::vector<MigrationStep>& migrations,
                         std::map<std::string, Placement>& migrated) const;
    double load_factor_of(const std::string& service) const;

    const Infrastructure& infra_;
    const std::map<std::string, Deployment>& active_;
    ServiceCatalog catalog_;
    DelayConfig delays_;
    int ripple_depth_limit_;
    std::map<std::string, double> load_factors_;
    CapacityView residual_;
};

// Narrow planning interface handed to the service layer. The service layer
// never sees residual capacities; it only requests plans and reads their
// summaries, which keeps the two decision layers decoupled.
class PlannerIface {
public:
    virtual ~PlannerIface() = default;
    virtual PlanResult try_plan(const std::string& service, int from_level, int to_level,
                                bool with_ripple) = 0;
};

// --- Service layer (VS) ----------------------------------------------------

ShortageAssessment detect_shortage(const std::vector<std::pair<Consumer, Alert>>& notifications,
                                   const std::map<std::string, Deployment>& active_deployments,
                                   const std::map<std::string, bool>& element_status,
                                   const std::vector<AlertRule>& rules);

struct SelectOutcome {
    std::optional<ShiftDecision> decision; // nullopt = NoCandidate
    std::vector<std::pair<std::string, double>> candidate_keys; // audit trail
};

// Picks the SLA-permitted service with the minimum policy key:
// payoff = revenue loss, qoe = popularity, reaction = reconfiguration op
// count of the candidate plan. Ties break lexicographically. One shift per
// call; the caller iterates when a single shift does not clear the shortage.
SelectOutcome select_shift_down(const PolicyConfig& policy, const ShortageAssessment& assessment,
                                const ServiceCatalog& catalog, const SlaState& sla,
                                const std::map<std::string, int>& levels,
                                const std::set<std::string>& excluded, double now,
                                double minimum_dwell_s, PlannerIface& planner);

struct ViolationCandidate {
    std::string service_id;
    Penalty penalty;
};

// Lowest-penalty SLA to violate; SAFETY SLAs are excluded unless every
// candidate is SAFETY. Errors: NoServices on an empty candidate set.
std::string choose_sla_violation(const std::vector<ViolationCandidate>& candidates);

// Services worth shifting back up: dwell time satisfied, the shallower
// graph placeable without ripple, and (for a return to the primary graph)
// every higher-priority same-vertical peer already at level 0. Ordered by
// descending revenue-rate gain; the engine applies one per epoch.
std::vector<ShiftDecision> consider_shift_up(const ServiceCatalog& catalog, const SlaState& sla,
                                             const std::map<std::string, int>& levels,
                                             double now, double hysteresis_s,
                                             PlannerIface& planner);

} // namespace sliceshift

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sliceshift/deployment.hpp"
#include "sliceshift/topology.hpp"

namespace sliceshift {

struct KpiReport {
    double end_to_end_delay_ms = 0;
    bool satisfied = true;
};

enum class ViolationKind { cpu, mem, bandwidth, element_down };

struct Violation {
    std::string element_id;
    ViolationKind kind;
    double overload = 0;
};

struct FeasibilityReport {
    std::vector<Violation> violations;
    bool feasible() const { return violations.empty(); }
};

struct PlaceOutcome {
    Placement placement;
    KpiReport kpi;
};

// Either a placement (with its KPI report, which does not gate success) or
// the first item that could not be placed.
struct PlaceResult {
    std::optional<PlaceOutcome> outcome;
    std::string infeasible_item; // vnf id or vlink name when placement failed
    bool ok() const { return outcome.has_value(); }
};

// Greedy best-fit embedding: VNFs in topological order, each to the up node
// with the most residual CPU that fits cpu+mem (ties by node id); vlinks
// routed by route_vlink as soon as both endpoints are placed. Pinned VNFs
// keep their node and consume no fresh capacity; routes listed in
// keep_routes are reused instead of recomputed (their bandwidth is assumed
// to be already reserved in `residual`). demand_scale multiplies all
// cpu/mem/bandwidth demands.
PlaceResult place_graph(const VnfGraph& graph, const ServiceSpec& spec,
                        const Infrastructure& infra, const CapacityView& residual,
                        const std::map<std::string, std::string>& pinned = {},
                        const std::map<VlinkKey, std::vector<std::string>>* keep_routes = nullptr,
                        double demand_scale = 1.0);

// Minimum-latency path over up links with enough residual bandwidth.
// Ties by fewest hops, then by lexicographic link-id sequence. Empty path
// when src == dst; nullopt when no feasible path exists.
std::optional<std::vector<std::string>> route_vlink(const Infrastructure& infra,
                                                    const CapacityView& residual,
                                                    const std::string& src_node,
                                                    const std::string& dst_node,
                                                    double bw_demand);

// End-to-end delay: max over source->sink DAG paths of the VNF processing
// delays plus the latency of every link on the routed vlinks of the path.
// Errors: InvalidPlacement.
KpiReport evaluate_kpis(const Placement& placement, const VnfGraph& graph,
                        const ServiceSpec& spec, const Infrastructure& infra);

// Lists every capacity overload and every placement touching a down
// element; an empty report means the deployment set fits.
FeasibilityReport check_feasible(const std::vector<Deployment>& deployments,
                                 const Infrastructure& infra);

// --- Exhaustive oracle (small instances only) ------------------------------

struct OracleChoice {
    int level = 0;
    Placement placement;
};

struct OptimalConfig {
    double total_revenue_per_hour = 0;
    // Service id -> chosen level + embedding; absent value = not deployed.
    std::map<std::string, std::optional<OracleChoice>> choices;
    std::size_t deployed_count() const;
};

// Enumerates every {graph level | not deployed} combination and every
// VNF->node assignment, routing vlinks by shortest feasible path, and
// returns the feasible configuration with the highest total revenue rate.
// Ties prefer more deployed services, then the lexicographically first
// service at a lower level. Errors: OracleTooLarge when the combination
// count guard (1e6) is exceeded.
OptimalConfig exhaustive_oracle(const std::vector<ServiceSpec>& services,
                                const Infrastructure& infra);

} // namespace sliceshift

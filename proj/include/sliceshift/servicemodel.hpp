#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sliceshift/errors.hpp"

namespace sliceshift {

struct VnfDescriptor {
    std::string vnf_id; // stable across graphs of the same service
    double cpu_demand = 0;
    double mem_demand = 0;
    double proc_delay_ms = 0;
};

struct VLink {
    std::string src;
    std::string dst;
    double bw_demand = 0; // Mbps
};

inline bool operator<(const VLink& a, const VLink& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    return a.bw_demand < b.bw_demand;
}

// One deployable variant of a service. Level 0 is the primary graph;
// deeper levels trade utility and revenue for lower resource demand.
struct VnfGraph {
    int level = 0;
    double utility = 0;
    double revenue_per_hour = 0;
    double kpi_max_delay_ms = 0;
    std::vector<std::string> vnfs;
    std::vector<VLink> vlinks;
    // Filled by validate_service: vnfs in topological order, ties by id.
    std::vector<std::string> topo_order;
};

// Monetary penalty, or the distinguished SAFETY value that is only
// violable as a last resort.
struct Penalty {
    bool safety = false;
    double amount = 0;
};

struct SlaTerms {
    int priority = 0;                   // higher = more important, per vertical
    double max_secondary_fraction = 1;  // share of the window allowed at level > 0
    double window_s = 3600;
    Penalty violation_penalty;
    double outage_penalty_rate = 0; // money per second of outage
};

struct ServiceSpec {
    std::string service_id;
    std::string vertical_id;
    long popularity = 0; // user count
    std::vector<VnfDescriptor> vnf_catalog;
    std::vector<VnfGraph> graphs; // ordered by level after validation
    SlaTerms sla;

    const VnfDescriptor& vnf(const std::string& vnf_id) const;
    const VnfGraph& graph(int level) const;
    bool has_level(int level) const {
        return level >= 0 && level < static_cast<int>(graphs.size());
    }
    int deepest_level() const { return static_cast<int>(graphs.size()) - 1; }
};

using ServiceCatalog = std::map<std::string, ServiceSpec>;

// Checks every ServiceSpec invariant and computes topological orders.
// Errors: MissingPrimary, CyclicGraph, UnknownVnf, NonMonotoneUtility,
// NonMonotoneRevenue, BadLevelSequence, DuplicateId, NonPositiveDemand.
ServiceSpec validate_service(ServiceSpec spec);

std::set<std::string> shared_vnfs(const VnfGraph& a, const VnfGraph& b);

// --- SLA accounting -------------------------------------------------------

// Absolute tolerance for time and budget comparisons.
inline constexpr double kSlaTimeTolerance = 1e-9;

// Entry recorded for outage time, as opposed to time at a graph level >= 0.
inline constexpr int kOutageEntry = -1;

struct SlaInterval {
    double t0 = 0;
    double t1 = 0;
    int entry = 0; // graph level, or kOutageEntry
};

struct ServiceSlaRecord {
    std::vector<SlaInterval> intervals; // chronological, non-overlapping
    double last_end = 0;
    int current_level = 0;
    double level_since = 0;
};

class SlaState {
public:
    ServiceSlaRecord& record(const std::string& service) { return records_[service]; }
    const ServiceSlaRecord* find(const std::string& service) const {
        auto it = records_.find(service);
        return it == records_.end() ? nullptr : &it->second;
    }
    const std::map<std::string, ServiceSlaRecord>& records() const { return records_; }

private:
    std::map<std::string, ServiceSlaRecord> records_;
};

// Appends one accounting interval; expires intervals that fell out of the
// rolling window. Errors: NegativeInterval, OverlappingInterval.
void record_interval(SlaState& state, const std::string& service, int entry,
                     double t0, double t1, double window_s);

// Seconds spent at any level > 0 within [now - window, now].
double secondary_seconds_in_window(const SlaState& state, const std::string& service,
                                   double now, double window_s);

struct DownshiftVerdict {
    bool allowed = true;
    enum class Reason { None, PriorityOrder, FractionBudget } reason = Reason::None;
    std::string detail;
};

// Gate for shifting a service one level down. Denies when a same-vertical
// peer with strictly lower priority still runs its primary graph, or when
// the secondary time budget (with minimum_dwell charged upfront) would be
// exceeded. Errors: UnknownPeer when a same-vertical peer is missing from
// peer_levels.
DownshiftVerdict sla_allows_downshift(const ServiceSpec& spec, const SlaState& state,
                                      double now,
                                      const std::map<std::string, int>& peer_levels,
                                      const ServiceCatalog& catalog,
                                      double minimum_dwell_s);

} // namespace sliceshift

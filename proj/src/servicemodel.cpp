#include "sliceshift/servicemodel.hpp"

#include <algorithm>
#include <deque>

namespace sliceshift {

const VnfDescriptor& ServiceSpec::vnf(const std::string& vnf_id) const {
    for (const auto& d : vnf_catalog)
        if (d.vnf_id == vnf_id) return d;
    raise("UnknownVnf", service_id + ": " + vnf_id);
}

const VnfGraph& ServiceSpec::graph(int level) const {
    if (!has_level(level))
        raise("UnknownElement", service_id + ": no graph at level " + std::to_string(level));
    return graphs[static_cast<std::size_t>(level)];
}

namespace {

// Kahn topological sort, ties by vnf id. Throws CyclicGraph on cycles.
std::vector<std::string> topo_sort(const std::string& service, const VnfGraph& g) {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& v : g.vnfs) indegree[v] = 0;
    for (const auto& e : g.vlinks) {
        out[e.src].push_back(e.dst);
        indegree[e.dst] += 1;
    }
    std::vector<std::string> ready;
    for (const auto& [v, d] : indegree)
        if (d == 0) ready.push_back(v);
    std::sort(ready.begin(), ready.end());

    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string v = ready.front();
        ready.erase(ready.begin());
        order.push_back(v);
        auto it = out.find(v);
        if (it == out.end()) continue;
        for (const auto& w : it->second) {
            if (--indegree[w] == 0)
                ready.insert(std::lower_bound(ready.begin(), ready.end(), w), w);
        }
    }
    if (order.size() != g.vnfs.size())
        raise("CyclicGraph",
              service + ": level " + std::to_string(g.level) + " vlinks contain a cycle");
    return order;
}

} // namespace

ServiceSpec validate_service(ServiceSpec spec) {
    if (spec.graphs.empty()) raise("MissingPrimary", spec.service_id + " has no graphs");

    std::set<std::string> catalog_ids;
    for (const auto& d : spec.vnf_catalog) {
        if (!catalog_ids.insert(d.vnf_id).second)
            raise("DuplicateId", spec.service_id + ": vnf " + d.vnf_id + " declared twice");
        if (d.cpu_demand <= 0 || d.mem_demand <= 0)
            raise("NonPositiveDemand", spec.service_id + ": vnf " + d.vnf_id);
        if (d.proc_delay_ms < 0)
            raise("NonPositiveDemand",
                  spec.service_id + ": vnf " + d.vnf_id + " has negative proc delay");
    }

    std::sort(spec.graphs.begin(), spec.graphs.end(),
              [](const VnfGraph& a, const VnfGraph& b) { return a.level < b.level; });
    if (spec.graphs.front().level != 0)
        raise("MissingPrimary", spec.service_id + " has no level-0 graph");

    for (std::size_t i = 0; i < spec.graphs.size(); ++i) {
        VnfGraph& g = spec.graphs[i];
        if (g.level != static_cast<int>(i))
            raise("BadLevelSequence",
                  spec.service_id + ": levels must be consecutive from 0, found " +
                      std::to_string(g.level) + " at position " + std::to_string(i));
        if (g.utility <= 0)
            raise("NonMonotoneUtility",
                  spec.service_id + ": level " + std::to_string(g.level) + " utility must be > 0");
        if (i > 0) {
            if (g.utility >= spec.graphs[i - 1].utility)
                raise("NonMonotoneUtility",
                      spec.service_id + ": utility must strictly decrease with level");
            if (g.revenue_per_hour > spec.graphs[i - 1].revenue_per_hour)
                raise("NonMonotoneRevenue",
                      spec.service_id + ": revenue rate must be non-increasing with level");
        }
        std::set<std::string> members;
        for (const auto& v : g.vnfs) {
            if (!catalog_ids.count(v)) raise("UnknownVnf", spec.service_id + ": " + v);
            if (!members.insert(v).second)
                raise("DuplicateId", spec.service_id + ": vnf " + v + " listed twice in level " +
                                         std::to_string(g.level));
        }
        for (const auto& e : g.vlinks) {
            if (!members.count(e.src)) raise("UnknownVnf", spec.service_id + ": " + e.src);
            if (!members.count(e.dst)) raise("UnknownVnf", spec.service_id + ": " + e.dst);
            if (e.src == e.dst)
                raise("CyclicGraph", spec.service_id + ": self-loop on " + e.src);
            if (e.bw_demand <= 0)
                raise("NonPositiveDemand",
                      spec.service_id + ": vlink " + e.src + ">" + e.dst);
        }
        g.topo_order = topo_sort(spec.service_id, g);
    }
    return spec;
}

std::set<std::string> shared_vnfs(const VnfGraph& a, const VnfGraph& b) {
    std::set<std::string> sa(a.vnfs.begin(), a.vnfs.end());
    std::set<std::string> result;
    for (const auto& v : b.vnfs)
        if (sa.count(v)) result.insert(v);
    return result;
}

void record_interval(SlaState& state, const std::string& service, int entry, double t0, double t1,
                     double window_s) {
    if (t1 < t0) raise("NegativeInterval", service);
    ServiceSlaRecord& rec = state.record(service);
    if (!rec.intervals.empty() && t0 < rec.last_end - kSlaTimeTolerance)
        raise("OverlappingInterval", service + ": interval starting at " + std::to_string(t0) +
                                         " overlaps accounting up to " +
                                         std::to_string(rec.last_end));
    rec.intervals.push_back(SlaInterval{t0, t1, entry});
    rec.last_end = std::max(rec.last_end, t1);

    // Expire intervals that ended before the rolling window.
    const double horizon = rec.last_end - window_s;
    while (!rec.intervals.empty() && rec.intervals.front().t1 < horizon)
        rec.intervals.erase(rec.intervals.begin());
}

double secondary_seconds_in_window(const SlaState& state, const std::string& service, double now,
                                   double window_s) {
    const ServiceSlaRecord* rec = state.find(service);
    if (!rec) return 0;
    const double lo = now - window_s;
    double total = 0;
    for (const auto& iv : rec->intervals) {
        if (iv.entry <= 0) continue; // primary level or outage
        const double a = std::max(iv.t0, lo);
        const double b = std::min(iv.t1, now);
        if (b > a) total += b - a;
    }
    return total;
}

DownshiftVerdict sla_allows_downshift(const ServiceSpec& spec, const SlaState& state, double now,
                                      const std::map<std::string, int>& peer_levels,
                                      const ServiceCatalog& catalog, double minimum_dwell_s) {
    // Priority order: every same-vertical peer with strictly lower priority
    // must already have left its primary graph.
    for (const auto& [peer_id, peer] : catalog) {
        if (peer_id == spec.service_id || peer.vertical_id != spec.vertical_id) continue;
        auto it = peer_levels.find(peer_id);
        if (it == peer_levels.end()) raise("UnknownPeer", peer_id);
        if (peer.sla.priority < spec.sla.priority && it->second == 0) {
            DownshiftVerdict v;
            v.allowed = false;
            v.reason = DownshiftVerdict::Reason::PriorityOrder;
            v.detail = peer_id + " (priority " + std::to_string(peer.sla.priority) +
                       ") still at level 0";
            return v;
        }
    }

    const double window = spec.sla.window_s;
    const double used = secondary_seconds_in_window(state, spec.service_id, now, window);
    if (used + minimum_dwell_s > spec.sla.max_secondary_fraction * window + kSlaTimeTolerance) {
        DownshiftVerdict v;
        v.allowed = false;
        v.reason = DownshiftVerdict::Reason::FractionBudget;
        v.detail = std::to_string(used) + " s used of " +
                   std::to_string(spec.sla.max_secondary_fraction * window) + " s budget";
        return v;
    }
    return DownshiftVerdict{};
}

} // namespace sliceshift

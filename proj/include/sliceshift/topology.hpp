#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sliceshift/errors.hpp"

namespace sliceshift {

struct Deployment; // deployment.hpp

// Absolute tolerance used for every capacity comparison in the library.
inline constexpr double kCapacityTolerance = 1e-9;

struct ComputeNode {
    std::string id;
    double cpu_capacity = 0; // CPU units
    double mem_capacity = 0; // memory units
    bool up = true;
};

// Links are undirected; bandwidth is shared between both directions.
struct NetLink {
    std::string id;
    std::string node_a;
    std::string node_b;
    double bandwidth_capacity = 0; // Mbps
    double latency_ms = 0;
    bool up = true;
};

class Infrastructure {
public:
    Infrastructure() = default;

    const std::map<std::string, ComputeNode>& nodes() const { return nodes_; }
    const std::map<std::string, NetLink>& links() const { return links_; }

    bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }
    bool has_link(const std::string& id) const { return links_.count(id) != 0; }
    const ComputeNode& node(const std::string& id) const;
    const NetLink& link(const std::string& id) const;

    // Link ids incident to a node, sorted.
    const std::vector<std::string>& links_at(const std::string& node_id) const;

    bool element_up(const std::string& id) const;

    friend Infrastructure build_infrastructure(const std::vector<ComputeNode>&,
                                               const std::vector<NetLink>&);
    friend void apply_status_change(Infrastructure&, const std::string&, bool);

private:
    std::map<std::string, ComputeNode> nodes_;
    std::map<std::string, NetLink> links_;
    std::map<std::string, std::vector<std::string>> adjacency_;
};

// Residual resources per element. Down elements always report 0.
// Negative residuals are representable: a failure can strand placements,
// so oversubscription is flagged rather than clamped away.
struct CapacityView {
    std::map<std::string, double> node_cpu;
    std::map<std::string, double> node_mem;
    std::map<std::string, double> link_bw;
    std::set<std::string> oversubscribed;

    bool is_oversubscribed(const std::string& id) const {
        return oversubscribed.count(id) != 0;
    }
};

// Validates and assembles the physical topology.
// Errors: DuplicateId, DanglingEndpoint, NonPositiveCapacity.
Infrastructure build_infrastructure(const std::vector<ComputeNode>& nodes,
                                    const std::vector<NetLink>& links);

// Flips one element up or down. Idempotent. Errors: UnknownElement.
void apply_status_change(Infrastructure& infra, const std::string& element_id, bool up);

// Capacity minus the effective demand of every placed VNF and routed vlink.
// Errors: InconsistentPlacement when a placement references a missing element.
CapacityView residual_capacity(const Infrastructure& infra,
                               const std::vector<Deployment>& deployments);

} // namespace sliceshift

#include "sliceshift/topology.hpp"

#include <algorithm>

#include "sliceshift/deployment.hpp"

namespace sliceshift {

const ComputeNode& Infrastructure::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) raise("UnknownElement", "no such node: " + id);
    return it->second;
}

const NetLink& Infrastructure::link(const std::string& id) const {
    auto it = links_.find(id);
    if (it == links_.end()) raise("UnknownElement", "no such link: " + id);
    return it->second;
}

const std::vector<std::string>& Infrastructure::links_at(const std::string& node_id) const {
    static const std::vector<std::string> kEmpty;
    auto it = adjacency_.find(node_id);
    return it == adjacency_.end() ? kEmpty : it->second;
}

bool Infrastructure::element_up(const std::string& id) const {
    if (auto it = nodes_.find(id); it != nodes_.end()) return it->second.up;
    if (auto it = links_.find(id); it != links_.end()) return it->second.up;
    raise("UnknownElement", "no such element: " + id);
}

Infrastructure build_infrastructure(const std::vector<ComputeNode>& nodes,
                                    const std::vector<NetLink>& links) {
    Infrastructure infra;
    for (const auto& n : nodes) {
        if (n.cpu_capacity <= 0 || n.mem_capacity <= 0)
            raise("NonPositiveCapacity", "node " + n.id + " must have positive capacities");
        if (!infra.nodes_.emplace(n.id, n).second)
            raise("DuplicateId", "node id " + n.id + " defined twice");
    }
    for (const auto& l : links) {
        if (l.bandwidth_capacity <= 0)
            raise("NonPositiveCapacity", "link " + l.id + " must have positive bandwidth");
        if (l.latency_ms < 0)
            raise("NonPositiveCapacity", "link " + l.id + " has negative latency");
        if (!infra.nodes_.count(l.node_a)) raise("DanglingEndpoint", l.node_a);
        if (!infra.nodes_.count(l.node_b)) raise("DanglingEndpoint", l.node_b);
        if (l.node_a == l.node_b)
            raise("DanglingEndpoint", "link " + l.id + " connects " + l.node_a + " to itself");
        if (infra.nodes_.count(l.id))
            raise("DuplicateId", "link id " + l.id + " clashes with a node id");
        if (!infra.links_.emplace(l.id, l).second)
            raise("DuplicateId", "link id " + l.id + " defined twice");
        infra.adjacency_[l.node_a].push_back(l.id);
        infra.adjacency_[l.node_b].push_back(l.id);
    }
    for (auto& [node, adj] : infra.adjacency_) std::sort(adj.begin(), adj.end());
    return infra;
}

void apply_status_change(Infrastructure& infra, const std::string& element_id, bool up) {
    if (auto it = infra.nodes_.find(element_id); it != infra.nodes_.end()) {
        it->second.up = up;
        return;
    }
    if (auto it = infra.links_.find(element_id); it != infra.links_.end()) {
        it->second.up = up;
        return;
    }
    raise("UnknownElement", element_id);
}

CapacityView residual_capacity(const Infrastructure& infra,
                               const std::vector<Deployment>& deployments) {
    CapacityView view;
    for (const auto& [id, n] : infra.nodes()) {
        view.node_cpu[id] = n.up ? n.cpu_capacity : 0.0;
        view.node_mem[id] = n.up ? n.mem_capacity : 0.0;
    }
    for (const auto& [id, l] : infra.links()) view.link_bw[id] = l.up ? l.bandwidth_capacity : 0.0;

    for (const auto& dep : deployments) {
        for (const auto& [vnf, node] : dep.placement.vnf_map) {
            auto cpu = view.node_cpu.find(node);
            if (cpu == view.node_cpu.end())
                raise("InconsistentPlacement",
                      dep.service_id + ": vnf " + vnf + " placed on missing node " + node);
            if (!infra.node(node).up) continue; // down elements stay at 0
            cpu->second -= dep.effective_cpu(vnf);
            view.node_mem[node] -= dep.effective_mem(vnf);
            if (cpu->second < -kCapacityTolerance ||
                view.node_mem[node] < -kCapacityTolerance)
                view.oversubscribed.insert(node);
        }
        for (const auto& [vlink, path] : dep.placement.route_map) {
            for (const auto& link_id : path) {
                auto bw = view.link_bw.find(link_id);
                if (bw == view.link_bw.end())
                    raise("InconsistentPlacement", dep.service_id + ": route for " +
                                                       vlink_name(vlink) +
                                                       " uses missing link " + link_id);
                if (!infra.link(link_id).up) continue;
                bw->second -= dep.effective_bw(vlink);
                if (bw->second < -kCapacityTolerance) view.oversubscribed.insert(link_id);
            }
        }
    }
    return view;
}

} // namespace sliceshift

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sliceshift/servicemodel.hpp"

namespace sliceshift {

using VlinkKey = std::pair<std::string, std::string>; // (src vnf, dst vnf)

inline std::string vlink_name(const VlinkKey& k) { return k.first + ">" + k.second; }

// Embedding of one VNF graph: VNF -> hosting node, vlink -> link path.
// Co-located endpoints have an empty route.
struct Placement {
    int graph_level = 0;
    std::map<std::string, std::string> vnf_map;
    std::map<VlinkKey, std::vector<std::string>> route_map;
};

// A service's active placement plus the demand snapshot needed to account
// for it. load_factor scales demands (flash crowds); bw_scale < 1 records
// bandwidth reservations reduced by the scale-only baseline.
struct Deployment {
    std::string service_id;
    int level = 0;
    Placement placement;
    std::map<std::string, double> vnf_cpu;
    std::map<std::string, double> vnf_mem;
    std::map<VlinkKey, double> vlink_bw;
    double load_factor = 1.0;
    double bw_scale = 1.0;

    double effective_cpu(const std::string& vnf_id) const {
        return vnf_cpu.at(vnf_id) * load_factor;
    }
    double effective_mem(const std::string& vnf_id) const {
        return vnf_mem.at(vnf_id) * load_factor;
    }
    double effective_bw(const VlinkKey& k) const {
        return vlink_bw.at(k) * load_factor * bw_scale;
    }
};

Deployment make_deployment(const ServiceSpec& spec, int level, Placement placement,
                           double load_factor = 1.0);

} // namespace sliceshift

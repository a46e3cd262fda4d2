#include "sliceshift/placement.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace sliceshift {

Deployment make_deployment(const ServiceSpec& spec, int level, Placement placement,
                           double load_factor) {
    Deployment dep;
    dep.service_id = spec.service_id;
    dep.level = level;
    dep.load_factor = load_factor;
    const VnfGraph& g = spec.graph(level);
    for (const auto& v : g.vnfs) {
        const VnfDescriptor& d = spec.vnf(v);
        dep.vnf_cpu[v] = d.cpu_demand;
        dep.vnf_mem[v] = d.mem_demand;
    }
    for (const auto& e : g.vlinks) dep.vlink_bw[{e.src, e.dst}] = e.bw_demand;
    dep.placement = std::move(placement);
    return dep;
}

std::optional<std::vector<std::string>> route_vlink(const Infrastructure& infra,
                                                    const CapacityView& residual,
                                                    const std::string& src_node,
                                                    const std::string& dst_node,
                                                    double bw_demand) {
    if (!infra.node(src_node).up || !infra.node(dst_node).up) return std::nullopt;
    if (src_node == dst_node) return std::vector<std::string>{};

    struct Best {
        double latency = std::numeric_limits<double>::infinity();
        std::size_t hops = 0;
        std::vector<std::string> path;
        bool reached = false;
    };
    std::map<std::string, Best> best;
    best[src_node] = Best{0, 0, {}, true};

    auto better = [](double lat, std::size_t hops, const std::vector<std::string>& path,
                     const Best& cur) {
        if (!cur.reached) return true;
        if (lat < cur.latency - 1e-12) return true;
        if (lat > cur.latency + 1e-12) return false;
        if (hops != cur.hops) return hops < cur.hops;
        return std::lexicographical_compare(path.begin(), path.end(), cur.path.begin(),
                                            cur.path.end());
    };

    // Dijkstra with a (latency, hops, lexicographic path) key; graph sizes
    // here are small enough that path copies are irrelevant.
    std::set<std::string> done;
    while (true) {
        std::string current;
        const Best* cur = nullptr;
        for (const auto& [node, b] : best) {
            if (done.count(node) || !b.reached) continue;
            if (!cur || better(b.latency, b.hops, b.path, *cur)) {
                cur = &b;
                current = node;
            }
        }
        if (!cur) break;
        if (current == dst_node) return cur->path;
        done.insert(current);

        for (const auto& link_id : infra.links_at(current)) {
            const NetLink& l = infra.link(link_id);
            if (!l.up) continue;
            auto res = residual.link_bw.find(link_id);
            if (res == residual.link_bw.end() || res->second + kCapacityTolerance < bw_demand)
                continue;
            const std::string& next = l.node_a == current ? l.node_b : l.node_a;
            if (!infra.node(next).up || done.count(next)) continue;
            std::vector<std::string> path = cur->path;
            path.push_back(link_id);
            const double lat = cur->latency + l.latency_ms;
            Best& nb = best[next];
            if (better(lat, path.size(), path, nb))
                nb = Best{lat, path.size(), std::move(path), true};
        }
    }
    return std::nullopt;
}

PlaceResult place_graph(const VnfGraph& graph, const ServiceSpec& spec,
                        const Infrastructure& infra, const CapacityView& residual,
                        const std::map<std::string, std::string>& pinned,
                        const std::map<VlinkKey, std::vector<std::string>>* keep_routes,
                        double demand_scale) {
    CapacityView local = residual;
    Placement placement;
    placement.graph_level = graph.level;

    // Vlinks grouped by destination so each is routed as soon as its second
    // endpoint lands; within a group keep catalog order.
    std::map<std::string, std::vector<const VLink*>> by_later_endpoint;
    std::map<std::string, int> position;
    for (std::size_t i = 0; i < graph.topo_order.size(); ++i)
        position[graph.topo_order[i]] = static_cast<int>(i);
    for (const auto& e : graph.vlinks) {
        const std::string& later =
            position[e.src] > position[e.dst] ? e.src : e.dst;
        by_later_endpoint[later].push_back(&e);
    }

    for (const auto& vnf_id : graph.topo_order) {
        // Vlinks that become routable once this VNF has a host; kept routes
        // are reused verbatim, their bandwidth already being reserved.
        std::vector<const VLink*> to_route;
        auto group = by_later_endpoint.find(vnf_id);
        if (group != by_later_endpoint.end()) {
            for (const VLink* e : group->second) {
                const VlinkKey key{e->src, e->dst};
                if (keep_routes) {
                    auto kept = keep_routes->find(key);
                    if (kept != keep_routes->end()) {
                        placement.route_map[key] = kept->second;
                        continue;
                    }
                }
                to_route.push_back(e);
            }
        }

        // Routes the pending vlinks from/to `host`, debiting `state`.
        auto route_group = [&](const std::string& host, CapacityView& state,
                               std::map<VlinkKey, std::vector<std::string>>& routes,
                               std::string& failed) {
            placement.vnf_map[vnf_id] = host;
            for (const VLink* e : to_route) {
                const VlinkKey key{e->src, e->dst};
                auto path = route_vlink(infra, state, placement.vnf_map.at(e->src),
                                        placement.vnf_map.at(e->dst),
                                        e->bw_demand * demand_scale);
                if (!path) {
                    failed = vlink_name(key);
                    return false;
                }
                for (const auto& link_id : *path)
                    state.link_bw[link_id] -= e->bw_demand * demand_scale;
                routes[key] = std::move(*path);
            }
            return true;
        };

        auto pin = pinned.find(vnf_id);
        if (pin != pinned.end()) {
            std::map<VlinkKey, std::vector<std::string>> routes;
            std::string failed;
            if (!route_group(pin->second, local, routes, failed))
                return PlaceResult{std::nullopt, failed};
            for (auto& [key, path] : routes) placement.route_map[key] = std::move(path);
            continue;
        }

        const VnfDescriptor& d = spec.vnf(vnf_id);
        const double cpu = d.cpu_demand * demand_scale;
        const double mem = d.mem_demand * demand_scale;

        // Fitting nodes in best-fit preference order: most residual CPU
        // first, ties by id. When the preferred node leaves a vlink
        // unroutable, fall through to the next candidate.
        std::vector<std::string> candidates;
        for (const auto& [node_id, n] : infra.nodes()) {
            if (!n.up) continue;
            if (local.node_cpu.at(node_id) + kCapacityTolerance < cpu) continue;
            if (local.node_mem.at(node_id) + kCapacityTolerance < mem) continue;
            candidates.push_back(node_id);
        }
        std::sort(candidates.begin(), candidates.end(),
                  [&](const std::string& a, const std::string& b) {
                      const double ra = local.node_cpu.at(a), rb = local.node_cpu.at(b);
                      if (std::abs(ra - rb) > kCapacityTolerance) return ra > rb;
                      return a < b;
                  });
        if (candidates.empty()) return PlaceResult{std::nullopt, vnf_id};

        bool placed = false;
        std::string last_failed_vlink;
        for (const auto& host : candidates) {
            CapacityView attempt = local;
            attempt.node_cpu[host] -= cpu;
            attempt.node_mem[host] -= mem;
            std::map<VlinkKey, std::vector<std::string>> routes;
            std::string failed;
            if (!route_group(host, attempt, routes, failed)) {
                last_failed_vlink = failed;
                continue;
            }
            local = std::move(attempt);
            for (auto& [key, path] : routes) placement.route_map[key] = std::move(path);
            placed = true;
            break;
        }
        if (!placed) {
            placement.vnf_map.erase(vnf_id);
            return PlaceResult{std::nullopt, last_failed_vlink};
        }
    }

    PlaceOutcome outcome;
    outcome.kpi = evaluate_kpis(placement, graph, spec, infra);
    outcome.placement = std::move(placement);
    return PlaceResult{std::move(outcome), ""};
}

KpiReport evaluate_kpis(const Placement& placement, const VnfGraph& graph,
                        const ServiceSpec& spec, const Infrastructure& infra) {
    for (const auto& v : graph.vnfs)
        if (!placement.vnf_map.count(v))
            raise("InvalidPlacement", spec.service_id + ": vnf " + v + " is not placed");

    auto route_latency = [&](const VlinkKey& key) {
        auto it = placement.route_map.find(key);
        if (it == placement.route_map.end())
            raise("InvalidPlacement", spec.service_id + ": vlink " + vlink_name(key) +
                                          " has no route");
        double total = 0;
        for (const auto& link_id : it->second) total += infra.link(link_id).latency_ms;
        return total;
    };

    // Longest source->sink path delay via DP over the topological order.
    std::map<std::string, double> dist;
    std::map<std::string, std::vector<const VLink*>> incoming;
    for (const auto& e : graph.vlinks) incoming[e.dst].push_back(&e);
    double worst = 0;
    for (const auto& v : graph.topo_order) {
        double in_best = 0;
        auto it = incoming.find(v);
        if (it != incoming.end()) {
            for (const VLink* e : it->second)
                in_best = std::max(in_best, dist.at(e->src) + route_latency({e->src, e->dst}));
        }
        dist[v] = in_best + spec.vnf(v).proc_delay_ms;
        worst = std::max(worst, dist[v]);
    }

    KpiReport report;
    report.end_to_end_delay_ms = worst;
    report.satisfied = worst <= graph.kpi_max_delay_ms + kCapacityTolerance;
    return report;
}

FeasibilityReport check_feasible(const std::vector<Deployment>& deployments,
                                 const Infrastructure& infra) {
    FeasibilityReport report;
    std::map<std::string, double> cpu_used, mem_used, bw_used;
    std::set<std::string> down_touched;

    for (const auto& dep : deployments) {
        for (const auto& [vnf, node] : dep.placement.vnf_map) {
            if (!infra.node(node).up) {
                down_touched.insert(node);
                continue;
            }
            cpu_used[node] += dep.effective_cpu(vnf);
            mem_used[node] += dep.effective_mem(vnf);
        }
        for (const auto& [vlink, path] : dep.placement.route_map) {
            for (const auto& link_id : path) {
                if (!infra.link(link_id).up) {
                    down_touched.insert(link_id);
                    continue;
                }
                bw_used[link_id] += dep.effective_bw(vlink);
            }
        }
    }

    for (const auto& [node_id, n] : infra.nodes()) {
        if (down_touched.count(node_id)) {
            report.violations.push_back({node_id, ViolationKind::element_down, 0});
            continue;
        }
        auto cit = cpu_used.find(node_id);
        if (cit != cpu_used.end() && cit->second > n.cpu_capacity + kCapacityTolerance)
            report.violations.push_back(
                {node_id, ViolationKind::cpu, cit->second - n.cpu_capacity});
        auto mit = mem_used.find(node_id);
        if (mit != mem_used.end() && mit->second > n.mem_capacity + kCapacityTolerance)
            report.violations.push_back(
                {node_id, ViolationKind::mem, mit->second - n.mem_capacity});
    }
    for (const auto& [link_id, l] : infra.links()) {
        if (down_touched.count(link_id)) {
            report.violations.push_back({link_id, ViolationKind::element_down, 0});
            continue;
        }
        auto bit = bw_used.find(link_id);
        if (bit != bw_used.end() && bit->second > l.bandwidth_capacity + kCapacityTolerance)
            report.violations.push_back(
                {link_id, ViolationKind::bandwidth, bit->second - l.bandwidth_capacity});
    }
    return report;
}

// --- Exhaustive oracle ------------------------------------------------------

std::size_t OptimalConfig::deployed_count() const {
    std::size_t n = 0;
    for (const auto& [id, c] : choices)
        if (c.has_value()) ++n;
    return n;
}

namespace {

// Independent shortest-feasible routing used only by the oracle: enumerates
// all simple paths and keeps the best (latency, hops, lexicographic) one
// with enough residual bandwidth.
std::optional<std::vector<std::string>> oracle_route(const Infrastructure& infra,
                                                     const std::map<std::string, double>& link_bw,
                                                     const std::string& src,
                                                     const std::string& dst, double bw) {
    if (src == dst) return std::vector<std::string>{};
    std::optional<std::vector<std::string>> best;
    double best_lat = 0;
    std::vector<std::string> path;
    std::set<std::string> visited{src};

    std::function<void(const std::string&, double)> walk = [&](const std::string& at,
                                                               double lat) {
        if (at == dst) {
            bool take = !best;
            if (best) {
                if (lat < best_lat - 1e-12)
                    take = true;
                else if (lat <= best_lat + 1e-12) {
                    if (path.size() != best->size())
                        take = path.size() < best->size();
                    else
                        take = std::lexicographical_compare(path.begin(), path.end(),
                                                            best->begin(), best->end());
                }
            }
            if (take) {
                best = path;
                best_lat = lat;
            }
            return;
        }
        for (const auto& link_id : infra.links_at(at)) {
            const NetLink& l = infra.link(link_id);
            if (!l.up) continue;
            if (link_bw.at(link_id) + kCapacityTolerance < bw) continue;
            const std::string& next = l.node_a == at ? l.node_b : l.node_a;
            if (!infra.node(next).up || visited.count(next)) continue;
            visited.insert(next);
            path.push_back(link_id);
            walk(next, lat + l.latency_ms);
            path.pop_back();
            visited.erase(next);
        }
    };
    walk(src, 0);
    return best;
}

struct OracleState {
    std::map<std::string, double> cpu, mem, bw;
};

// Lexicographic tie rank: deployed level, or a large rank when undeployed.
int level_rank(const std::optional<OracleChoice>& c) {
    return c ? c->level : 1'000'000;
}

} // namespace

OptimalConfig exhaustive_oracle(const std::vector<ServiceSpec>& services,
                                const Infrastructure& infra) {
    std::vector<const ServiceSpec*> ordered;
    for (const auto& s : services) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const ServiceSpec* a, const ServiceSpec* b) {
                  return a->service_id < b->service_id;
              });

    std::size_t up_nodes = 0;
    for (const auto& [id, n] : infra.nodes())
        if (n.up) ++up_nodes;

    // Guard: combinations = product over services of
    // (1 + sum over graphs of up_nodes^|vnfs|).
    double combos = 1;
    for (const ServiceSpec* s : ordered) {
        double per_service = 1;
        for (const auto& g : s->graphs)
            per_service += std::pow(static_cast<double>(up_nodes),
                                    static_cast<double>(g.vnfs.size()));
        combos *= per_service;
        if (combos > 1e6)
            raise("OracleTooLarge", "instance exceeds 1e6 combinations");
    }

    std::vector<std::string> up_node_ids;
    for (const auto& [id, n] : infra.nodes())
        if (n.up) up_node_ids.push_back(id);

    OptimalConfig best;
    best.total_revenue_per_hour = 0;
    for (const ServiceSpec* s : ordered) best.choices[s->service_id] = std::nullopt;
    bool best_set = true; // the all-undeployed configuration is always feasible

    std::map<std::string, std::optional<OracleChoice>> current;

    auto consider = [&](double revenue) {
        const auto current_count = [&] {
            std::size_t n = 0;
            for (const auto& [id, c] : current)
                if (c) ++n;
            return n;
        }();
        bool take = !best_set;
        if (!take) {
            if (revenue > best.total_revenue_per_hour + 1e-9)
                take = true;
            else if (revenue >= best.total_revenue_per_hour - 1e-9) {
                if (current_count != best.deployed_count())
                    take = current_count > best.deployed_count();
                else {
                    for (const auto& [id, c] : current) {
                        const int lhs = level_rank(c);
                        const int rhs = level_rank(best.choices.at(id));
                        if (lhs != rhs) {
                            take = lhs < rhs;
                            break;
                        }
                    }
                }
            }
        }
        if (take) {
            best.total_revenue_per_hour = revenue;
            best.choices = current;
            best_set = true;
        }
    };

    // Recursive enumeration over services; per service over {undeployed,
    // every level}; per level over every VNF->node assignment.
    std::function<void(std::size_t, OracleState&, double)> enumerate_service =
        [&](std::size_t idx, OracleState& state, double revenue) {
            if (idx == ordered.size()) {
                consider(revenue);
                return;
            }
            const ServiceSpec& svc = *ordered[idx];

            current[svc.service_id] = std::nullopt;
            enumerate_service(idx + 1, state, revenue);

            for (const auto& g : svc.graphs) {
                const std::vector<std::string>& vnfs = g.topo_order;
                std::vector<std::string> assignment(vnfs.size());

                std::function<void(std::size_t, OracleState&)> assign =
                    [&](std::size_t vi, OracleState& st) {
                        if (vi == vnfs.size()) {
                            // Route every vlink by shortest feasible path.
                            OracleState routed = st;
                            Placement placement;
                            placement.graph_level = g.level;
                            for (std::size_t k = 0; k < vnfs.size(); ++k)
                                placement.vnf_map[vnfs[k]] = assignment[k];
                            for (const auto& e : g.vlinks) {
                                auto path = oracle_route(infra, routed.bw,
                                                         placement.vnf_map.at(e.src),
                                                         placement.vnf_map.at(e.dst),
                                                         e.bw_demand);
                                if (!path) return;
                                for (const auto& link_id : *path)
                                    routed.bw[link_id] -= e.bw_demand;
                                placement.route_map[{e.src, e.dst}] = std::move(*path);
                            }
                            current[svc.service_id] = OracleChoice{g.level, std::move(placement)};
                            enumerate_service(idx + 1, routed, revenue + g.revenue_per_hour);
                            current[svc.service_id] = std::nullopt;
                            return;
                        }
                        const VnfDescriptor& d = svc.vnf(vnfs[vi]);
                        for (const auto& node_id : up_node_ids) {
                            if (st.cpu.at(node_id) + kCapacityTolerance < d.cpu_demand) continue;
                            if (st.mem.at(node_id) + kCapacityTolerance < d.mem_demand) continue;
                            st.cpu[node_id] -= d.cpu_demand;
                            st.mem[node_id] -= d.mem_demand;
                            assignment[vi] = node_id;
                            assign(vi + 1, st);
                            st.cpu[node_id] += d.cpu_demand;
                            st.mem[node_id] += d.mem_demand;
                        }
                    };
                assign(0, state);
            }
        };

    OracleState initial;
    for (const auto& [id, n] : infra.nodes()) {
        initial.cpu[id] = n.up ? n.cpu_capacity : 0;
        initial.mem[id] = n.up ? n.mem_capacity : 0;
    }
    for (const auto& [id, l] : infra.links()) initial.bw[id] = l.up ? l.bandwidth_capacity : 0;
    for (const ServiceSpec* s : ordered) current[s->service_id] = std::nullopt;

    enumerate_service(0, initial, 0);
    return best;
}

} // namespace sliceshift

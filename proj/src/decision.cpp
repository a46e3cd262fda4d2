#include "sliceshift/decision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sliceshift {

const char* to_string(Policy p) {
    switch (p) {
    case Policy::payoff: return "payoff";
    case Policy::qoe: return "qoe";
    case Policy::reaction: return "reaction";
    case Policy::scale_only: return "scale_only";
    }
    return "?";
}

Policy policy_from_string(const std::string& s) {
    if (s == "payoff") return Policy::payoff;
    if (s == "qoe") return Policy::qoe;
    if (s == "reaction") return Policy::reaction;
    if (s == "scale_only") return Policy::scale_only;
    raise("ParseError", "unknown policy: " + s);
}

const char* to_string(ActionKind kind) {
    switch (kind) {
    case ActionKind::vnf_teardown: return "vnf_teardown";
    case ActionKind::vm_migrate: return "vm_migrate";
    case ActionKind::vnf_instantiate: return "vnf_instantiate";
    case ActionKind::route_update: return "route_update";
    }
    return "?";
}

int count_reconfig_ops(const TransitionPlan& plan) {
    return static_cast<int>(plan.removals.size() + plan.instantiations.size() +
                            plan.route_removals.size() + plan.route_additions.size() +
                            plan.ripple_migrations.size());
}

void stamp_timeline(TransitionPlan& plan, const DelayConfig& delays, SplitMix64& rng) {
    plan.actions.clear();
    long next_id = 1;
    auto add = [&](ActionKind kind, int phase, const std::string& subject) {
        PlanAction a;
        a.id = next_id++;
        a.kind = kind;
        a.phase = phase;
        a.subject = subject;
        a.duration_s = sample_delay(kind, delays, rng);
        plan.actions.push_back(a);
    };

    auto removals = plan.removals;
    std::sort(removals.begin(), removals.end());
    for (const auto& v : removals) add(ActionKind::vnf_teardown, 0, v);
    for (const auto& m : plan.ripple_migrations)
        add(ActionKind::vm_migrate, 1, m.service_id + ":" + m.vnf_id);
    auto inst = plan.instantiations;
    std::sort(inst.begin(), inst.end());
    for (const auto& [v, node] : inst) add(ActionKind::vnf_instantiate, 2, v + "@" + node);
    auto route_names = [](const std::vector<std::pair<VlinkKey, std::vector<std::string>>>& rts) {
        std::vector<std::string> names;
        for (const auto& [k, path] : rts) names.push_back(vlink_name(k));
        std::sort(names.begin(), names.end());
        return names;
    };
    for (const auto& name : route_names(plan.route_removals))
        add(ActionKind::route_update, 3, "del " + name);
    for (const auto& name : route_names(plan.route_additions))
        add(ActionKind::route_update, 3, "add " + name);

    double offset = 0;
    for (int phase = 0; phase <= 3; ++phase) {
        double phase_max = 0;
        for (auto& a : plan.actions) {
            if (a.phase != phase) continue;
            a.start_s = offset;
            phase_max = std::max(phase_max, a.duration_s);
        }
        offset += phase_max;
    }
    plan.total_duration_s = offset;
}

// --- ResourcePlanner --------------------------------------------------------

ResourcePlanner::ResourcePlanner(const Infrastructure& infra,
                                 const std::map<std::string, Deployment>& active,
                                 const ServiceCatalog& catalog, const DelayConfig& delays,
                                 int ripple_depth_limit,
                                 const std::map<std::string, double>& load_factors)
    : infra_(infra), active_(active), catalog_(catalog), delays_(delays),
      ripple_depth_limit_(ripple_depth_limit), load_factors_(load_factors) {
    std::vector<Deployment> deps;
    for (const auto& [id, d] : active_) deps.push_back(d);
    residual_ = residual_capacity(infra_, deps);
}

double ResourcePlanner::load_factor_of(const std::string& service) const {
    auto it = active_.find(service);
    if (it != active_.end()) return it->second.load_factor;
    auto lf = load_factors_.find(service);
    return lf == load_factors_.end() ? 1.0 : lf->second;
}

namespace {

CapacityView residual_with_overrides(const Infrastructure& infra,
                                     const std::map<std::string, Deployment>& active,
                                     const std::map<std::string, Placement>& migrated) {
    std::vector<Deployment> deps;
    for (const auto& [id, d] : active) {
        deps.push_back(d);
        auto it = migrated.find(id);
        if (it != migrated.end()) deps.back().placement = it->second;
    }
    return residual_capacity(infra, deps);
}

bool path_usable(const Infrastructure& infra, const CapacityView& residual,
                 const std::vector<std::string>& path) {
    for (const auto& link_id : path) {
        if (!infra.link(link_id).up) return false;
        auto it = residual.link_bw.find(link_id);
        if (it == residual.link_bw.end() || it->second < -kCapacityTolerance) return false;
    }
    return true;
}

} // namespace

ResourcePlanner::PlanBase ResourcePlanner::plan_base(const std::string& service, int from_level,
                                                     int to_level, CapacityView& local) const {
    PlanBase base;
    const ServiceSpec& spec = catalog_.at(service);
    auto cur_it = active_.find(service);
    const Deployment* cur =
        (from_level != kNotDeployedLevel && cur_it != active_.end()) ? &cur_it->second : nullptr;
    if (!cur) return base;
    const bool undeploy = to_level == kNotDeployedLevel;

    // Shared VNFs stay pinned on their current (up) hosts. A repair
    // (from == to) additionally re-places anything sitting on an
    // oversubscribed element.
    if (!undeploy) {
        const VnfGraph& from_g = spec.graph(from_level);
        const VnfGraph& to_g = spec.graph(to_level);
        const bool repair = from_level == to_level;
        for (const auto& v : shared_vnfs(from_g, to_g)) {
            auto placed = cur->placement.vnf_map.find(v);
            if (placed == cur->placement.vnf_map.end()) continue;
            const std::string& host = placed->second;
            if (!infra_.node(host).up) continue;
            if (repair && local.is_oversubscribed(host)) continue;
            base.pinned[v] = host;
        }
        // Routes kept as-is: same vlink in both graphs, same demand, both
        // endpoints pinned, and the old path still healthy.
        for (const auto& e : to_g.vlinks) {
            if (!base.pinned.count(e.src) || !base.pinned.count(e.dst)) continue;
            bool same = false;
            for (const auto& f : from_g.vlinks)
                if (f.src == e.src && f.dst == e.dst &&
                    std::abs(f.bw_demand - e.bw_demand) <= kCapacityTolerance)
                    same = true;
            if (!same) continue;
            auto old_route = cur->placement.route_map.find({e.src, e.dst});
            if (old_route == cur->placement.route_map.end()) continue;
            if (!path_usable(infra_, local, old_route->second)) continue;
            base.keep[{e.src, e.dst}] = old_route->second;
        }
    }

    // Removals free their resources before anything new is placed.
    for (const auto& [v, host] : cur->placement.vnf_map) {
        if (base.pinned.count(v)) continue;
        base.removals.push_back(v);
        if (infra_.node(host).up) {
            local.node_cpu[host] += cur->effective_cpu(v);
            local.node_mem[host] += cur->effective_mem(v);
        }
    }
    std::sort(base.removals.begin(), base.removals.end());
    for (const auto& [vlink, path] : cur->placement.route_map) {
        if (base.keep.count(vlink)) continue;
        if (!path.empty()) base.route_removals.emplace_back(vlink, path);
        for (const auto& link_id : path)
            if (infra_.link(link_id).up) local.link_bw[link_id] += cur->effective_bw(vlink);
    }
    return base;
}

PlanResult ResourcePlanner::build_plan(const std::string& service, int from_level, int to_level,
                                       const std::vector<MigrationStep>& migrations,
                                       const std::map<std::string, Placement>& migrated,
                                       SplitMix64& rng) const {
    const ServiceSpec& spec = catalog_.at(service);
    const bool undeploy = to_level == kNotDeployedLevel;
    const double load = load_factor_of(service);

    CapacityView local = migrated.empty() ? residual_
                                          : residual_with_overrides(infra_, active_, migrated);

    TransitionPlan plan;
    plan.service_id = service;
    plan.from_level = from_level;
    plan.to_level = to_level;
    plan.ripple_migrations = migrations;
    plan.migrated_placements = migrated;
    plan.is_undeploy = undeploy;

    PlanBase base = plan_base(service, from_level, to_level, local);
    plan.removals = base.removals;
    plan.route_removals = base.route_removals;

    if (!undeploy) {
        const VnfGraph& to_g = spec.graph(to_level);
        PlaceResult placed = place_graph(to_g, spec, infra_, local, base.pinned, &base.keep, load);
        if (!placed.ok())
            return PlanResult{std::nullopt, "PlanFailed: cannot place " + placed.infeasible_item,
                              placed.infeasible_item};
        plan.target_placement = placed.outcome->placement;
        for (const auto& v : to_g.vnfs)
            if (!base.pinned.count(v))
                plan.instantiations.emplace_back(v, plan.target_placement.vnf_map.at(v));
        std::sort(plan.instantiations.begin(), plan.instantiations.end());
        for (const auto& [vlink, path] : plan.target_placement.route_map)
            if (!base.keep.count(vlink) && !path.empty())
                plan.route_additions.emplace_back(vlink, path);
    }

    stamp_timeline(plan, delays_, rng);
    return PlanResult{std::move(plan), "", ""};
}

PlanResult ResourcePlanner::plan_transition(const std::string& service, int from_level,
                                            int to_level, SplitMix64& rng) const {
    const ServiceSpec& spec = catalog_.at(service);
    if (from_level != kNotDeployedLevel && !spec.has_level(from_level))
        raise("UnknownElement", service + ": no level " + std::to_string(from_level));
    if (to_level != kNotDeployedLevel && !spec.has_level(to_level))
        raise("UnknownElement", service + ": no level " + std::to_string(to_level));
    return build_plan(service, from_level, to_level, {}, {}, rng);
}

PlanResult ResourcePlanner::plan_deploy(const std::string& service, int level,
                                        SplitMix64& rng) const {
    return build_plan(service, kNotDeployedLevel, level, {}, {}, rng);
}

PlanResult ResourcePlanner::plan_undeploy(const std::string& service, SplitMix64& rng) const {
    auto it = active_.find(service);
    if (it == active_.end()) raise("UnknownElement", service + " has no active deployment");
    return build_plan(service, it->second.level, kNotDeployedLevel, {}, {}, rng);
}

namespace {

struct ForeignVnf {
    std::string service_id;
    std::string vnf_id;
    double cpu = 0;
    double mem = 0;
};

} // namespace

bool ResourcePlanner::find_migrations(const std::string& service, int from_level, int to_level,
                                      int depth_limit, SplitMix64& rng,
                                      std::vector<MigrationStep>& migrations,
                                      std::map<std::string, Placement>& migrated) const {
    constexpr std::size_t kSubsetSearchCap = 12;

    // Migrations enact after the removals phase, so every shortfall and fit
    // check runs against the post-removal world, not the current one.
    auto plan_residual = [&]() -> CapacityView {
        CapacityView local = residual_with_overrides(infra_, active_, migrated);
        plan_base(service, from_level, to_level, local);
        return local;
    };

    auto host_order = [&](const CapacityView& res) {
        std::vector<std::string> nodes;
        for (const auto& [id, n] : infra_.nodes())
            if (n.up) nodes.push_back(id);
        std::sort(nodes.begin(), nodes.end(), [&](const std::string& a, const std::string& b) {
            const double ra = res.node_cpu.at(a), rb = res.node_cpu.at(b);
            if (std::abs(ra - rb) > kCapacityTolerance) return ra > rb;
            return a < b;
        });
        return nodes;
    };

    auto foreign_on = [&](const std::string& node) {
        std::set<std::string> already_moved;
        for (const auto& m : migrations) already_moved.insert(m.service_id + ":" + m.vnf_id);
        std::vector<ForeignVnf> list;
        for (const auto& [sid, dep] : active_) {
            if (sid == service) continue; // only services not being shifted
            const Placement& pl = migrated.count(sid) ? migrated.at(sid) : dep.placement;
            for (const auto& [vnf, host] : pl.vnf_map) {
                if (host != node || already_moved.count(sid + ":" + vnf)) continue;
                list.push_back(
                    ForeignVnf{sid, vnf, dep.effective_cpu(vnf), dep.effective_mem(vnf)});
            }
        }
        std::sort(list.begin(), list.end(), [](const ForeignVnf& a, const ForeignVnf& b) {
            if (std::abs(a.cpu - b.cpu) > kCapacityTolerance) return a.cpu < b.cpu;
            if (a.service_id != b.service_id) return a.service_id < b.service_id;
            return a.vnf_id < b.vnf_id;
        });
        return list;
    };

    // relocate_try: move one foreign VNF onto one specific host, re-routing
    // its vlinks; the migrated service must stay feasible and keep its KPI.
    // A shortage on the chosen host may itself be resolved one level deeper.
    std::function<bool(const std::string&, const std::string&, const std::string&,
                       std::set<std::string>, int)>
        relocate_try;
    // free_subsets: free enough cpu/mem on `node` by relocating exactly
    // `size` of the foreign VNFs hosted there; smallest-demand subsets are
    // explored first and member targets are assigned with backtracking.
    std::function<bool(const std::string&, double, double, std::set<std::string>, int,
                       std::size_t)>
        free_subsets;

    relocate_try = [&](const std::string& svc, const std::string& vnf, const std::string& target,
                       std::set<std::string> forbidden, int depth) -> bool {
        const Deployment& dep = active_.at(svc);
        const ServiceSpec& spec = catalog_.at(svc);
        const VnfGraph& graph = spec.graph(dep.level);
        const Placement base = migrated.count(svc) ? migrated.at(svc) : dep.placement;
        const std::string from_node = base.vnf_map.at(vnf);
        if (target == from_node || forbidden.count(target) || !infra_.node(target).up)
            return false;
        const double need_cpu = dep.effective_cpu(vnf);
        const double need_mem = dep.effective_mem(vnf);

        auto saved_migrations = migrations;
        auto saved_migrated = migrated;
        auto rollback = [&] {
            migrations = saved_migrations;
            migrated = saved_migrated;
        };

        CapacityView res = plan_residual();
        bool fits = res.node_cpu.at(target) + kCapacityTolerance >= need_cpu &&
                    res.node_mem.at(target) + kCapacityTolerance >= need_mem;
        if (!fits && depth > 1) {
            auto nested_forbidden = forbidden;
            nested_forbidden.insert(from_node);
            nested_forbidden.insert(target);
            for (std::size_t size = 1; size <= kSubsetSearchCap && !fits; ++size)
                fits = free_subsets(target, need_cpu, need_mem, nested_forbidden, depth - 1, size);
            if (fits) {
                CapacityView again = plan_residual();
                fits = again.node_cpu.at(target) + kCapacityTolerance >= need_cpu &&
                       again.node_mem.at(target) + kCapacityTolerance >= need_mem;
            }
        }
        if (!fits) {
            rollback();
            return false;
        }

        Placement candidate = base;
        candidate.vnf_map[vnf] = target;
        std::vector<VLink> affected;
        for (const auto& e : graph.vlinks)
            if (e.src == vnf || e.dst == vnf) affected.push_back(e);
        for (const auto& e : affected) candidate.route_map.erase({e.src, e.dst});

        migrated[svc] = candidate;
        CapacityView route_res = plan_residual();
        bool ok = true;
        for (const auto& e : affected) {
            const VlinkKey key{e.src, e.dst};
            auto path = route_vlink(infra_, route_res, candidate.vnf_map.at(e.src),
                                    candidate.vnf_map.at(e.dst), dep.effective_bw(key));
            if (!path) {
                ok = false;
                break;
            }
            for (const auto& link_id : *path) route_res.link_bw[link_id] -= dep.effective_bw(key);
            candidate.route_map[key] = std::move(*path);
        }
        if (ok) ok = evaluate_kpis(candidate, graph, spec, infra_).satisfied;
        if (!ok) {
            rollback();
            return false;
        }
        migrated[svc] = candidate;
        migrations.push_back(MigrationStep{svc, vnf, from_node, target});
        return true;
    };

    free_subsets = [&](const std::string& node, double need_cpu, double need_mem,
                       std::set<std::string> forbidden, int depth, std::size_t size) -> bool {
        if (depth <= 0) return false;
        CapacityView res = plan_residual();
        const double cpu_short = need_cpu - res.node_cpu.at(node);
        const double mem_short = need_mem - res.node_mem.at(node);
        if (cpu_short <= kCapacityTolerance && mem_short <= kCapacityTolerance) return true;

        const std::vector<ForeignVnf> cands = foreign_on(node);
        if (cands.size() < size) return false;
        forbidden.insert(node);

        const std::vector<std::string> targets = host_order(res);
        std::vector<std::size_t> idx(size);

        // Backtracking assignment of subset members to hosts.
        std::function<bool(std::size_t)> assign = [&](std::size_t member) -> bool {
            if (member == size) return true;
            const ForeignVnf& f = cands[idx[member]];
            for (const auto& target : targets) {
                auto saved_migrations = migrations;
                auto saved_migrated = migrated;
                if (!relocate_try(f.service_id, f.vnf_id, target, forbidden, depth)) continue;
                if (assign(member + 1)) return true;
                migrations = saved_migrations;
                migrated = saved_migrated;
            }
            return false;
        };

        std::function<bool(std::size_t, std::size_t)> combos = [&](std::size_t pos,
                                                                   std::size_t start) -> bool {
            if (pos == size) {
                double cpu_free = 0, mem_free = 0;
                for (auto i : idx) {
                    cpu_free += cands[i].cpu;
                    mem_free += cands[i].mem;
                }
                if (cpu_free + kCapacityTolerance < cpu_short ||
                    mem_free + kCapacityTolerance < mem_short)
                    return false;
                auto saved_migrations = migrations;
                auto saved_migrated = migrated;
                if (assign(0)) return true;
                migrations = saved_migrations;
                migrated = saved_migrated;
                return false;
            }
            for (std::size_t i = start; i < cands.size(); ++i) {
                idx[pos] = i;
                if (combos(pos + 1, i + 1)) return true;
            }
            return false;
        };
        return combos(0, 0);
    };

    // Iterate: build the plan, find the first unplaceable VNF, free room
    // for it somewhere, retry. Minimality: subset sizes grow before the
    // target-node preference order advances.
    for (int round = 0; round < 16; ++round) {
        SplitMix64 probe = rng;
        PlanResult attempt = build_plan(service, from_level, to_level, migrations, migrated, probe);
        if (attempt.ok()) return true;
        const std::string& item = attempt.fail_item;
        if (item.empty() || item.find('>') != std::string::npos)
            return false; // bandwidth shortages are not fixable by VNF moves
        const ServiceSpec& spec = catalog_.at(service);
        const VnfDescriptor& d = spec.vnf(item);
        const double load = load_factor_of(service);
        const double need_cpu = d.cpu_demand * load;
        const double need_mem = d.mem_demand * load;

        CapacityView res = plan_residual();
        const std::size_t before = migrations.size();
        bool freed = false;
        for (std::size_t size = 1; size <= kSubsetSearchCap && !freed; ++size)
            for (const auto& node : host_order(res)) {
                if (free_subsets(node, need_cpu, need_mem, {}, depth_limit, size)) {
                    freed = true;
                    break;
                }
            }
        if (!freed || migrations.size() == before) return false;
    }
    return false;
}
PlanResult ResourcePlanner::resolve_ripple(const std::string& service, int from_level,
                                           int to_level, int depth_limit, SplitMix64& rng) const {
    std::vector<MigrationStep> migrations;
    std::map<std::string, Placement> migrated;
    if (!find_migrations(service, from_level, to_level, depth_limit, rng, migrations, migrated))
        return PlanResult{std::nullopt, "RippleExhausted", ""};
    return build_plan(service, from_level, to_level, migrations, migrated, rng);
}

PlanResult ResourcePlanner::plan_with_ripple(const std::string& service, int from_level,
                                             int to_level, SplitMix64& rng) const {
    PlanResult direct = from_level == kNotDeployedLevel
                            ? plan_deploy(service, to_level, rng)
                            : plan_transition(service, from_level, to_level, rng);
    if (direct.ok()) return direct;
    return resolve_ripple(service, from_level, to_level, ripple_depth_limit_, rng);
}

PlanResult ResourcePlanner::plan_forced(const std::string& service, SplitMix64& rng) const {
    auto it = active_.find(service);
    if (it == active_.end()) raise("UnknownElement", service + " has no active deployment");
    const Deployment& cur = it->second;
    const ServiceSpec& spec = catalog_.at(service);
    const VnfGraph& graph = spec.graph(cur.level);

    TransitionPlan plan;
    plan.service_id = service;
    plan.from_level = cur.level;
    plan.to_level = cur.level;
    plan.forced = true;

    Placement target = cur.placement;
    std::set<std::string> moved;
    CapacityView local = residual_;
    for (const auto& [vnf, host] : cur.placement.vnf_map) {
        if (infra_.node(host).up) continue;
        // Re-host on the up node with the most residual CPU, fitting or not.
        std::string best;
        double best_cpu = -std::numeric_limits<double>::infinity();
        for (const auto& [id, n] : infra_.nodes()) {
            if (!n.up) continue;
            const double rc = local.node_cpu.at(id);
            if (rc > best_cpu + kCapacityTolerance) {
                best = id;
                best_cpu = rc;
            }
        }
        if (best.empty()) return PlanResult{std::nullopt, "PlanFailed: no up node", vnf};
        local.node_cpu[best] -= cur.effective_cpu(vnf);
        local.node_mem[best] -= cur.effective_mem(vnf);
        target.vnf_map[vnf] = best;
        moved.insert(vnf);
        plan.removals.push_back(vnf);
        plan.instantiations.emplace_back(vnf, best);
    }

    // Ignore bandwidth while re-routing around down elements.
    CapacityView unconstrained = residual_;
    for (auto& [id, bw] : unconstrained.link_bw)
        bw = infra_.link(id).up ? 1e18 : 0.0;

    for (const auto& e : graph.vlinks) {
        const VlinkKey key{e.src, e.dst};
        auto old_route = cur.placement.route_map.find(key);
        const bool endpoints_moved = moved.count(e.src) || moved.count(e.dst);
        bool broken = old_route == cur.placement.route_map.end();
        if (!broken)
            for (const auto& link_id : old_route->second)
                if (!infra_.link(link_id).up) broken = true;
        if (!endpoints_moved && !broken) continue;
        auto path = route_vlink(infra_, unconstrained, target.vnf_map.at(e.src),
                                target.vnf_map.at(e.dst), 0.0);
        if (!path)
            return PlanResult{std::nullopt, "PlanFailed: no up path for " + vlink_name(key),
                              vlink_name(key)};
        if (old_route != cur.placement.route_map.end() && !old_route->second.empty())
            plan.route_removals.emplace_back(key, old_route->second);
        if (!path->empty()) plan.route_additions.emplace_back(key, *path);
        target.route_map[key] = std::move(*path);
    }

    std::sort(plan.removals.begin(), plan.removals.end());
    std::sort(plan.instantiations.begin(), plan.instantiations.end());
    plan.target_placement = std::move(target);
    plan.target_placement.graph_level = cur.level;
    stamp_timeline(plan, delays_, rng);
    return PlanResult{std::move(plan), "", ""};
}

// --- Service layer ----------------------------------------------------------

ShortageAssessment detect_shortage(const std::vector<std::pair<Consumer, Alert>>& notifications,
                                   const std::map<std::string, Deployment>& active_deployments,
                                   const std::map<std::string, bool>& element_status,
                                   const std::vector<AlertRule>& rules) {
    ShortageAssessment assessment;
    auto source_of = [&](const std::string& rule_id) -> std::optional<SourceKind> {
        for (const auto& r : rules)
            if (r.rule_id == rule_id) return r.source;
        return std::nullopt;
    };
    auto touches = [](const Deployment& dep, const std::string& element) {
        for (const auto& [vnf, node] : dep.placement.vnf_map)
            if (node == element) return true;
        for (const auto& [vlink, path] : dep.placement.route_map)
            for (const auto& link_id : path)
                if (link_id == element) return true;
        return false;
    };

    for (const auto& [consumer, alert] : notifications) {
        if (!alert.raised) continue;
        assessment.triggering.emplace_back(consumer, alert);
        auto source = source_of(alert.rule_id);
        if (!source) continue;
        if (*source == SourceKind::service_delay || *source == SourceKind::app_custom) {
            assessment.affected_services.insert(alert.subject);
        } else {
            if (element_status.count(alert.subject))
                assessment.overload_by_element[alert.subject] += 1;
            for (const auto& [sid, dep] : active_deployments)
                if (touches(dep, alert.subject)) assessment.affected_services.insert(sid);
        }
    }
    return assessment;
}

SelectOutcome select_shift_down(const PolicyConfig& policy, const ShortageAssessment& assessment,
                                const ServiceCatalog& catalog, const SlaState& sla,
                                const std::map<std::string, int>& levels,
                                const std::set<std::string>& excluded, double now,
                                double minimum_dwell_s, PlannerIface& planner) {
    SelectOutcome outcome;
    if (assessment.empty()) return outcome;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (const auto& [sid, spec] : catalog) {
        auto lv = levels.find(sid);
        if (lv == levels.end() || lv->second == kNotDeployedLevel) continue;
        const int level = lv->second;
        if (level >= spec.deepest_level()) continue; // no deeper graph
        if (excluded.count(sid)) continue;
        DownshiftVerdict verdict =
            sla_allows_downshift(spec, sla, now, levels, catalog, minimum_dwell_s);
        if (!verdict.allowed) continue;

        double key = 0;
        switch (policy.policy) {
        case Policy::payoff:
            key = spec.graph(level).revenue_per_hour - spec.graph(level + 1).revenue_per_hour;
            break;
        case Policy::qoe:
            key = static_cast<double>(spec.popularity);
            break;
        case Policy::reaction: {
            PlanResult plan = planner.try_plan(sid, level, level + 1, true);
            key = plan.ok() ? static_cast<double>(count_reconfig_ops(*plan.plan)) : kInf;
            break;
        }
        case Policy::scale_only:
            key = kInf; // the baseline never shifts
            break;
        }
        outcome.candidate_keys.emplace_back(sid, key);
    }

    std::string best;
    double best_key = kInf;
    bool have = false;
    for (const auto& [sid, key] : outcome.candidate_keys) {
        if (!have || key < best_key - 1e-12 ||
            (std::abs(key - best_key) <= 1e-12 && sid < best)) {
            best = sid;
            best_key = key;
            have = true;
        }
    }
    if (have && best_key < kInf) {
        ShiftDecision d;
        d.service_id = best;
        d.from_level = levels.at(best);
        d.to_level = d.from_level + 1;
        d.down = true;
        d.reason = to_string(policy.policy);
        outcome.decision = d;
    }
    return outcome;
}

std::string choose_sla_violation(const std::vector<ViolationCandidate>& candidates) {
    if (candidates.empty()) raise("NoServices", "no violation candidates");
    std::vector<ViolationCandidate> sorted = candidates;
    std::sort(sorted.begin(), sorted.end(),
              [](const ViolationCandidate& a, const ViolationCandidate& b) {
                  return a.service_id < b.service_id;
              });
    const ViolationCandidate* best = nullptr;
    for (const auto& c : sorted) {
        if (c.penalty.safety) continue;
        if (!best || c.penalty.amount < best->penalty.amount - 1e-12) best = &c;
    }
    if (best) return best->service_id;
    return sorted.front().service_id; // every candidate is SAFETY: lexicographic fallback
}

std::vector<ShiftDecision> consider_shift_up(const ServiceCatalog& catalog, const SlaState& sla,
                                             const std::map<std::string, int>& levels, double now,
                                             double hysteresis_s, PlannerIface& planner) {
    struct Candidate {
        ShiftDecision decision;
        double gain = 0;
    };
    std::vector<Candidate> candidates;

    for (const auto& [sid, spec] : catalog) {
        auto lv = levels.find(sid);
        if (lv == levels.end()) continue;
        const int level = lv->second;
        int target;
        if (level == kNotDeployedLevel)
            target = 0;
        else if (level > 0)
            target = level - 1;
        else
            continue;

        const ServiceSlaRecord* rec = sla.find(sid);
        const double since = rec ? rec->level_since : 0;
        if (now - since + kSlaTimeTolerance < hysteresis_s) continue;

        if (target == 0) {
            // Returning to the primary graph is only allowed once every
            // higher-priority same-vertical peer already runs its primary.
            bool blocked = false;
            for (const auto& [peer_id, peer] : catalog) {
                if (peer_id == sid || peer.vertical_id != spec.vertical_id) continue;
                if (peer.sla.priority <= spec.sla.priority) continue;
                auto pl = levels.find(peer_id);
                if (pl == levels.end() || pl->second != 0) {
                    blocked = true;
                    break;
                }
            }
            if (blocked) continue;
        }

        PlanResult trial = planner.try_plan(sid, level, target, false);
        if (!trial.ok()) continue;

        Candidate c;
        c.decision.service_id = sid;
        c.decision.from_level = level;
        c.decision.to_level = target;
        c.decision.down = false;
        const double from_rate =
            level == kNotDeployedLevel ? 0.0 : spec.graph(level).revenue_per_hour;
        c.gain = spec.graph(target).revenue_per_hour - from_rate;
        c.decision.reason = "shift_up";
        candidates.push_back(std::move(c));
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (std::abs(a.gain - b.gain) > 1e-12) return a.gain > b.gain;
        return a.decision.service_id < b.decision.service_id;
    });
    std::vector<ShiftDecision> out;
    for (auto& c : candidates) out.push_back(std::move(c.decision));
    return out;
}

} // namespace sliceshift

#pragma once

// Independent test oracles. Everything here recomputes expected values by
// brute force, on purpose via different algorithms than the library uses.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sliceshift/decision.hpp"
#include "sliceshift/monitor.hpp"
#include "sliceshift/placement.hpp"
#include "sliceshift/servicemodel.hpp"
#include "sliceshift/topology.hpp"

namespace oracles {

using namespace sliceshift;

// Clipped secondary seconds by direct interval sweep (exact clipping, no
// accumulator reuse).
inline double clip_secondary_seconds(const std::vector<SlaInterval>& intervals, double now,
                                     double window) {
    double total = 0;
    for (const auto& iv : intervals) {
        if (iv.entry <= 0) continue;
        const double a = std::max(iv.t0, now - window);
        const double b = std::min(iv.t1, now);
        if (b > a) total += b - a;
    }
    return total;
}

// Same quantity from a discrete 0.5 s midpoint sweep; agrees to within one
// grid step for any interval set.
inline double sweep_secondary_seconds(const std::vector<SlaInterval>& intervals, double now,
                                      double window) {
    const double step = 0.5;
    double total = 0;
    for (double t = std::max(0.0, now - window) + step / 2; t < now; t += step) {
        for (const auto& iv : intervals)
            if (iv.entry > 0 && t >= iv.t0 && t < iv.t1) {
                total += step;
                break;
            }
    }
    return total;
}

// Every simple path between two nodes, as link-id sequences.
inline std::vector<std::vector<std::string>> all_simple_paths(const Infrastructure& infra,
                                                              const std::string& src,
                                                              const std::string& dst) {
    std::vector<std::vector<std::string>> result;
    std::vector<std::string> path;
    std::set<std::string> visited{src};
    std::function<void(const std::string&)> walk = [&](const std::string& at) {
        if (at == dst) {
            result.push_back(path);
            return;
        }
        for (const auto& link_id : infra.links_at(at)) {
            const NetLink& l = infra.link(link_id);
            if (!l.up) continue;
            const std::string& next = l.node_a == at ? l.node_b : l.node_a;
            if (!infra.node(next).up || visited.count(next)) continue;
            visited.insert(next);
            path.push_back(link_id);
            walk(next);
            path.pop_back();
            visited.erase(next);
        }
    };
    walk(src);
    return result;
}

inline double path_latency(const Infrastructure& infra, const std::vector<std::string>& path) {
    double total = 0;
    for (const auto& id : path) total += infra.link(id).latency_ms;
    return total;
}

inline double path_min_residual(const CapacityView& residual,
                                const std::vector<std::string>& path) {
    double m = 1e300;
    for (const auto& id : path) m = std::min(m, residual.link_bw.at(id));
    return m;
}

// Independent reconfiguration-op count for a transition between two graphs
// of one service: set differences for VNFs, route-map diff for vlinks.
inline int graph_diff_ops(const VnfGraph& from_g, const VnfGraph& to_g,
                          const Placement& from_p, const Placement& to_p, int migrations) {
    std::set<std::string> from_set(from_g.vnfs.begin(), from_g.vnfs.end());
    std::set<std::string> to_set(to_g.vnfs.begin(), to_g.vnfs.end());
    int removals = 0, instantiations = 0;
    for (const auto& v : from_g.vnfs) {
        const bool stays = to_set.count(v) && to_p.vnf_map.count(v) &&
                           from_p.vnf_map.count(v) &&
                           to_p.vnf_map.at(v) == from_p.vnf_map.at(v);
        if (!stays) ++removals;
    }
    for (const auto& v : to_g.vnfs) {
        const bool stays = from_set.count(v) && to_p.vnf_map.count(v) &&
                           from_p.vnf_map.count(v) &&
                           to_p.vnf_map.at(v) == from_p.vnf_map.at(v);
        if (!stays) ++instantiations;
    }
    int route_removals = 0, route_additions = 0;
    for (const auto& [k, path] : from_p.route_map) {
        if (path.empty()) continue;
        auto it = to_p.route_map.find(k);
        if (it == to_p.route_map.end() || it->second != path) ++route_removals;
    }
    for (const auto& [k, path] : to_p.route_map) {
        if (path.empty()) continue;
        auto it = from_p.route_map.find(k);
        if (it == from_p.route_map.end() || it->second != path) ++route_additions;
    }
    return removals + instantiations + route_removals + route_additions + migrations;
}

// Naive replay of a sample log against threshold rules; returns the alert
// sequence (subject, raised) per rule evaluation round.
struct ReplayAlert {
    std::string rule_id;
    std::string subject;
    double t = 0;
    bool raised = true;
};

inline std::vector<ReplayAlert> replay_alerts(const std::vector<AlertRule>& rules,
                                              const std::vector<std::vector<MetricSample>>& rounds) {
    std::vector<ReplayAlert> out;
    std::map<std::pair<std::string, std::string>, int> hits;
    std::map<std::pair<std::string, std::string>, bool> raised;
    std::vector<MetricSample> seen;
    std::vector<AlertRule> ordered = rules;
    std::sort(ordered.begin(), ordered.end(),
              [](const AlertRule& a, const AlertRule& b) { return a.rule_id < b.rule_id; });

    for (const auto& round : rounds) {
        double now = 0;
        for (const auto& s : round) {
            seen.push_back(s);
            now = std::max(now, s.t);
        }
        for (const auto& rule : ordered) {
            std::set<std::string> subjects;
            for (const auto& s : seen)
                if (s.kind == rule.source && (rule.subject == "*" || rule.subject == s.subject))
                    subjects.insert(s.subject);
            for (const auto& subject : subjects) {
                std::optional<double> aggregate;
                if (rule.aggregate == Aggregate::instant) {
                    for (const auto& s : seen)
                        if (s.kind == rule.source && s.subject == subject && s.t <= now)
                            aggregate = s.value; // latest wins; log is ordered
                } else {
                    double sum = 0;
                    int n = 0;
                    for (const auto& s : seen)
                        if (s.kind == rule.source && s.subject == subject &&
                            s.t >= now - rule.window_s && s.t <= now) {
                            sum += s.value;
                            ++n;
                        }
                    if (n > 0) aggregate = sum / n;
                }
                if (!aggregate) continue;
                auto key = std::make_pair(rule.rule_id, subject);
                if (!raised[key]) {
                    if (*aggregate >= rule.fire_threshold) {
                        if (++hits[key] >= rule.sustain_samples) {
                            raised[key] = true;
                            hits[key] = 0;
                            out.push_back({rule.rule_id, subject, now, true});
                        }
                    } else {
                        hits[key] = 0;
                    }
                } else if (*aggregate <= rule.clear_threshold) {
                    raised[key] = false;
                    hits[key] = 0;
                    out.push_back({rule.rule_id, subject, now, false});
                }
            }
        }
    }
    return out;
}

// Minimum number of foreign-VNF migrations that makes `plan_fn` succeed,
// searched over every subset of the candidate moves. Each candidate is a
// concrete (service, vnf, target node) relocation already known to fit.
struct MigrationCandidate {
    std::string service_id;
    std::string vnf_id;
    std::string to_node;
};

inline std::optional<std::size_t> min_migration_subset(
    const std::vector<MigrationCandidate>& candidates,
    const std::function<bool(const std::vector<MigrationCandidate>&)>& feasible_with) {
    const std::size_t n = candidates.size();
    for (std::size_t size = 0; size <= n; ++size) {
        std::vector<std::size_t> idx(size);
        std::function<bool(std::size_t, std::size_t)> combos = [&](std::size_t pos,
                                                                   std::size_t start) -> bool {
            if (pos == size) {
                std::vector<MigrationCandidate> subset;
                for (auto i : idx) subset.push_back(candidates[i]);
                return feasible_with(subset);
            }
            for (std::size_t i = start; i < n; ++i) {
                idx[pos] = i;
                if (combos(pos + 1, i + 1)) return true;
            }
            return false;
        };
        if (combos(0, 0)) return size;
    }
    return std::nullopt;
}

} // namespace oracles

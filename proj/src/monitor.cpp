#include "sliceshift/monitor.hpp"

#include <algorithm>
#include <optional>

namespace sliceshift {

const char* to_string(SourceKind kind) {
    switch (kind) {
    case SourceKind::node_cpu: return "node_cpu";
    case SourceKind::node_mem: return "node_mem";
    case SourceKind::link_util: return "link_util";
    case SourceKind::service_delay: return "service_delay";
    case SourceKind::app_custom: return "app_custom";
    }
    return "?";
}

SourceKind source_kind_from_string(const std::string& s) {
    if (s == "node_cpu") return SourceKind::node_cpu;
    if (s == "node_mem") return SourceKind::node_mem;
    if (s == "link_util") return SourceKind::link_util;
    if (s == "service_delay") return SourceKind::service_delay;
    if (s == "app_custom") return SourceKind::app_custom;
    raise("ParseError", "unknown metric source kind: " + s);
}

const char* to_string(Consumer c) {
    return c == Consumer::service_layer ? "service_layer" : "resource_layer";
}

void Monitor::configure_rules(std::vector<AlertRule> rules) {
    for (const auto& r : rules) {
        if (r.clear_threshold > r.fire_threshold)
            raise("ParseError", "rule " + r.rule_id + ": clear threshold above fire threshold");
        if (r.sustain_samples < 1)
            raise("ParseError", "rule " + r.rule_id + ": sustain_samples must be >= 1");
    }
    std::sort(rules.begin(), rules.end(),
              [](const AlertRule& a, const AlertRule& b) { return a.rule_id < b.rule_id; });
    for (std::size_t i = 1; i < rules.size(); ++i)
        if (rules[i].rule_id == rules[i - 1].rule_id)
            raise("DuplicateId", "alert rule " + rules[i].rule_id + " defined twice");
    rules_ = std::move(rules);
}

double Monitor::max_window() const {
    double w = 0;
    for (const auto& r : rules_)
        if (r.aggregate == Aggregate::sliding_mean) w = std::max(w, r.window_s);
    return w;
}

const AlertRule* Monitor::rule_by_id(const std::string& id) const {
    for (const auto& r : rules_)
        if (r.rule_id == id) return &r;
    return nullptr;
}

void Monitor::ingest_sample(const MetricSample& sample) {
    Stream& stream = streams_[StreamKey{sample.kind, sample.subject}];
    if (sample.t < stream.last_t)
        raise("OutOfOrderSample", std::string(to_string(sample.kind)) + "/" + sample.subject +
                                      " at t=" + std::to_string(sample.t) + " after t=" +
                                      std::to_string(stream.last_t));
    stream.last_t = sample.t;
    stream.samples.push_back(sample);

    // Expire samples that no sliding window can reach; the latest sample is
    // always kept for instant rules.
    const double horizon = sample.t - max_window();
    while (stream.samples.size() > 1 && stream.samples.front().t < horizon)
        stream.samples.pop_front();
}

std::vector<Alert> Monitor::evaluate_rules(double now) {
    std::vector<Alert> emitted;
    for (const auto& rule : rules_) {
        for (const auto& [key, stream] : streams_) {
            if (key.kind != rule.source) continue;
            if (rule.subject != "*" && rule.subject != key.subject) continue;
            if (stream.samples.empty() || stream.samples.back().t > now) continue;

            double aggregate = 0;
            if (rule.aggregate == Aggregate::instant) {
                aggregate = stream.samples.back().value;
            } else {
                double sum = 0;
                std::size_t n = 0;
                for (const auto& s : stream.samples) {
                    if (s.t >= now - rule.window_s && s.t <= now) {
                        sum += s.value;
                        ++n;
                    }
                }
                if (n == 0) continue;
                aggregate = sum / static_cast<double>(n);
            }

            RuleRuntime& rt = runtime_[{rule.rule_id, key.subject}];
            if (!rt.raised) {
                if (aggregate >= rule.fire_threshold) {
                    if (++rt.consecutive_hits >= rule.sustain_samples) {
                        rt.raised = true;
                        rt.raised_at = now;
                        rt.consecutive_hits = 0;
                        emitted.push_back(Alert{rule.rule_id, key.subject, now, true});
                    }
                } else {
                    rt.consecutive_hits = 0;
                }
            } else if (aggregate <= rule.clear_threshold) {
                rt.raised = false;
                rt.consecutive_hits = 0;
                emitted.push_back(Alert{rule.rule_id, key.subject, now, false});
            }
        }
    }
    return emitted;
}

std::vector<Alert> Monitor::standing_alerts() const {
    std::vector<Alert> out;
    for (const auto& [key, rt] : runtime_)
        if (rt.raised) out.push_back(Alert{key.first, key.second, rt.raised_at, true});
    return out;
}

bool Monitor::is_raised(SourceKind kind, const std::string& subject) const {
    for (const auto& [key, rt] : runtime_) {
        if (!rt.raised) continue;
        const AlertRule* rule = rule_by_id(key.first);
        if (rule && rule->source == kind && key.second == subject) return true;
    }
    return false;
}

std::vector<std::pair<Consumer, Alert>> dispatch(const std::vector<Alert>& alerts,
                                                 const std::vector<Subscription>& subscriptions,
                                                 const std::vector<AlertRule>& rules) {
    auto source_of = [&](const std::string& rule_id) -> std::optional<SourceKind> {
        for (const auto& r : rules)
            if (r.rule_id == rule_id) return r.source;
        return std::nullopt;
    };

    std::vector<std::pair<Consumer, Alert>> deliveries;
    for (const auto& alert : alerts) {
        auto source = source_of(alert.rule_id);
        if (!source) continue;
        std::set<Consumer> seen;
        for (const auto& sub : subscriptions) {
            if (!sub.sources.count(*source)) continue;
            if (!seen.insert(sub.consumer).second) continue; // no duplicates
            deliveries.emplace_back(sub.consumer, alert);
        }
    }
    std::sort(deliveries.begin(), deliveries.end(),
              [](const std::pair<Consumer, Alert>& a, const std::pair<Consumer, Alert>& b) {
                  if (a.first != b.first) return a.first < b.first;
                  if (a.second.rule_id != b.second.rule_id)
                      return a.second.rule_id < b.second.rule_id;
                  if (a.second.subject != b.second.subject)
                      return a.second.subject < b.second.subject;
                  return a.second.raised && !b.second.raised;
              });
    return deliveries;
}

std::vector<Subscription> default_subscriptions() {
    return {
        Subscription{Consumer::service_layer,
                     {SourceKind::service_delay, SourceKind::app_custom}},
        Subscription{Consumer::resource_layer,
                     {SourceKind::node_cpu, SourceKind::node_mem, SourceKind::link_util}},
    };
}

} // namespace sliceshift

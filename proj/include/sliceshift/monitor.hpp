#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sliceshift/errors.hpp"

namespace sliceshift {

enum class SourceKind { node_cpu, node_mem, link_util, service_delay, app_custom };

const char* to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& s);

struct MetricSample {
    SourceKind kind = SourceKind::node_cpu;
    std::string subject;
    double value = 0;
    double t = 0;
};

enum class Aggregate { instant, sliding_mean };

struct AlertRule {
    std::string rule_id;
    SourceKind source = SourceKind::node_cpu;
    std::string subject = "*"; // exact subject id, or "*" for any
    Aggregate aggregate = Aggregate::instant;
    double window_s = 0; // sliding_mean only
    double fire_threshold = 0;
    double clear_threshold = 0; // must be <= fire_threshold
    int sustain_samples = 1;
};

struct Alert {
    std::string rule_id;
    std::string subject;
    double fired_at = 0;
    bool raised = true; // false = cleared
};

enum class Consumer { service_layer, resource_layer };

const char* to_string(Consumer c);

struct Subscription {
    Consumer consumer = Consumer::resource_layer;
    std::set<SourceKind> sources;
};

// Simulated monitoring platform: sample ingestion, sliding aggregation,
// threshold rules with hysteresis, and alert dispatch.
class Monitor {
public:
    void configure_rules(std::vector<AlertRule> rules);
    const std::vector<AlertRule>& rules() const { return rules_; }

    // Errors: OutOfOrderSample when t decreases within one stream.
    void ingest_sample(const MetricSample& sample);

    // Runs every rule against every matching stream. A rule raises after
    // sustain_samples consecutive evaluations at or above fire_threshold
    // and clears as soon as the aggregate drops to clear_threshold.
    std::vector<Alert> evaluate_rules(double now);

    // Currently-raised alerts, ordered by (rule_id, subject).
    std::vector<Alert> standing_alerts() const;

    bool is_raised(SourceKind kind, const std::string& subject) const;

private:
    struct StreamKey {
        SourceKind kind;
        std::string subject;
        bool operator<(const StreamKey& o) const {
            if (kind != o.kind) return kind < o.kind;
            return subject < o.subject;
        }
    };
    struct Stream {
        std::deque<MetricSample> samples;
        double last_t = -1;
    };
    struct RuleRuntime {
        int consecutive_hits = 0;
        bool raised = false;
        double raised_at = 0;
    };

    double max_window() const;
    const AlertRule* rule_by_id(const std::string& id) const;

    std::vector<AlertRule> rules_;
    std::map<StreamKey, Stream> streams_;
    std::map<std::pair<std::string, std::string>, RuleRuntime> runtime_; // (rule, subject)

    friend std::vector<std::pair<Consumer, Alert>> dispatch(
        const std::vector<Alert>&, const std::vector<Subscription>&,
        const std::vector<AlertRule>&);
};

// Delivers each alert to every subscribed consumer, deduplicated, in
// deterministic (consumer, rule_id, subject) order.
std::vector<std::pair<Consumer, Alert>> dispatch(const std::vector<Alert>& alerts,
                                                 const std::vector<Subscription>& subscriptions,
                                                 const std::vector<AlertRule>& rules);

// Default split: the service layer consumes service-scoped metrics, the
// resource layer consumes infrastructure metrics.
std::vector<Subscription> default_subscriptions();

} // namespace sliceshift

#pragma once

#include "sliceshift/rng.hpp"

namespace sliceshift {

enum class ActionKind { vnf_teardown, vm_migrate, vnf_instantiate, route_update };

const char* to_string(ActionKind kind);

struct DelayRange {
    double lo = 0;
    double hi = 0;
};

// Enactment delay model. Defaults reflect measured real-world figures:
// VNF instantiation takes several tens of seconds and VM live migration
// ranges from roughly 50 up to 270 seconds.
struct DelayConfig {
    DelayRange vnf_instantiate{20, 60};
    DelayRange vnf_teardown{5, 15};
    DelayRange vm_migrate{50, 270};
    DelayRange route_update{1, 5};

    const DelayRange& range(ActionKind kind) const {
        switch (kind) {
        case ActionKind::vnf_teardown: return vnf_teardown;
        case ActionKind::vm_migrate: return vm_migrate;
        case ActionKind::vnf_instantiate: return vnf_instantiate;
        case ActionKind::route_update: return route_update;
        }
        return route_update;
    }
};

// Uniform draw in the configured range; advances the generator exactly once.
inline double sample_delay(ActionKind kind, const DelayConfig& config, SplitMix64& rng) {
    const DelayRange& r = config.range(kind);
    return rng.uniform(r.lo, r.hi);
}

} // namespace sliceshift

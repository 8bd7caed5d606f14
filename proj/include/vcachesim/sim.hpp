#pragma once

#include <cstdint>
#include <string>

#include "vcachesim/metrics.hpp"
#include "vcachesim/scenario.hpp"

namespace vcsim {

// Runs the scenario to completion: requests issued before the duration
// horizon are drained through the full lifecycle. Deterministic: identical
// config and seed give a bit-identical result. Throws ConfigError when
// validation reports an error-level violation.
SimResult runScenario(const ScenarioConfig& cfg);

struct CompareResult {
    SimResult peeringOn;
    SimResult peeringOff;
    double deltaMeanLatencyMs = 0.0;  // on - off
    std::int64_t deltaWanBytes = 0;
    double deltaViTraversalsMean = 0.0;
    std::uint64_t peeringBytes = 0;  // bytes served over peering links (on run)

    std::string toJsonString() const;
};

// Paired runs with identical seeds: the scenario as configured and a copy
// with the peering links cleared. Everything else, including workload draws,
// is untouched. Throws NoPeeringDefinedError when no links are configured.
CompareResult runCompare(const ScenarioConfig& cfg);

}  // namespace vcsim

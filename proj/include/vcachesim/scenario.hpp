#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vcachesim/delay_pool.hpp"
#include "vcachesim/interception.hpp"
#include "vcachesim/topology.hpp"
#include "vcachesim/workload.hpp"

namespace vcsim {

struct LinkParamsSpec {
    double latencyMs = 0.0;
    double bandwidthBps = 1.25e9;
};

struct TopologySpec {
    int hosts = 1;
    double switchDelayMs = 0.0;
    LinkParamsSpec wan{40.0, 1.25e8};
    LinkParamsSpec backhaul{1.0, 1.25e9};
    LinkParamsSpec interHost{0.2, 1.25e9};
    LinkParamsSpec intraHost{0.05, 1.25e10};
};

struct DigestSpec {
    std::uint64_t bits = 65536;
    std::uint32_t hashes = 7;
    double rebuildPeriodS = 60.0;
};

struct PrefillSpec {
    double fraction = 0.0;     // fraction of cache capacity warmed at t=0
    std::uint64_t offsetObjects = 0;  // skip this many top ranks first
};

struct CacheSpec {
    int host = 0;
    std::uint64_t capacityBytes = 1 << 20;
    double processingDelayMs = 0.5;
    DigestSpec digest;
    PrefillSpec prefill;
};

struct DestinationSpec {
    std::uint64_t objects = 0;
    bool personalized = false;
    std::optional<std::uint64_t> objectBytes;
};

struct OverlapSpec {
    std::string peer;
    double fraction = 0.0;
};

struct WorkloadSpec {
    std::uint64_t catalogSize = 1000;
    double zipfAlpha = 0.8;
    double rateRps = 0.0;
    double personalizedFraction = 0.0;
    std::uint64_t objectBytes = 10000;
    std::optional<OverlapSpec> overlap;
    std::vector<DestinationSpec> destinations;  // cover the non-shared catalog tail
    bool abusePeering = false;  // offload every miss to the first peer, no ICP
};

struct StaticRuleSpec {
    std::uint64_t destinationIndex = 0;
    FlowAction action = FlowAction::Bypass;
    int priority = 100;
};

struct InterceptionSpec {
    bool enabled = false;
    double windowS = 300.0;
    std::uint64_t minSamples = 10;
    double missThreshold = 0.8;
    double derivePeriodS = 300.0;
    std::vector<StaticRuleSpec> staticRules;
};

struct TenantSpec {
    std::string name;
    CacheSpec cache;
    WorkloadSpec workload;
    InterceptionSpec interception;
};

struct PeeringLinkSpec {
    std::string a;
    std::string b;
    std::string owner;  // tenant creating the shared network; defaults to a
    bool readThrough = true;
    bool alwaysIcp = false;
    bool shapeIcp = false;
    std::optional<double> icpTimeoutS;
    std::optional<DelayPoolConfig> delayPool;
};

struct AttackSpec {
    std::string tenant;
    std::string target;
    double queryRateRps = 0.0;
    double fetchRateRps = 0.0;
};

struct MessageSpec {
    std::uint64_t requestBytes = 0;  // per-request overhead on request legs
    std::uint64_t icpBytes = 0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    double durationS = 0.0;
    TopologySpec topology;
    std::vector<TenantSpec> tenants;
    std::vector<PeeringLinkSpec> peeringLinks;
    std::optional<AttackSpec> attack;
    MessageSpec messages;
    bool emitIcpTrace = false;
};

struct ConfigViolation {
    std::string path;
    std::string message;
    bool warning = false;
};

// Parse a scenario file (JSON). Throws ParseError with position info on
// malformed input, ConfigError on schema violations.
ScenarioConfig loadScenario(const std::string& text);
ScenarioConfig loadScenarioFile(const std::string& path);
std::string scenarioToJson(const ScenarioConfig& cfg);

// Structural checks plus the advisory that peering over a slower-than-WAN
// shared path cannot pay off. Errors carry warning = false.
std::vector<ConfigViolation> validateConfig(const ScenarioConfig& cfg);

// Catalog construction, shared between validation, the simulator, and tests.
// Overlapping tenants share the leading ranks of their catalogs: same
// ContentIds (keys and destinations) drawn from a pair-scoped id space.
std::vector<CatalogObject> buildCatalog(const ScenarioConfig& cfg, std::size_t tenantIdx);

// Destination id of a tenant's destination block, as addressed by
// StaticRuleSpec::destinationIndex.
DestinationId tenantDestinationId(std::size_t tenantIdx, std::size_t blockIdx);

struct BuiltTopology {
    MicroDcTopology topo;
    NodeId origin = 0;
    std::vector<NodeId> userNodes;   // per tenant
    std::vector<NodeId> cacheNodes;  // per tenant
    std::vector<CacheId> cacheIds;   // per tenant
    std::vector<VlanId> vlans;       // per tenant
};

// Canonical micro-DC tree: origin and edge around one external bridge,
// per-host vlan/integration bridges, one user endpoint and one cache VM per
// tenant, plus br-vlan shortcut links between every host pair.
BuiltTopology buildTopology(const ScenarioConfig& cfg);

}  // namespace vcsim

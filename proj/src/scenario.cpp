#include "vcachesim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vcachesim/errors.hpp"

namespace vcsim {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTenantSpaceStride = 1ULL << 40;
constexpr std::uint64_t kPairSpaceBase = 1ULL << 56;

std::uint64_t tenantBase(std::size_t tenantIdx) {
    return (static_cast<std::uint64_t>(tenantIdx) + 1) * kTenantSpaceStride;
}

std::uint64_t pairBase(std::size_t pairIdx) {
    return kPairSpaceBase + static_cast<std::uint64_t>(pairIdx) * kTenantSpaceStride;
}

void checkKeys(const json& obj, std::initializer_list<const char*> allowed,
               const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw ConfigError(path + "." + it.key(), "unknown field");
    }
}

template <typename T>
T getOr(const json& obj, const char* key, T fallback, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key, "has the wrong type");
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path + "." + key, "is required");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key, "has the wrong type");
    }
}

LinkParamsSpec parseLinkParams(const json& obj, LinkParamsSpec def, const std::string& path) {
    checkKeys(obj, {"latencyMs", "bandwidthBps"}, path);
    LinkParamsSpec out = def;
    out.latencyMs = getOr(obj, "latencyMs", def.latencyMs, path);
    out.bandwidthBps = getOr(obj, "bandwidthBps", def.bandwidthBps, path);
    return out;
}

int tenantIndexByName(const std::vector<TenantSpec>& tenants, const std::string& name) {
    for (std::size_t i = 0; i < tenants.size(); ++i)
        if (tenants[i].name == name) return static_cast<int>(i);
    return -1;
}

// Resolved overlap of a tenant: either its own declaration or the mirror of
// the peer's. Returns (peerIdx, fraction) or peerIdx = -1.
std::pair<int, double> resolvedOverlap(const ScenarioConfig& cfg, std::size_t tenantIdx) {
    const TenantSpec& t = cfg.tenants[tenantIdx];
    if (t.workload.overlap) {
        int peer = tenantIndexByName(cfg.tenants, t.workload.overlap->peer);
        return {peer, t.workload.overlap->fraction};
    }
    for (std::size_t j = 0; j < cfg.tenants.size(); ++j) {
        const auto& other = cfg.tenants[j].workload.overlap;
        if (j != tenantIdx && other && other->peer == t.name)
            return {static_cast<int>(j), other->fraction};
    }
    return {-1, 0.0};
}

std::pair<std::size_t, std::size_t> orderedPair(std::size_t a, std::size_t b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

// Pair index of an overlapping tenant pair, assigned in first-declaration order.
int overlapPairIndex(const ScenarioConfig& cfg, std::size_t tenantIdx, int peerIdx) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < cfg.tenants.size(); ++i) {
        const auto& ov = cfg.tenants[i].workload.overlap;
        if (!ov) continue;
        int j = tenantIndexByName(cfg.tenants, ov->peer);
        if (j < 0) continue;
        auto key = orderedPair(i, static_cast<std::size_t>(j));
        if (std::find(pairs.begin(), pairs.end(), key) == pairs.end()) pairs.push_back(key);
    }
    auto key = orderedPair(tenantIdx, static_cast<std::size_t>(peerIdx));
    auto it = std::find(pairs.begin(), pairs.end(), key);
    return it == pairs.end() ? -1 : static_cast<int>(it - pairs.begin());
}

std::uint64_t sharedObjectCount(const ScenarioConfig& cfg, std::size_t tenantIdx) {
    auto [peer, fraction] = resolvedOverlap(cfg, tenantIdx);
    if (peer < 0) return 0;
    return static_cast<std::uint64_t>(
        std::floor(fraction * static_cast<double>(cfg.tenants[tenantIdx].workload.catalogSize)));
}

}  // namespace

DestinationId tenantDestinationId(std::size_t tenantIdx, std::size_t blockIdx) {
    return tenantBase(tenantIdx) + blockIdx;
}

ScenarioConfig loadScenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("$", "scenario must be a JSON object");
    checkKeys(root,
              {"name", "seed", "durationS", "topology", "tenants", "peering", "attack",
               "messages", "output"},
              "$");

    ScenarioConfig cfg;
    cfg.name = getOr<std::string>(root, "name", "scenario", "$");
    cfg.seed = getOr<std::uint64_t>(root, "seed", 1, "$");
    cfg.durationS = getOr<double>(root, "durationS", 0.0, "$");

    if (auto it = root.find("topology"); it != root.end()) {
        const json& t = *it;
        checkKeys(t, {"hosts", "switchDelayMs", "links"}, "$.topology");
        cfg.topology.hosts = getOr(t, "hosts", 1, "$.topology");
        cfg.topology.switchDelayMs = getOr(t, "switchDelayMs", 0.0, "$.topology");
        if (auto lt = t.find("links"); lt != t.end()) {
            checkKeys(*lt, {"wan", "backhaul", "interHost", "intraHost"}, "$.topology.links");
            if (auto l = lt->find("wan"); l != lt->end())
                cfg.topology.wan = parseLinkParams(*l, cfg.topology.wan, "$.topology.links.wan");
            if (auto l = lt->find("backhaul"); l != lt->end())
                cfg.topology.backhaul =
                    parseLinkParams(*l, cfg.topology.backhaul, "$.topology.links.backhaul");
            if (auto l = lt->find("interHost"); l != lt->end())
                cfg.topology.interHost =
                    parseLinkParams(*l, cfg.topology.interHost, "$.topology.links.interHost");
            if (auto l = lt->find("intraHost"); l != lt->end())
                cfg.topology.intraHost =
                    parseLinkParams(*l, cfg.topology.intraHost, "$.topology.links.intraHost");
        }
    }

    const json* tenants = root.contains("tenants") ? &root["tenants"] : nullptr;
    if (tenants == nullptr || !tenants->is_array() || tenants->empty())
        throw ConfigError("$.tenants", "at least one tenant is required");
    for (std::size_t i = 0; i < tenants->size(); ++i) {
        const json& tj = (*tenants)[i];
        std::string path = "$.tenants[" + std::to_string(i) + "]";
        checkKeys(tj, {"name", "cache", "workload", "interception"}, path);
        TenantSpec spec;
        spec.name = require<std::string>(tj, "name", path);

        if (auto it = tj.find("cache"); it != tj.end()) {
            const json& c = *it;
            checkKeys(c, {"host", "capacityBytes", "processingDelayMs", "digest", "prefill"},
                      path + ".cache");
            spec.cache.host = getOr(c, "host", 0, path + ".cache");
            spec.cache.capacityBytes =
                getOr<std::uint64_t>(c, "capacityBytes", spec.cache.capacityBytes, path + ".cache");
            spec.cache.processingDelayMs =
                getOr(c, "processingDelayMs", spec.cache.processingDelayMs, path + ".cache");
            if (auto dt = c.find("digest"); dt != c.end()) {
                checkKeys(*dt, {"bits", "hashes", "rebuildPeriodS"}, path + ".cache.digest");
                spec.cache.digest.bits =
                    getOr<std::uint64_t>(*dt, "bits", spec.cache.digest.bits, path + ".cache.digest");
                spec.cache.digest.hashes = getOr<std::uint32_t>(*dt, "hashes",
                                                                spec.cache.digest.hashes,
                                                                path + ".cache.digest");
                spec.cache.digest.rebuildPeriodS =
                    getOr(*dt, "rebuildPeriodS", spec.cache.digest.rebuildPeriodS,
                          path + ".cache.digest");
            }
            if (auto pt = c.find("prefill"); pt != c.end()) {
                checkKeys(*pt, {"fraction", "offsetObjects"}, path + ".cache.prefill");
                spec.cache.prefill.fraction =
                    getOr(*pt, "fraction", 0.0, path + ".cache.prefill");
                spec.cache.prefill.offsetObjects =
                    getOr<std::uint64_t>(*pt, "offsetObjects", 0, path + ".cache.prefill");
            }
        }

        if (auto it = tj.find("workload"); it != tj.end()) {
            const json& w = *it;
            checkKeys(w,
                      {"catalogSize", "zipfAlpha", "rateRps", "personalizedFraction",
                       "objectBytes", "overlap", "destinations", "abusePeering"},
                      path + ".workload");
            spec.workload.catalogSize =
                getOr<std::uint64_t>(w, "catalogSize", spec.workload.catalogSize, path);
            spec.workload.zipfAlpha = getOr(w, "zipfAlpha", spec.workload.zipfAlpha, path);
            spec.workload.rateRps = getOr(w, "rateRps", 0.0, path);
            spec.workload.personalizedFraction =
                getOr(w, "personalizedFraction", 0.0, path);
            spec.workload.objectBytes =
                getOr<std::uint64_t>(w, "objectBytes", spec.workload.objectBytes, path);
            spec.workload.abusePeering = getOr(w, "abusePeering", false, path);
            if (auto ot = w.find("overlap"); ot != w.end() && !ot->is_null()) {
                checkKeys(*ot, {"peer", "fraction"}, path + ".workload.overlap");
                OverlapSpec ov;
                ov.peer = require<std::string>(*ot, "peer", path + ".workload.overlap");
                ov.fraction = getOr(*ot, "fraction", 0.0, path + ".workload.overlap");
                spec.workload.overlap = ov;
            }
            if (auto dt = w.find("destinations"); dt != w.end()) {
                if (!dt->is_array())
                    throw ConfigError(path + ".workload.destinations", "must be an array");
                for (std::size_t b = 0; b < dt->size(); ++b) {
                    const json& bj = (*dt)[b];
                    std::string bpath = path + ".workload.destinations[" + std::to_string(b) + "]";
                    checkKeys(bj, {"objects", "personalized", "objectBytes"}, bpath);
                    DestinationSpec ds;
                    ds.objects = require<std::uint64_t>(bj, "objects", bpath);
                    ds.personalized = getOr(bj, "personalized", false, bpath);
                    if (bj.contains("objectBytes") && !bj["objectBytes"].is_null())
                        ds.objectBytes = require<std::uint64_t>(bj, "objectBytes", bpath);
                    spec.workload.destinations.push_back(ds);
                }
            }
        }

        if (auto it = tj.find("interception"); it != tj.end()) {
            const json& n = *it;
            checkKeys(n,
                      {"enabled", "windowS", "minSamples", "missThreshold", "derivePeriodS",
                       "staticRules"},
                      path + ".interception");
            spec.interception.enabled = getOr(n, "enabled", false, path);
            spec.interception.windowS = getOr(n, "windowS", spec.interception.windowS, path);
            spec.interception.minSamples =
                getOr<std::uint64_t>(n, "minSamples", spec.interception.minSamples, path);
            spec.interception.missThreshold =
                getOr(n, "missThreshold", spec.interception.missThreshold, path);
            spec.interception.derivePeriodS =
                getOr(n, "derivePeriodS", spec.interception.derivePeriodS, path);
            if (auto rt = n.find("staticRules"); rt != n.end()) {
                for (std::size_t r = 0; r < rt->size(); ++r) {
                    const json& rj = (*rt)[r];
                    std::string rpath =
                        path + ".interception.staticRules[" + std::to_string(r) + "]";
                    checkKeys(rj, {"destinationIndex", "action", "priority"}, rpath);
                    StaticRuleSpec sr;
                    sr.destinationIndex = require<std::uint64_t>(rj, "destinationIndex", rpath);
                    std::string action = getOr<std::string>(rj, "action", "bypass", rpath);
                    if (action == "bypass")
                        sr.action = FlowAction::Bypass;
                    else if (action == "intercept")
                        sr.action = FlowAction::Intercept;
                    else
                        throw ConfigError(rpath + ".action", "must be 'bypass' or 'intercept'");
                    sr.priority = getOr(rj, "priority", 100, rpath);
                    spec.interception.staticRules.push_back(sr);
                }
            }
        }
        cfg.tenants.push_back(std::move(spec));
    }

    if (auto it = root.find("peering"); it != root.end()) {
        checkKeys(*it, {"links"}, "$.peering");
        if (auto lt = it->find("links"); lt != it->end()) {
            for (std::size_t i = 0; i < lt->size(); ++i) {
                const json& lj = (*lt)[i];
                std::string path = "$.peering.links[" + std::to_string(i) + "]";
                checkKeys(lj,
                          {"a", "b", "owner", "readThrough", "alwaysIcp", "shapeIcp",
                           "icpTimeoutS", "delayPool"},
                          path);
                PeeringLinkSpec link;
                link.a = require<std::string>(lj, "a", path);
                link.b = require<std::string>(lj, "b", path);
                link.owner = getOr<std::string>(lj, "owner", link.a, path);
                link.readThrough = getOr(lj, "readThrough", true, path);
                link.alwaysIcp = getOr(lj, "alwaysIcp", false, path);
                link.shapeIcp = getOr(lj, "shapeIcp", false, path);
                if (lj.contains("icpTimeoutS") && !lj["icpTimeoutS"].is_null())
                    link.icpTimeoutS = require<double>(lj, "icpTimeoutS", path);
                if (auto pt = lj.find("delayPool"); pt != lj.end() && !pt->is_null()) {
                    checkKeys(*pt,
                              {"aggregateCapacityBytes", "aggregateRateBps",
                               "individualCapacityBytes", "individualRateBps"},
                              path + ".delayPool");
                    DelayPoolConfig pool;
                    pool.aggregateCapacityBytes =
                        require<double>(*pt, "aggregateCapacityBytes", path + ".delayPool");
                    pool.aggregateRateBps =
                        require<double>(*pt, "aggregateRateBps", path + ".delayPool");
                    pool.individualCapacityBytes =
                        require<double>(*pt, "individualCapacityBytes", path + ".delayPool");
                    pool.individualRateBps =
                        require<double>(*pt, "individualRateBps", path + ".delayPool");
                    link.delayPool = pool;
                }
                cfg.peeringLinks.push_back(std::move(link));
            }
        }
    }

    if (auto it = root.find("attack"); it != root.end() && !it->is_null()) {
        checkKeys(*it, {"tenant", "target", "queryRateRps", "fetchRateRps"}, "$.attack");
        AttackSpec attack;
        attack.tenant = require<std::string>(*it, "tenant", "$.attack");
        attack.target = require<std::string>(*it, "target", "$.attack");
        attack.queryRateRps = getOr(*it, "queryRateRps", 0.0, "$.attack");
        attack.fetchRateRps = getOr(*it, "fetchRateRps", 0.0, "$.attack");
        cfg.attack = attack;
    }

    if (auto it = root.find("messages"); it != root.end()) {
        checkKeys(*it, {"requestBytes", "icpBytes"}, "$.messages");
        cfg.messages.requestBytes = getOr<std::uint64_t>(*it, "requestBytes", 0, "$.messages");
        cfg.messages.icpBytes = getOr<std::uint64_t>(*it, "icpBytes", 0, "$.messages");
    }
    if (auto it = root.find("output"); it != root.end()) {
        checkKeys(*it, {"icpTrace"}, "$.output");
        cfg.emitIcpTrace = getOr(*it, "icpTrace", false, "$.output");
    }
    return cfg;
}

ScenarioConfig loadScenarioFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return loadScenario(buf.str());
}

std::string scenarioToJson(const ScenarioConfig& cfg) {
    json root;
    root["name"] = cfg.name;
    root["seed"] = cfg.seed;
    root["durationS"] = cfg.durationS;
    json topo;
    topo["hosts"] = cfg.topology.hosts;
    topo["switchDelayMs"] = cfg.topology.switchDelayMs;
    auto linkJson = [](const LinkParamsSpec& l) {
        return json{{"latencyMs", l.latencyMs}, {"bandwidthBps", l.bandwidthBps}};
    };
    topo["links"] = {{"wan", linkJson(cfg.topology.wan)},
                     {"backhaul", linkJson(cfg.topology.backhaul)},
                     {"interHost", linkJson(cfg.topology.interHost)},
                     {"intraHost", linkJson(cfg.topology.intraHost)}};
    root["topology"] = topo;

    root["tenants"] = json::array();
    for (const TenantSpec& t : cfg.tenants) {
        json tj;
        tj["name"] = t.name;
        tj["cache"] = {{"host", t.cache.host},
                       {"capacityBytes", t.cache.capacityBytes},
                       {"processingDelayMs", t.cache.processingDelayMs},
                       {"digest",
                        {{"bits", t.cache.digest.bits},
                         {"hashes", t.cache.digest.hashes},
                         {"rebuildPeriodS", t.cache.digest.rebuildPeriodS}}},
                       {"prefill",
                        {{"fraction", t.cache.prefill.fraction},
                         {"offsetObjects", t.cache.prefill.offsetObjects}}}};
        json wj;
        wj["catalogSize"] = t.workload.catalogSize;
        wj["zipfAlpha"] = t.workload.zipfAlpha;
        wj["rateRps"] = t.workload.rateRps;
        wj["personalizedFraction"] = t.workload.personalizedFraction;
        wj["objectBytes"] = t.workload.objectBytes;
        wj["abusePeering"] = t.workload.abusePeering;
        if (t.workload.overlap)
            wj["overlap"] = {{"peer", t.workload.overlap->peer},
                             {"fraction", t.workload.overlap->fraction}};
        if (!t.workload.destinations.empty()) {
            wj["destinations"] = json::array();
            for (const DestinationSpec& d : t.workload.destinations) {
                json dj = {{"objects", d.objects}, {"personalized", d.personalized}};
                if (d.objectBytes) dj["objectBytes"] = *d.objectBytes;
                wj["destinations"].push_back(dj);
            }
        }
        tj["workload"] = wj;
        json nj;
        nj["enabled"] = t.interception.enabled;
        nj["windowS"] = t.interception.windowS;
        nj["minSamples"] = t.interception.minSamples;
        nj["missThreshold"] = t.interception.missThreshold;
        nj["derivePeriodS"] = t.interception.derivePeriodS;
        if (!t.interception.staticRules.empty()) {
            nj["staticRules"] = json::array();
            for (const StaticRuleSpec& r : t.interception.staticRules)
                nj["staticRules"].push_back(
                    {{"destinationIndex", r.destinationIndex},
                     {"action", r.action == FlowAction::Bypass ? "bypass" : "intercept"},
                     {"priority", r.priority}});
        }
        tj["interception"] = nj;
        root["tenants"].push_back(tj);
    }

    json links = json::array();
    for (const PeeringLinkSpec& l : cfg.peeringLinks) {
        json lj = {{"a", l.a},          {"b", l.b},
                   {"owner", l.owner},  {"readThrough", l.readThrough},
                   {"alwaysIcp", l.alwaysIcp}, {"shapeIcp", l.shapeIcp}};
        if (l.icpTimeoutS) lj["icpTimeoutS"] = *l.icpTimeoutS;
        if (l.delayPool)
            lj["delayPool"] = {{"aggregateCapacityBytes", l.delayPool->aggregateCapacityBytes},
                               {"aggregateRateBps", l.delayPool->aggregateRateBps},
                               {"individualCapacityBytes", l.delayPool->individualCapacityBytes},
                               {"individualRateBps", l.delayPool->individualRateBps}};
        links.push_back(lj);
    }
    root["peering"] = {{"links", links}};
    if (cfg.attack)
        root["attack"] = {{"tenant", cfg.attack->tenant},
                          {"target", cfg.attack->target},
                          {"queryRateRps", cfg.attack->queryRateRps},
                          {"fetchRateRps", cfg.attack->fetchRateRps}};
    root["messages"] = {{"requestBytes", cfg.messages.requestBytes},
                        {"icpBytes", cfg.messages.icpBytes}};
    root["output"] = {{"icpTrace", cfg.emitIcpTrace}};
    return root.dump(2) + "\n";
}

std::vector<CatalogObject> buildCatalog(const ScenarioConfig& cfg, std::size_t tenantIdx) {
    const TenantSpec& t = cfg.tenants.at(tenantIdx);
    const std::uint64_t n = t.workload.catalogSize;
    std::uint64_t shared = 0;
    std::uint64_t sharedBase = 0;
    auto [peerIdx, fraction] = resolvedOverlap(cfg, tenantIdx);
    if (peerIdx >= 0) {
        shared = sharedObjectCount(cfg, tenantIdx);
        int pair = overlapPairIndex(cfg, tenantIdx, peerIdx);
        sharedBase = pairBase(pair < 0 ? 0 : static_cast<std::size_t>(pair));
    }

    std::vector<DestinationSpec> blocks = t.workload.destinations;
    if (blocks.empty() && n > shared)
        blocks.push_back(DestinationSpec{n - shared, false, std::nullopt});

    std::vector<CatalogObject> catalog;
    catalog.reserve(n);
    std::size_t blockIdx = 0;
    std::uint64_t blockUsed = 0;
    for (std::uint64_t r = 0; r < n; ++r) {
        CatalogObject obj;
        if (r < shared) {
            obj.id.objectKey = sharedBase + r;
            obj.id.destination = sharedBase;
            obj.bytes = t.workload.objectBytes;
            obj.personalizedDestination = false;
        } else {
            while (blockIdx < blocks.size() && blockUsed >= blocks[blockIdx].objects) {
                ++blockIdx;
                blockUsed = 0;
            }
            if (blockIdx >= blocks.size())
                throw ConfigError("$.tenants[" + std::to_string(tenantIdx) +
                                      "].workload.destinations",
                                  "destination blocks cover fewer objects than the catalog");
            const DestinationSpec& block = blocks[blockIdx];
            obj.id.objectKey = tenantBase(tenantIdx) + r;
            obj.id.destination = tenantDestinationId(tenantIdx, blockIdx);
            obj.bytes = block.objectBytes.value_or(t.workload.objectBytes);
            obj.personalizedDestination = block.personalized;
            ++blockUsed;
        }
        catalog.push_back(obj);
    }
    return catalog;
}

BuiltTopology buildTopology(const ScenarioConfig& cfg) {
    BuiltTopology built;
    MicroDcTopology& topo = built.topo;
    topo.setSwitchDelayS(msToS(cfg.topology.switchDelayMs));

    built.origin = topo.addOrigin();
    NodeId edge = topo.addSwitch(NodeKind::Edge);
    NodeId brEx = topo.addSwitch(NodeKind::ExternalBridge);
    topo.addLink(built.origin, brEx, msToS(cfg.topology.wan.latencyMs),
                 cfg.topology.wan.bandwidthBps, LinkKind::Wan);
    topo.addLink(edge, brEx, msToS(cfg.topology.backhaul.latencyMs),
                 cfg.topology.backhaul.bandwidthBps, LinkKind::Backhaul);

    std::vector<HostId> hostIds;
    for (int h = 0; h < cfg.topology.hosts; ++h) {
        NodeId brVlan = topo.addSwitch(NodeKind::VlanBridge);
        NodeId brInt = topo.addSwitch(NodeKind::IntegrationBridge);
        HostId host = topo.declareHost(brInt, brVlan);
        hostIds.push_back(host);
        topo.addLink(brEx, brVlan, msToS(cfg.topology.interHost.latencyMs),
                     cfg.topology.interHost.bandwidthBps, LinkKind::InterHost);
        topo.addLink(brVlan, brInt, msToS(cfg.topology.intraHost.latencyMs),
                     cfg.topology.intraHost.bandwidthBps, LinkKind::IntraHost);
    }
    // direct br-vlan<->br-vlan shortcut between host pairs; used only by
    // shared peering networks
    for (std::size_t i = 0; i < hostIds.size(); ++i)
        for (std::size_t j = i + 1; j < hostIds.size(); ++j)
            topo.addLink(topo.hosts()[hostIds[i]].vlanBridge, topo.hosts()[hostIds[j]].vlanBridge,
                         msToS(cfg.topology.interHost.latencyMs),
                         cfg.topology.interHost.bandwidthBps, LinkKind::InterHost);

    for (std::size_t i = 0; i < cfg.tenants.size(); ++i) {
        const TenantSpec& t = cfg.tenants[i];
        TenantId tenant = static_cast<TenantId>(i);
        VlanId vlan = static_cast<VlanId>(100 + i);
        topo.addVlanSegment(vlan, tenant);
        NodeId user = topo.addUser(tenant);
        topo.addLink(user, edge, msToS(cfg.topology.backhaul.latencyMs),
                     cfg.topology.backhaul.bandwidthBps, LinkKind::Backhaul);
        HostId host = hostIds.at(static_cast<std::size_t>(t.cache.host));
        CacheId cache = static_cast<CacheId>(i);
        NodeId cacheNode = topo.addCacheVm(cache, tenant, host);
        topo.addLink(cacheNode, topo.hosts()[host].integrationBridge,
                     msToS(cfg.topology.intraHost.latencyMs), cfg.topology.intraHost.bandwidthBps,
                     LinkKind::IntraHost);
        built.userNodes.push_back(user);
        built.cacheNodes.push_back(cacheNode);
        built.cacheIds.push_back(cache);
        built.vlans.push_back(vlan);
    }
    return built;
}

std::vector<ConfigViolation> validateConfig(const ScenarioConfig& cfg) {
    std::vector<ConfigViolation> out;
    auto fail = [&](const std::string& path, const std::string& msg) {
        out.push_back({path, msg, false});
    };
    auto warn = [&](const std::string& path, const std::string& msg) {
        out.push_back({path, msg, true});
    };

    if (cfg.durationS < 0.0) fail("$.durationS", "must be >= 0");
    if (cfg.topology.hosts < 1) fail("$.topology.hosts", "must be >= 1");
    if (cfg.topology.switchDelayMs < 0.0) fail("$.topology.switchDelayMs", "must be >= 0");
    struct NamedLink {
        const char* name;
        const LinkParamsSpec* p;
    };
    for (NamedLink nl : {NamedLink{"wan", &cfg.topology.wan},
                         NamedLink{"backhaul", &cfg.topology.backhaul},
                         NamedLink{"interHost", &cfg.topology.interHost},
                         NamedLink{"intraHost", &cfg.topology.intraHost}}) {
        if (nl.p->latencyMs < 0.0)
            fail(std::string("$.topology.links.") + nl.name + ".latencyMs", "must be >= 0");
        if (nl.p->bandwidthBps <= 0.0)
            fail(std::string("$.topology.links.") + nl.name + ".bandwidthBps", "must be > 0");
    }
    double minOther = std::min({cfg.topology.wan.latencyMs, cfg.topology.backhaul.latencyMs,
                                cfg.topology.interHost.latencyMs});
    if (cfg.topology.intraHost.latencyMs > minOther)
        fail("$.topology.links.intraHost.latencyMs",
             "intra-host links must have the smallest latency");

    std::set<std::string> names;
    for (std::size_t i = 0; i < cfg.tenants.size(); ++i) {
        const TenantSpec& t = cfg.tenants[i];
        std::string path = "$.tenants[" + std::to_string(i) + "]";
        if (t.name.empty()) fail(path + ".name", "must not be empty");
        if (!names.insert(t.name).second) fail(path + ".name", "duplicate tenant name");
        if (t.cache.host < 0 || t.cache.host >= cfg.topology.hosts)
            fail(path + ".cache.host", "host index out of range");
        if (t.cache.capacityBytes == 0) fail(path + ".cache.capacityBytes", "must be > 0");
        if (t.cache.processingDelayMs < 0.0) fail(path + ".cache.processingDelayMs", "must be >= 0");
        if (t.cache.digest.bits == 0) fail(path + ".cache.digest.bits", "must be > 0");
        if (t.cache.digest.hashes == 0) fail(path + ".cache.digest.hashes", "must be >= 1");
        if (t.cache.digest.rebuildPeriodS <= 0.0)
            fail(path + ".cache.digest.rebuildPeriodS", "must be > 0");
        if (t.cache.prefill.fraction < 0.0 || t.cache.prefill.fraction > 1.0)
            fail(path + ".cache.prefill.fraction", "must be in [0, 1]");
        if (t.cache.prefill.offsetObjects >= t.workload.catalogSize &&
            t.cache.prefill.fraction > 0.0)
            fail(path + ".cache.prefill.offsetObjects", "beyond the catalog");

        const WorkloadSpec& w = t.workload;
        if (w.catalogSize == 0) fail(path + ".workload.catalogSize", "must be >= 1");
        if (w.zipfAlpha < 0.0) fail(path + ".workload.zipfAlpha", "must be >= 0");
        if (w.rateRps < 0.0) fail(path + ".workload.rateRps", "must be >= 0");
        if (w.personalizedFraction < 0.0 || w.personalizedFraction > 1.0)
            fail(path + ".workload.personalizedFraction", "must be in [0, 1]");
        if (w.objectBytes == 0) fail(path + ".workload.objectBytes", "must be > 0");
        if (w.overlap) {
            if (w.overlap->fraction < 0.0 || w.overlap->fraction > 1.0)
                fail(path + ".workload.overlap.fraction", "must be in [0, 1]");
            int peer = tenantIndexByName(cfg.tenants, w.overlap->peer);
            if (peer < 0)
                fail(path + ".workload.overlap.peer",
                     "names unknown tenant '" + w.overlap->peer + "'");
            else if (static_cast<std::size_t>(peer) == i)
                fail(path + ".workload.overlap.peer", "a tenant cannot overlap with itself");
            else {
                const TenantSpec& p = cfg.tenants[peer];
                if (p.workload.overlap &&
                    (p.workload.overlap->peer != t.name ||
                     p.workload.overlap->fraction != w.overlap->fraction))
                    fail(path + ".workload.overlap", "overlap declarations are not symmetric");
                if (sharedObjectCount(cfg, i) !=
                    static_cast<std::uint64_t>(std::floor(
                        w.overlap->fraction * static_cast<double>(p.workload.catalogSize))))
                    fail(path + ".workload.overlap",
                         "shared object counts differ between the two catalogs");
                if (p.workload.objectBytes != w.objectBytes)
                    fail(path + ".workload.overlap",
                         "overlapping tenants must use the same objectBytes");
            }
        }
        if (!w.destinations.empty()) {
            std::uint64_t sum = 0;
            for (const DestinationSpec& d : w.destinations) sum += d.objects;
            std::uint64_t expected = w.catalogSize - sharedObjectCount(cfg, i);
            if (sum != expected)
                fail(path + ".workload.destinations",
                     "destination blocks cover " + std::to_string(sum) + " objects, expected " +
                         std::to_string(expected));
        }

        const InterceptionSpec& n = t.interception;
        if (n.missThreshold < 0.0 || n.missThreshold > 1.0)
            fail(path + ".interception.missThreshold", "must be in [0, 1]");
        if (n.windowS <= 0.0) fail(path + ".interception.windowS", "must be > 0");
        if (n.minSamples == 0) fail(path + ".interception.minSamples", "must be >= 1");
        if (n.derivePeriodS <= 0.0) fail(path + ".interception.derivePeriodS", "must be > 0");
        std::size_t blockCount =
            w.destinations.empty() ? 1 : w.destinations.size();
        for (std::size_t r = 0; r < n.staticRules.size(); ++r)
            if (n.staticRules[r].destinationIndex >= blockCount)
                fail(path + ".interception.staticRules[" + std::to_string(r) +
                         "].destinationIndex",
                     "no such destination block");
    }

    std::map<std::string, DelayPoolConfig> poolByCache;
    for (std::size_t i = 0; i < cfg.peeringLinks.size(); ++i) {
        const PeeringLinkSpec& l = cfg.peeringLinks[i];
        std::string path = "$.peering.links[" + std::to_string(i) + "]";
        int a = tenantIndexByName(cfg.tenants, l.a);
        int b = tenantIndexByName(cfg.tenants, l.b);
        if (a < 0) fail(path + ".a", "names unknown tenant '" + l.a + "'");
        if (b < 0) fail(path + ".b", "names unknown tenant '" + l.b + "'");
        if (a >= 0 && a == b) fail(path, "peering is inter-VNO; a and b must differ");
        if (l.owner != l.a && l.owner != l.b)
            fail(path + ".owner", "must be one of the two endpoint tenants");
        if (l.icpTimeoutS && *l.icpTimeoutS <= 0.0) fail(path + ".icpTimeoutS", "must be > 0");
        if (l.delayPool) {
            const DelayPoolConfig& p = *l.delayPool;
            if (p.aggregateCapacityBytes <= 0.0 || p.individualCapacityBytes <= 0.0)
                fail(path + ".delayPool", "bucket capacities must be > 0");
            if (p.aggregateRateBps <= 0.0 || p.individualRateBps <= 0.0)
                fail(path + ".delayPool", "bucket rates must be > 0");
            for (const std::string& name : {l.a, l.b}) {
                auto [it, inserted] = poolByCache.try_emplace(name, p);
                if (!inserted &&
                    (it->second.aggregateCapacityBytes != p.aggregateCapacityBytes ||
                     it->second.aggregateRateBps != p.aggregateRateBps ||
                     it->second.individualCapacityBytes != p.individualCapacityBytes ||
                     it->second.individualRateBps != p.individualRateBps))
                    fail(path + ".delayPool",
                         "cache '" + name + "' already has a different delay pool");
            }
        }
        // Req.4 advisory: a shared path at least as slow as the WAN makes
        // peering pointless.
        if (a >= 0 && b >= 0) {
            bool coHosted = cfg.tenants[a].cache.host == cfg.tenants[b].cache.host;
            double sharedOneWayMs =
                coHosted ? 2.0 * cfg.topology.intraHost.latencyMs
                         : 4.0 * cfg.topology.intraHost.latencyMs +
                               cfg.topology.interHost.latencyMs;
            if (sharedOneWayMs >= cfg.topology.wan.latencyMs)
                warn(path, "shared-network latency (" + std::to_string(sharedOneWayMs) +
                               " ms) is not below the WAN latency (" +
                               std::to_string(cfg.topology.wan.latencyMs) +
                               " ms); peering cannot pay off");
        }
    }

    if (cfg.attack) {
        if (tenantIndexByName(cfg.tenants, cfg.attack->tenant) < 0)
            fail("$.attack.tenant", "names unknown tenant '" + cfg.attack->tenant + "'");
        if (tenantIndexByName(cfg.tenants, cfg.attack->target) < 0)
            fail("$.attack.target", "names unknown tenant '" + cfg.attack->target + "'");
        if (cfg.attack->tenant == cfg.attack->target)
            fail("$.attack", "attacker and target must differ");
        if (cfg.attack->queryRateRps < 0.0 || cfg.attack->fetchRateRps < 0.0)
            fail("$.attack", "rates must be >= 0");
    }

    for (std::size_t i = 0; i < cfg.tenants.size(); ++i)
        if (cfg.tenants[i].workload.abusePeering && cfg.peeringLinks.empty())
            warn("$.tenants[" + std::to_string(i) + "].workload.abusePeering",
                 "set but no peering links are defined");

    return out;
}

}  // namespace vcsim

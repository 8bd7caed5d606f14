#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "vcachesim/sim.hpp"

using namespace vcsim;

namespace {

// canonical test bed: 40 ms WAN one-way, 1 ms intra-DC round trip between
// co-hosted caches (2 x 0.25 ms each way)
ScenarioConfig twoTenantConfig() {
    ScenarioConfig cfg;
    cfg.name = "sim-test";
    cfg.seed = 1;
    cfg.durationS = 10.0;
    cfg.topology.hosts = 1;
    cfg.topology.wan = {40.0, 1.25e8};
    cfg.topology.backhaul = {0.25, 1.25e9};
    cfg.topology.interHost = {0.25, 1.25e9};
    cfg.topology.intraHost = {0.25, 1.25e10};

    for (int i = 0; i < 2; ++i) {
        TenantSpec t;
        t.name = i == 0 ? "vnoA" : "vnoB";
        t.cache.host = 0;
        t.cache.capacityBytes = 1000000;  // 100 objects
        t.workload.catalogSize = 1000;
        t.workload.zipfAlpha = 0.8;
        t.workload.objectBytes = 10000;
        t.workload.rateRps = i == 0 ? 400.0 : 0.0;
        cfg.tenants.push_back(t);
    }
    cfg.tenants[0].workload.overlap = OverlapSpec{"vnoB", 1.0};
    cfg.tenants[1].cache.prefill.fraction = 1.0;
    return cfg;
}

PeeringLinkSpec plainLink(bool readThrough = false) {
    PeeringLinkSpec l;
    l.a = "vnoA";
    l.b = "vnoB";
    l.owner = "vnoA";
    l.readThrough = readThrough;
    return l;
}

struct Expected {
    double localS;
    double originS;
    double peerS;
    double bypassS;
};

// closed-form per-request latencies from the scenario's link parameters,
// composed independently of the engine
Expected expectedLatencies(const ScenarioConfig& cfg, std::size_t tenantIdx, std::size_t peerIdx) {
    BuiltTopology built = buildTopology(cfg);
    MicroDcTopology& topo = built.topo;
    NodeId net = topo.createSharedNetwork(static_cast<TenantId>(tenantIdx));
    topo.grantNetworkAccess(net, static_cast<TenantId>(tenantIdx),
                            static_cast<TenantId>(peerIdx));
    topo.attachCache(net, built.cacheIds[tenantIdx]);
    topo.attachCache(net, built.cacheIds[peerIdx]);

    FlowScope scope = FlowScope::vlan(built.vlans[tenantIdx]);
    PathResult uc = topo.computePath(built.userNodes[tenantIdx], built.cacheNodes[tenantIdx], scope);
    PathResult co = topo.computePath(built.cacheNodes[tenantIdx], built.origin, scope);
    PathResult uo = topo.computePath(built.userNodes[tenantIdx], built.origin, scope);
    PathResult sh = topo.computePath(built.cacheNodes[tenantIdx], built.cacheNodes[peerIdx],
                                     FlowScope::sharedNetwork(net));

    const double req = static_cast<double>(cfg.messages.requestBytes);
    const double icp = static_cast<double>(cfg.messages.icpBytes);
    const double obj = static_cast<double>(cfg.tenants[tenantIdx].workload.objectBytes);
    const double procA = msToS(cfg.tenants[tenantIdx].cache.processingDelayMs);
    const double procB = msToS(cfg.tenants[peerIdx].cache.processingDelayMs);
    auto leg = [](const PathResult& p, double bytes) { return p.latencyS + p.perByteS * bytes; };

    Expected e;
    e.localS = leg(uc, req) + procA + leg(uc, obj);
    e.originS = leg(uc, req) + procA + leg(co, req) + leg(co, obj) + procA + leg(uc, obj);
    e.peerS = leg(uc, req) + procA + leg(sh, icp) + procB + leg(sh, icp) + leg(sh, req) + procB +
              leg(sh, obj) + procA + leg(uc, obj);
    e.bypassS = leg(uo, req) + leg(uo, obj);
    return e;
}

const TenantMetrics& tenantMetrics(const SimResult& r, const std::string& name) {
    for (const auto& [n, m] : r.report.tenants)
        if (n == name) return m;
    throw std::runtime_error("no tenant " + name);
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("zero duration produces an empty well-formed report") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.durationS = 0.0;
    SimResult r = runScenario(cfg);
    CHECK(r.report.global.requests == 0);
    CHECK(r.trace.empty());
    auto parsed = nlohmann::json::parse(r.report.toJsonString());
    CHECK(parsed["global"]["requests"] == 0);
    CHECK(parsed["tenants"].size() == 2);
}

TEST_CASE("identical config and seed give bit-identical outputs") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.peeringLinks.push_back(plainLink());
    cfg.emitIcpTrace = true;
    SimResult a = runScenario(cfg);
    SimResult b = runScenario(cfg);
    CHECK(a.report.toJsonString() == b.report.toJsonString());
    std::ostringstream ta, tb, ia, ib, la, lb;
    a.writeTraceCsv(ta);
    b.writeTraceCsv(tb);
    CHECK(ta.str() == tb.str());
    a.writeIcpTraceCsv(ia);
    b.writeIcpTraceCsv(ib);
    CHECK(ia.str() == ib.str());
    a.accessLogs.at("vnoA").writeCsv(la);
    b.accessLogs.at("vnoA").writeCsv(lb);
    CHECK(la.str() == lb.str());
}

TEST_CASE("tree topology yields 4 traversals per origin fetch and 2 per hit") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.tenants[0].workload.personalizedFraction = 0.2;
    SimResult r = runScenario(cfg);
    Expected e = expectedLatencies(cfg, 0, 1);
    REQUIRE(r.report.global.requests > 1000);
    for (const RequestRecord& rec : r.trace) {
        if (rec.servedBy == ServedBy::Origin) {
            CHECK(rec.viTraversals == 4);
            CHECK(rec.latencyMs() == doctest::Approx(sToMs(e.originS)).epsilon(1e-9));
        } else if (rec.servedBy == ServedBy::Local) {
            CHECK(rec.viTraversals == 2);
            CHECK(rec.latencyMs() == doctest::Approx(sToMs(e.localS)).epsilon(1e-9));
        }
    }
    // the local path never touches the wan
    CHECK(sToMs(e.localS) < cfg.topology.wan.latencyMs);
}

TEST_CASE("peer-served requests beat the origin path whenever the DC is faster") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.peeringLinks.push_back(plainLink());
    SimResult r = runScenario(cfg);
    Expected e = expectedLatencies(cfg, 0, 1);
    const TenantMetrics& a = tenantMetrics(r, "vnoA");
    REQUIRE(a.peerHits > 100);
    for (const RequestRecord& rec : r.trace) {
        if (rec.servedBy != ServedBy::Peer) continue;
        CHECK(rec.viTraversals == 2);
        CHECK(rec.latencyMs() == doctest::Approx(sToMs(e.peerS)).epsilon(1e-9));
        CHECK(rec.latencyMs() < sToMs(e.originS));
    }
}

TEST_CASE("counts and bytes reconcile exactly") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.peeringLinks.push_back(plainLink());
    cfg.messages.requestBytes = 100;
    SimResult r = runScenario(cfg);
    const TenantMetrics& g = r.report.global;
    CHECK(g.requests == r.trace.size());
    CHECK(g.localHits + g.peerHits + g.originServed + g.bypassed == g.requests);
    std::uint64_t objBytes = cfg.tenants[0].workload.objectBytes;
    CHECK(g.wanBytes == (g.originServed + g.bypassed) * (objBytes + cfg.messages.requestBytes));
    CHECK(g.peeringBytesFetched == g.peerHits * objBytes);
    CHECK(g.peeringBytesFetched == g.peeringBytesServed);
    REQUIRE(r.report.links.size() == 1);
    const LinkReport& link = r.report.links[0];
    CHECK(link.acctA.bytesFetchedFromPeer == link.acctB.bytesServedToPeer);
    CHECK(link.acctB.bytesFetchedFromPeer == link.acctA.bytesServedToPeer);
    for (const RequestRecord& rec : r.trace) CHECK(rec.completedAt >= rec.issuedAt);
}

TEST_CASE("disabled peering moves zero inter-tenant bytes") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.tenants[1].workload.rateRps = 100.0;
    SimResult r = runScenario(cfg);
    CHECK(r.report.global.peeringBytesFetched == 0);
    CHECK(r.report.global.peeringBytesServed == 0);
    CHECK(r.report.global.peerHits == 0);
    CHECK(r.report.links.empty());
}

TEST_CASE("paired comparison shows the savings direction") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.peeringLinks.push_back(plainLink());
    CompareResult cmp = runCompare(cfg);
    CHECK(cmp.peeringOn.report.global.requests == cmp.peeringOff.report.global.requests);
    CHECK(cmp.deltaMeanLatencyMs < 0.0);
    CHECK(cmp.deltaWanBytes < 0);
    CHECK(cmp.peeringBytes > 0);
    CHECK(cmp.peeringOff.report.global.peerHits == 0);
}

TEST_CASE("disjoint catalogs leave peering idle") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.tenants[0].workload.overlap.reset();
    cfg.peeringLinks.push_back(plainLink());
    CompareResult cmp = runCompare(cfg);
    CHECK(cmp.peeringOn.report.global.peerHits == 0);
    CHECK(cmp.peeringBytes == 0);
    CHECK(std::abs(cmp.deltaMeanLatencyMs) < 1.0);  // at most ICP overhead
}

TEST_CASE("compare requires a peering link") {
    ScenarioConfig cfg = twoTenantConfig();
    CHECK_THROWS_AS(runCompare(cfg), NoPeeringDefinedError);
}

TEST_CASE("unauthenticated traffic is dropped and never served") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.peeringLinks.push_back(plainLink());
    TenantSpec mallory;
    mallory.name = "mallory";
    mallory.cache.host = 0;
    mallory.workload.rateRps = 0.0;
    cfg.tenants.push_back(mallory);
    cfg.attack = AttackSpec{"mallory", "vnoA", 200.0, 200.0};
    SimResult r = runScenario(cfg);
    const TenantMetrics& a = tenantMetrics(r, "vnoA");
    CHECK(a.aclDroppedQueries > 0);
    CHECK(a.aclDroppedFetches > 0);
    CHECK(a.attackQueriesAnswered == 0);
    CHECK(a.attackBytesServed == 0);
    for (const LinkReport& l : r.report.links) {
        CHECK(l.a != "mallory");
        CHECK(l.b != "mallory");
    }
    // the attack did not disturb the peering accounting identity
    const LinkReport& link = r.report.links[0];
    CHECK(link.acctA.bytesFetchedFromPeer == link.acctB.bytesServedToPeer);
}

TEST_CASE("an offloading peer is held back by the delay pool") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.durationS = 20.0;
    // vnoB offloads its misses to vnoA without availability checks
    cfg.tenants[0].workload.rateRps = 50.0;
    cfg.tenants[0].cache.prefill.fraction = 1.0;
    cfg.tenants[1].workload.rateRps = 2000.0;
    cfg.tenants[1].workload.abusePeering = true;
    cfg.tenants[1].cache.prefill.fraction = 0.0;
    PeeringLinkSpec link = plainLink();
    link.delayPool = DelayPoolConfig{200000.0, 100000.0, 100000.0, 50000.0};
    cfg.peeringLinks.push_back(link);
    SimResult r = runScenario(cfg);

    const TenantMetrics& b = tenantMetrics(r, "vnoB");
    REQUIRE(b.peerHits > 0);
    // the backlog drains past the horizon (admission is delayed, never
    // refused), so the shaping bound is taken over the actual service span
    double lastServedAt = 0.0;
    for (const RequestRecord& rec : r.trace)
        if (rec.servedBy == ServedBy::Peer) lastServedAt = std::max(lastServedAt, rec.completedAt);
    double bound = 100000.0 + 50000.0 * lastServedAt +
                   static_cast<double>(cfg.tenants[0].workload.objectBytes);
    const LinkReport& lr = r.report.links[0];
    CHECK(static_cast<double>(lr.acctA.bytesServedToPeer) <= bound);
    CHECK(lastServedAt > cfg.durationS);  // demand really exceeded the pool
    // the report surfaces the asymmetry
    auto ratio = symmetryRatio(lr.acctB);
    REQUIRE(ratio.has_value());
    CHECK(*ratio < 0.5);
}

TEST_CASE("digest false positives fall back to the origin exactly once") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.tenants[0].workload.overlap.reset();  // disjoint catalogs
    cfg.tenants[0].cache.digest.bits = 64;    // tiny filter, huge fp rate
    cfg.tenants[1].cache.digest.bits = 64;
    cfg.peeringLinks.push_back(plainLink());
    SimResult r = runScenario(cfg);
    const TenantMetrics& a = tenantMetrics(r, "vnoA");
    CHECK(a.digestFalsePositives > 0);
    CHECK(a.peerHits == 0);
    CHECK(r.report.global.requests == r.trace.size());
    CHECK(a.localHits + a.peerHits + a.originServed + a.bypassed == a.requests);
}

TEST_CASE("icp hit then eviction resolves through the origin") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.durationS = 5.0;
    cfg.tenants[0].workload.rateRps = 1000.0;
    // vnoB churns violently: tiny cache, hot inserts, fresh digests
    cfg.tenants[1].workload.rateRps = 4000.0;
    cfg.tenants[1].cache.capacityBytes = 30000;
    cfg.tenants[1].cache.prefill.fraction = 1.0;
    cfg.tenants[1].cache.digest.rebuildPeriodS = 0.05;
    cfg.tenants[0].cache.digest.rebuildPeriodS = 0.05;
    cfg.peeringLinks.push_back(plainLink());
    SimResult r = runScenario(cfg);
    const TenantMetrics& a = tenantMetrics(r, "vnoA");
    CHECK(a.evictedRaces > 0);
    CHECK(r.report.global.requests == r.trace.size());
    const TenantMetrics& g = r.report.global;
    CHECK(g.localHits + g.peerHits + g.originServed + g.bypassed == g.requests);
}

TEST_CASE("derived rules start bypassing the personalized destination") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.durationS = 30.0;
    cfg.tenants[0].workload.rateRps = 300.0;
    cfg.tenants[0].workload.catalogSize = 400;
    cfg.tenants[0].workload.overlap.reset();
    cfg.tenants[0].workload.destinations = {DestinationSpec{200, true, std::nullopt},
                                            DestinationSpec{200, false, std::nullopt}};
    cfg.tenants[0].interception.enabled = true;
    cfg.tenants[0].interception.derivePeriodS = 10.0;
    cfg.tenants[0].interception.windowS = 50.0;
    cfg.tenants[0].interception.minSamples = 10;
    cfg.tenants[0].interception.missThreshold = 0.8;
    SimResult r = runScenario(cfg);

    DestinationId personalized = tenantDestinationId(0, 0);
    const TenantMetrics& a = tenantMetrics(r, "vnoA");
    CHECK(a.ruleDerivations >= 2);
    CHECK(a.bypassed > 0);
    for (const RequestRecord& rec : r.trace) {
        if (rec.contentId.destination == personalized && rec.issuedAt > 10.5)
            CHECK(rec.servedBy == ServedBy::OriginBypassed);
    }
    // bypassed requests never touch the cache log
    for (const AccessLogRecord& rec : r.accessLogs.at("vnoA").records())
        if (rec.contentId.destination == personalized) CHECK(rec.time <= 10.5);
    CHECK(r.finalRules.at("vnoA").match(personalized) == FlowAction::Bypass);
}

TEST_CASE("icp trace rows are chronological when enabled") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.peeringLinks.push_back(plainLink());
    cfg.emitIcpTrace = true;
    SimResult r = runScenario(cfg);
    REQUIRE_FALSE(r.icpTrace.empty());
    for (std::size_t i = 1; i < r.icpTrace.size(); ++i)
        CHECK(r.icpTrace[i].time >= r.icpTrace[i - 1].time);
}

TEST_CASE("invalid configs are rejected with the offending path") {
    ScenarioConfig cfg = twoTenantConfig();
    cfg.tenants[0].cache.host = 7;  // out of range
    try {
        runScenario(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field.find("cache.host") != std::string::npos);
    }
}

}  // TEST_SUITE

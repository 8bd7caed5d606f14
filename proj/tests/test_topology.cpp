#include <set>

#include "doctest.h"
#include "vcachesim/scenario.hpp"
#include "vcachesim/topology.hpp"

using namespace vcsim;

namespace {

// two tenants on separate hosts, all non-wan latencies zeroed so the wan
// link is the only latency contributor
ScenarioConfig flatConfig(int hosts = 2) {
    ScenarioConfig cfg;
    cfg.topology.hosts = hosts;
    cfg.topology.wan = {40.0, 1e9};
    cfg.topology.backhaul = {0.0, 1e9};
    cfg.topology.interHost = {0.0, 1e9};
    cfg.topology.intraHost = {0.0, 1e9};
    for (int i = 0; i < 2; ++i) {
        TenantSpec t;
        t.name = i == 0 ? "vnoA" : "vnoB";
        t.cache.host = i % hosts;
        cfg.tenants.push_back(t);
    }
    return cfg;
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("user to origin crosses only the wan link") {
    BuiltTopology built = buildTopology(flatConfig());
    PathResult p =
        built.topo.computePath(built.userNodes[0], built.origin, FlowScope::vlan(built.vlans[0]));
    CHECK(p.latencyS == doctest::Approx(0.040));
    CHECK(p.viTraversals == 1);
    CHECK(p.usesWan);
}

TEST_CASE("miss round trip composes to four boundary crossings") {
    BuiltTopology built = buildTopology(flatConfig());
    FlowScope scope = FlowScope::vlan(built.vlans[0]);
    PathResult userCache = built.topo.computePath(built.userNodes[0], built.cacheNodes[0], scope);
    PathResult cacheOrigin = built.topo.computePath(built.cacheNodes[0], built.origin, scope);
    int roundTrip = 2 * userCache.viTraversals + 2 * cacheOrigin.viTraversals;
    CHECK(userCache.viTraversals == 1);
    CHECK(cacheOrigin.viTraversals == 1);
    CHECK(roundTrip == 4);
    // a local hit sees only the user legs
    CHECK(2 * userCache.viTraversals == 2);
}

TEST_CASE("vlan isolation forbids cross-tenant flows") {
    BuiltTopology built = buildTopology(flatConfig());
    CHECK_THROWS_AS(built.topo.computePath(built.userNodes[0], built.cacheNodes[1],
                                           FlowScope::vlan(built.vlans[0])),
                    NoPathError);
    CHECK_THROWS_AS(built.topo.computePath(built.cacheNodes[0], built.cacheNodes[1],
                                           FlowScope::vlan(built.vlans[0])),
                    NoPathError);
}

TEST_CASE("grant is owner-only and idempotent") {
    BuiltTopology built = buildTopology(flatConfig());
    MicroDcTopology& topo = built.topo;
    NodeId net = topo.createSharedNetwork(0);
    CHECK_THROWS_AS(topo.grantNetworkAccess(net, 1, 1), NotOwnerError);
    topo.grantNetworkAccess(net, 0, 1);
    topo.grantNetworkAccess(net, 0, 1);  // same state as once
    CHECK(topo.sharedNetwork(net).granted == std::set<TenantId>{1});
}

TEST_CASE("attach requires a grant and rejects duplicates") {
    BuiltTopology built = buildTopology(flatConfig());
    MicroDcTopology& topo = built.topo;
    NodeId net = topo.createSharedNetwork(0);
    topo.attachCache(net, built.cacheIds[0]);  // owner attaches its own cache
    CHECK_THROWS_AS(topo.attachCache(net, built.cacheIds[1]), NotGrantedError);
    topo.grantNetworkAccess(net, 0, 1);
    topo.attachCache(net, built.cacheIds[1]);
    CHECK_THROWS_AS(topo.attachCache(net, built.cacheIds[1]), AlreadyAttachedError);
    CHECK(topo.sharedNetwork(net).attached.size() == 2);
}

TEST_CASE("co-hosted caches reach each other through br-int only") {
    ScenarioConfig cfg = flatConfig();
    cfg.tenants[1].cache.host = 0;
    BuiltTopology built = buildTopology(cfg);
    MicroDcTopology& topo = built.topo;
    NodeId net = topo.createSharedNetwork(0);
    topo.grantNetworkAccess(net, 0, 1);
    topo.attachCache(net, built.cacheIds[0]);
    topo.attachCache(net, built.cacheIds[1]);

    PathResult p = topo.computePath(built.cacheNodes[0], built.cacheNodes[1],
                                    FlowScope::sharedNetwork(net));
    CHECK(p.viTraversals == 0);
    CHECK_FALSE(p.usesWan);
    REQUIRE(p.nodes.size() == 3);  // cacheA, br-int, cacheB
    CHECK(topo.node(p.nodes[1]).kind == NodeKind::IntegrationBridge);
    for (std::size_t li : p.linkIdx) CHECK(topo.links()[li].kind == LinkKind::IntraHost);
}

TEST_CASE("cross-host caches use the br-vlan shortcut, never the wan") {
    BuiltTopology built = buildTopology(flatConfig());
    MicroDcTopology& topo = built.topo;
    NodeId net = topo.createSharedNetwork(0);
    topo.grantNetworkAccess(net, 0, 1);
    topo.attachCache(net, built.cacheIds[0]);
    topo.attachCache(net, built.cacheIds[1]);

    PathResult p = topo.computePath(built.cacheNodes[0], built.cacheNodes[1],
                                    FlowScope::sharedNetwork(net));
    CHECK(p.viTraversals == 0);
    CHECK_FALSE(p.usesWan);
    int interHost = 0;
    for (std::size_t li : p.linkIdx) {
        const Link& l = topo.links()[li];
        CHECK(l.kind != LinkKind::Wan);
        CHECK(l.kind != LinkKind::Backhaul);
        if (l.kind == LinkKind::InterHost) {
            ++interHost;
            CHECK(topo.node(l.a).kind == NodeKind::VlanBridge);
            CHECK(topo.node(l.b).kind == NodeKind::VlanBridge);
        }
    }
    CHECK(interHost == 1);
    for (NodeId n : p.nodes) CHECK(topo.node(n).kind != NodeKind::ExternalBridge);
}

TEST_CASE("unattached caches cannot use a shared network") {
    BuiltTopology built = buildTopology(flatConfig());
    MicroDcTopology& topo = built.topo;
    NodeId net = topo.createSharedNetwork(0);
    topo.attachCache(net, built.cacheIds[0]);
    CHECK_THROWS_AS(topo.computePath(built.cacheNodes[0], built.cacheNodes[1],
                                     FlowScope::sharedNetwork(net)),
                    NoPathError);
}

TEST_CASE("round trips have even traversal counts") {
    for (int hosts : {1, 2, 3}) {
        ScenarioConfig cfg = flatConfig(hosts);
        BuiltTopology built = buildTopology(cfg);
        for (std::size_t t = 0; t < cfg.tenants.size(); ++t) {
            FlowScope scope = FlowScope::vlan(built.vlans[t]);
            PathResult uc =
                built.topo.computePath(built.userNodes[t], built.cacheNodes[t], scope);
            PathResult co = built.topo.computePath(built.cacheNodes[t], built.origin, scope);
            PathResult uo = built.topo.computePath(built.userNodes[t], built.origin, scope);
            CHECK((2 * uc.viTraversals) % 2 == 0);
            CHECK((2 * uc.viTraversals + 2 * co.viTraversals) % 2 == 0);
            CHECK((2 * uo.viTraversals) % 2 == 0);
        }
    }
}

TEST_CASE("per-switch forwarding delay accumulates along the path") {
    ScenarioConfig cfg = flatConfig();
    cfg.topology.switchDelayMs = 0.1;
    BuiltTopology built = buildTopology(cfg);
    PathResult p = built.topo.computePath(built.userNodes[0], built.cacheNodes[0],
                                          FlowScope::vlan(built.vlans[0]));
    // user -> edge -> br-ex -> br-vlan -> br-int -> cache: 4 switches
    CHECK(p.latencyS == doctest::Approx(4 * 0.0001));
}

TEST_CASE("serialization adds size over bandwidth per link") {
    ScenarioConfig cfg = flatConfig();
    cfg.topology.wan = {40.0, 1e6};
    BuiltTopology built = buildTopology(cfg);
    PathResult p =
        built.topo.computePath(built.userNodes[0], built.origin, FlowScope::vlan(built.vlans[0]));
    // 1e6 bytes over the 1e6 B/s wan link costs one extra second; the other
    // links are 1e9 B/s
    CHECK(p.latencyFor(1000000) ==
          doctest::Approx(0.040 + 1.0 + 2.0 * 1000000.0 / 1e9).epsilon(1e-9));
}

TEST_CASE("structural validation flags broken topologies") {
    BuiltTopology built = buildTopology(flatConfig());
    CHECK(built.topo.validate().empty());

    MicroDcTopology broken;
    broken.addSwitch(NodeKind::ExternalBridge);
    broken.addSwitch(NodeKind::ExternalBridge);
    auto violations = broken.validate();
    bool flagged = false;
    for (const auto& v : violations)
        if (v.message.find("external bridge") != std::string::npos) flagged = true;
    CHECK(flagged);
}

}  // TEST_SUITE

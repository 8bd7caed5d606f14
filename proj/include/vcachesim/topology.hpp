#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vcachesim/errors.hpp"
#include "vcachesim/types.hpp"

namespace vcsim {

// Node roles in the shared micro-data-center. The switch kinds mirror a
// simplified OpenStack data plane: per-host integration (br-int) and VLAN
// (br-vlan) bridges, one external bridge (br-ex) on the network node, edge
// devices on the access side, and optional per-VM security bridges (qbr).
enum class NodeKind {
    User,
    Origin,
    Edge,
    SecurityBridge,
    IntegrationBridge,
    VlanBridge,
    ExternalBridge,
    CacheVm,
    SharedNetwork,  // addressable virtual network, never on a forwarding path
};

enum class LinkKind { IntraHost, InterHost, Backhaul, Wan };

struct Node {
    NodeId id = 0;
    NodeKind kind = NodeKind::User;
    std::optional<TenantId> tenant;  // set for User and CacheVm nodes
    std::optional<HostId> host;      // set for host-local nodes
    std::optional<CacheId> cache;    // set for CacheVm nodes
};

struct Link {
    NodeId a = 0;
    NodeId b = 0;
    double latencyS = 0.0;       // one-way propagation
    double bandwidthBps = 1.0;   // bytes per second, > 0
    LinkKind kind = LinkKind::IntraHost;
};

// Tenant-owned virtual network used as the peering substrate. The owner
// grants other tenants attachment rights by tenant id; caches of the owner or
// a granted tenant may attach.
struct SharedNetwork {
    NodeId id = 0;
    TenantId owner = 0;
    std::set<TenantId> granted;
    std::set<CacheId> attached;
};

struct ComputeHost {
    HostId id = 0;
    NodeId integrationBridge = 0;
    NodeId vlanBridge = 0;
    std::vector<CacheId> caches;
};

// One resolved forwarding path. viTraversals counts crossings of the
// external bridge, the boundary of the virtualized infrastructure.
struct PathResult {
    std::vector<std::size_t> linkIdx;  // ordered links, indices into links()
    std::vector<NodeId> nodes;         // node sequence, size = links + 1
    double latencyS = 0.0;             // propagation + per-switch forwarding delay
    double perByteS = 0.0;             // sum of 1/bandwidth over the links
    int viTraversals = 0;
    bool usesWan = false;

    double latencyFor(std::uint64_t payloadBytes) const {
        return latencyS + perByteS * static_cast<double>(payloadBytes);
    }
};

// A flow is scoped either to a tenant VLAN segment or to a shared peering
// network; the scope decides which endpoints and links are admissible.
class FlowScope {
public:
    static FlowScope vlan(VlanId v) { return FlowScope(true, v); }
    static FlowScope sharedNetwork(NodeId n) { return FlowScope(false, n); }

    bool isVlan() const { return isVlan_; }
    VlanId vlanId() const { return static_cast<VlanId>(id_); }
    NodeId networkId() const { return static_cast<NodeId>(id_); }

private:
    FlowScope(bool isVlan, std::uint32_t id) : isVlan_(isVlan), id_(id) {}
    bool isVlan_;
    std::uint32_t id_;
};

struct TopologyViolation {
    std::string where;
    std::string message;
};

// The shared micro-data-center: a tree (users/origin - edge - external
// bridge - per-host bridges - VMs) plus direct br-vlan<->br-vlan shortcut
// links used only by shared peering networks. Mutable during scenario setup,
// read-only while the event loop runs.
class MicroDcTopology {
public:
    NodeId addSwitch(NodeKind kind, std::optional<HostId> host = std::nullopt);
    NodeId addUser(TenantId tenant);
    NodeId addOrigin();
    NodeId addCacheVm(CacheId cache, TenantId tenant, HostId host);
    HostId declareHost(NodeId integrationBridge, NodeId vlanBridge);
    std::size_t addLink(NodeId a, NodeId b, double latencyS, double bandwidthBps, LinkKind kind);
    void addVlanSegment(VlanId vlan, TenantId tenant);
    void setSwitchDelayS(double s) { switchDelayS_ = s; }

    // RBAC shared-network lifecycle.
    NodeId createSharedNetwork(TenantId owner);
    void grantNetworkAccess(NodeId network, TenantId grantor, TenantId grantee);
    void attachCache(NodeId network, CacheId cache);

    // Unique configured path between two endpoints under the given scope.
    // Throws NoPathError when isolation forbids the flow.
    PathResult computePath(NodeId src, NodeId dst, FlowScope scope) const;

    std::vector<TopologyViolation> validate() const;

    const Node& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<Link>& links() const { return links_; }
    const std::vector<ComputeHost>& hosts() const { return hosts_; }
    const std::map<VlanId, TenantId>& vlanSegments() const { return vlanSegments_; }
    const std::map<NodeId, SharedNetwork>& sharedNetworks() const { return sharedNetworks_; }
    const SharedNetwork& sharedNetwork(NodeId id) const;
    double switchDelayS() const { return switchDelayS_; }

    TenantId cacheTenant(CacheId cache) const;
    HostId cacheHost(CacheId cache) const;
    NodeId cacheNode(CacheId cache) const;
    bool hasCache(CacheId cache) const { return cacheSites_.count(cache) > 0; }

private:
    struct CacheSite {
        NodeId node;
        TenantId tenant;
        HostId host;
    };

    NodeId allocate(NodeKind kind);
    bool linkAdmissible(const Link& link, const FlowScope& scope) const;
    bool endpointAdmissible(const Node& n, const FlowScope& scope) const;

    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<std::size_t>> adjacency_;  // node -> link indices
    std::vector<ComputeHost> hosts_;
    std::map<VlanId, TenantId> vlanSegments_;
    std::map<NodeId, SharedNetwork> sharedNetworks_;
    std::map<CacheId, CacheSite> cacheSites_;
    double switchDelayS_ = 0.0;
};

}  // namespace vcsim

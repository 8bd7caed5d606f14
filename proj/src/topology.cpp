#include "vcachesim/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace vcsim {

namespace {

bool isSwitch(NodeKind k) {
    switch (k) {
        case NodeKind::Edge:
        case NodeKind::SecurityBridge:
        case NodeKind::IntegrationBridge:
        case NodeKind::VlanBridge:
        case NodeKind::ExternalBridge:
            return true;
        default:
            return false;
    }
}

}  // namespace

NodeId MicroDcTopology::allocate(NodeKind kind) {
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{id, kind, std::nullopt, std::nullopt, std::nullopt});
    adjacency_.emplace_back();
    return id;
}

NodeId MicroDcTopology::addSwitch(NodeKind kind, std::optional<HostId> host) {
    NodeId id = allocate(kind);
    nodes_[id].host = host;
    return id;
}

NodeId MicroDcTopology::addUser(TenantId tenant) {
    NodeId id = allocate(NodeKind::User);
    nodes_[id].tenant = tenant;
    return id;
}

NodeId MicroDcTopology::addOrigin() { return allocate(NodeKind::Origin); }

NodeId MicroDcTopology::addCacheVm(CacheId cache, TenantId tenant, HostId host) {
    if (cacheSites_.count(cache) > 0)
        throw SimError("cache " + std::to_string(cache) + " already placed");
    NodeId id = allocate(NodeKind::CacheVm);
    nodes_[id].tenant = tenant;
    nodes_[id].host = host;
    nodes_[id].cache = cache;
    cacheSites_[cache] = CacheSite{id, tenant, host};
    hosts_.at(host).caches.push_back(cache);
    return id;
}

HostId MicroDcTopology::declareHost(NodeId integrationBridge, NodeId vlanBridge) {
    HostId id = static_cast<HostId>(hosts_.size());
    hosts_.push_back(ComputeHost{id, integrationBridge, vlanBridge, {}});
    nodes_.at(integrationBridge).host = id;
    nodes_.at(vlanBridge).host = id;
    return id;
}

std::size_t MicroDcTopology::addLink(NodeId a, NodeId b, double latencyS, double bandwidthBps,
                                     LinkKind kind) {
    if (bandwidthBps <= 0.0) throw SimError("link bandwidth must be > 0");
    if (latencyS < 0.0) throw SimError("link latency must be >= 0");
    std::size_t idx = links_.size();
    links_.push_back(Link{a, b, latencyS, bandwidthBps, kind});
    adjacency_.at(a).push_back(idx);
    adjacency_.at(b).push_back(idx);
    return idx;
}

void MicroDcTopology::addVlanSegment(VlanId vlan, TenantId tenant) {
    if (vlanSegments_.count(vlan) > 0 && vlanSegments_[vlan] != tenant)
        throw SimError("VLAN " + std::to_string(vlan) + " already maps to another tenant");
    vlanSegments_[vlan] = tenant;
}

NodeId MicroDcTopology::createSharedNetwork(TenantId owner) {
    NodeId id = allocate(NodeKind::SharedNetwork);
    sharedNetworks_[id] = SharedNetwork{id, owner, {}, {}};
    return id;
}

const SharedNetwork& MicroDcTopology::sharedNetwork(NodeId id) const {
    auto it = sharedNetworks_.find(id);
    if (it == sharedNetworks_.end())
        throw SimError("no shared network with id " + std::to_string(id));
    return it->second;
}

void MicroDcTopology::grantNetworkAccess(NodeId network, TenantId grantor, TenantId grantee) {
    auto it = sharedNetworks_.find(network);
    if (it == sharedNetworks_.end())
        throw SimError("no shared network with id " + std::to_string(network));
    if (it->second.owner != grantor)
        throw NotOwnerError("tenant " + std::to_string(grantor) + " does not own network " +
                            std::to_string(network));
    it->second.granted.insert(grantee);  // idempotent
}

void MicroDcTopology::attachCache(NodeId network, CacheId cache) {
    auto it = sharedNetworks_.find(network);
    if (it == sharedNetworks_.end())
        throw SimError("no shared network with id " + std::to_string(network));
    SharedNetwork& net = it->second;
    TenantId tenant = cacheTenant(cache);
    if (tenant != net.owner && net.granted.count(tenant) == 0)
        throw NotGrantedError("tenant " + std::to_string(tenant) +
                              " has no access to network " + std::to_string(network));
    if (net.attached.count(cache) > 0)
        throw AlreadyAttachedError("cache " + std::to_string(cache) + " already attached");
    net.attached.insert(cache);
}

TenantId MicroDcTopology::cacheTenant(CacheId cache) const {
    auto it = cacheSites_.find(cache);
    if (it == cacheSites_.end()) throw SimError("unknown cache " + std::to_string(cache));
    return it->second.tenant;
}

HostId MicroDcTopology::cacheHost(CacheId cache) const {
    auto it = cacheSites_.find(cache);
    if (it == cacheSites_.end()) throw SimError("unknown cache " + std::to_string(cache));
    return it->second.host;
}

NodeId MicroDcTopology::cacheNode(CacheId cache) const {
    auto it = cacheSites_.find(cache);
    if (it == cacheSites_.end()) throw SimError("unknown cache " + std::to_string(cache));
    return it->second.node;
}

bool MicroDcTopology::endpointAdmissible(const Node& n, const FlowScope& scope) const {
    if (scope.isVlan()) {
        auto seg = vlanSegments_.find(scope.vlanId());
        if (seg == vlanSegments_.end()) return false;
        TenantId tenant = seg->second;
        if (n.kind == NodeKind::Origin) return true;
        if (n.kind == NodeKind::User || n.kind == NodeKind::CacheVm)
            return n.tenant && *n.tenant == tenant;
        return false;
    }
    // Shared-network scope: endpoints must be caches attached to the network.
    if (n.kind != NodeKind::CacheVm || !n.cache) return false;
    const auto it = sharedNetworks_.find(scope.networkId());
    if (it == sharedNetworks_.end()) return false;
    return it->second.attached.count(*n.cache) > 0;
}

bool MicroDcTopology::linkAdmissible(const Link& link, const FlowScope& scope) const {
    const NodeKind ka = nodes_[link.a].kind;
    const NodeKind kb = nodes_[link.b].kind;
    if (scope.isVlan()) {
        // Tenant flows stay on the tree; the br-vlan<->br-vlan shortcut is
        // reserved for shared peering networks.
        return !(ka == NodeKind::VlanBridge && kb == NodeKind::VlanBridge);
    }
    // Peering traffic never leaves the micro-DC.
    auto forbidden = [](NodeKind k) {
        return k == NodeKind::ExternalBridge || k == NodeKind::Edge || k == NodeKind::User ||
               k == NodeKind::Origin;
    };
    return !forbidden(ka) && !forbidden(kb);
}

PathResult MicroDcTopology::computePath(NodeId src, NodeId dst, FlowScope scope) const {
    if (src >= nodes_.size() || dst >= nodes_.size())
        throw SimError("computePath: endpoint does not exist");
    if (!endpointAdmissible(nodes_[src], scope) || !endpointAdmissible(nodes_[dst], scope))
        throw NoPathError("flow between " + std::to_string(src) + " and " + std::to_string(dst) +
                          " not admitted by its scope");

    // BFS over admissible links. Scenario topologies are trees plus the
    // shared-network shortcut, and the scoping rules exclude the cycle, so
    // the discovered path is the unique configured one.
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> via(nodes_.size(), kNone);  // link used to reach node
    std::vector<NodeId> from(nodes_.size(), 0);
    std::vector<bool> seen(nodes_.size(), false);
    std::deque<NodeId> frontier{src};
    seen[src] = true;
    while (!frontier.empty() && !seen[dst]) {
        NodeId cur = frontier.front();
        frontier.pop_front();
        for (std::size_t li : adjacency_[cur]) {
            const Link& link = links_[li];
            if (!linkAdmissible(link, scope)) continue;
            NodeId next = link.a == cur ? link.b : link.a;
            if (seen[next]) continue;
            // Interior nodes must be switches (VMs and endpoints are leaves).
            if (next != dst && !isSwitch(nodes_[next].kind)) continue;
            seen[next] = true;
            via[next] = li;
            from[next] = cur;
            frontier.push_back(next);
        }
    }
    if (!seen[dst])
        throw NoPathError("no admissible path between " + std::to_string(src) + " and " +
                          std::to_string(dst));

    PathResult result;
    for (NodeId cur = dst; cur != src; cur = from[cur]) {
        result.linkIdx.push_back(via[cur]);
        result.nodes.push_back(cur);
    }
    result.nodes.push_back(src);
    std::reverse(result.linkIdx.begin(), result.linkIdx.end());
    std::reverse(result.nodes.begin(), result.nodes.end());

    for (std::size_t li : result.linkIdx) {
        const Link& link = links_[li];
        result.latencyS += link.latencyS;
        result.perByteS += 1.0 / link.bandwidthBps;
        if (link.kind == LinkKind::Wan) result.usesWan = true;
    }
    for (std::size_t i = 1; i + 1 < result.nodes.size(); ++i) {
        const Node& n = nodes_[result.nodes[i]];
        if (isSwitch(n.kind)) result.latencyS += switchDelayS_;
        if (n.kind == NodeKind::ExternalBridge) result.viTraversals += 1;
    }
    return result;
}

std::vector<TopologyViolation> MicroDcTopology::validate() const {
    std::vector<TopologyViolation> out;

    std::size_t externalBridges = 0;
    for (const Node& n : nodes_)
        if (n.kind == NodeKind::ExternalBridge) ++externalBridges;
    if (externalBridges != 1)
        out.push_back({"topology", "expected exactly one external bridge, found " +
                                       std::to_string(externalBridges)});

    for (const ComputeHost& h : hosts_) {
        if (nodes_.at(h.integrationBridge).kind != NodeKind::IntegrationBridge)
            out.push_back({"host " + std::to_string(h.id), "integration bridge node has wrong kind"});
        if (nodes_.at(h.vlanBridge).kind != NodeKind::VlanBridge)
            out.push_back({"host " + std::to_string(h.id), "vlan bridge node has wrong kind"});
    }

    // wan links touch only the external bridge and the user/origin side
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const Link& l = links_[i];
        if (l.kind != LinkKind::Wan) continue;
        auto wanSide = [&](NodeId n) {
            NodeKind k = nodes_[n].kind;
            return k == NodeKind::Origin || k == NodeKind::User || k == NodeKind::Edge;
        };
        bool ok = (nodes_[l.a].kind == NodeKind::ExternalBridge && wanSide(l.b)) ||
                  (nodes_[l.b].kind == NodeKind::ExternalBridge && wanSide(l.a));
        if (!ok)
            out.push_back({"link " + std::to_string(i),
                           "wan links must connect the external bridge to the origin/user side"});
    }

    // intra-host links carry the smallest latencies
    double maxIntra = 0.0, minOther = std::numeric_limits<double>::infinity();
    bool haveIntra = false, haveOther = false;
    for (const Link& l : links_) {
        if (l.kind == LinkKind::IntraHost) {
            maxIntra = std::max(maxIntra, l.latencyS);
            haveIntra = true;
        } else {
            minOther = std::min(minOther, l.latencyS);
            haveOther = true;
        }
    }
    if (haveIntra && haveOther && maxIntra > minOther)
        out.push_back({"topology", "intra-host links must have the smallest latency"});

    // the non-shortcut link set forms a connected tree over physical nodes
    std::size_t physicalNodes = 0;
    for (const Node& n : nodes_)
        if (n.kind != NodeKind::SharedNetwork) ++physicalNodes;
    std::size_t treeLinks = 0;
    for (const Link& l : links_)
        if (!(nodes_[l.a].kind == NodeKind::VlanBridge && nodes_[l.b].kind == NodeKind::VlanBridge))
            ++treeLinks;
    if (physicalNodes > 0 && treeLinks != physicalNodes - 1)
        out.push_back({"topology", "links minus br-vlan shortcuts must form a tree"});

    std::vector<bool> seen(nodes_.size(), false);
    std::size_t reached = 0;
    for (NodeId start = 0; start < nodes_.size(); ++start) {
        if (nodes_[start].kind == NodeKind::SharedNetwork) continue;
        std::deque<NodeId> frontier{start};
        seen[start] = true;
        while (!frontier.empty()) {
            NodeId cur = frontier.front();
            frontier.pop_front();
            ++reached;
            for (std::size_t li : adjacency_[cur]) {
                NodeId next = links_[li].a == cur ? links_[li].b : links_[li].a;
                if (!seen[next]) {
                    seen[next] = true;
                    frontier.push_back(next);
                }
            }
        }
        break;
    }
    if (reached != physicalNodes) out.push_back({"topology", "graph is not connected"});

    return out;
}

}  // namespace vcsim

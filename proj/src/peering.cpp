#include "vcachesim/peering.hpp"

#include <algorithm>

namespace vcsim {

bool aclCheck(const AccessRuleSet& rules, CacheId sender, PeerPort port, std::uint64_t token) {
    if (rules.allowedSources.count(sender) == 0) return false;
    if (rules.allowedPorts.count(port) == 0) return false;
    auto it = rules.expectedToken.find(sender);
    return it != rules.expectedToken.end() && it->second == token;
}

std::optional<double> symmetryRatio(const PeeringAccounting& acct) {
    if (acct.bytesFetchedFromPeer == 0) return std::nullopt;
    return static_cast<double>(acct.bytesServedToPeer) /
           static_cast<double>(acct.bytesFetchedFromPeer);
}

std::optional<IcpKind> PeeringLink::rememberedReply(CacheId sender,
                                                    std::uint64_t requestId) const {
    auto it = seenQueries_.find({sender, requestId});
    if (it == seenQueries_.end()) return std::nullopt;
    return it->second;
}

void PeeringLink::rememberReply(CacheId sender, std::uint64_t requestId, IcpKind kind) {
    seenQueries_[{sender, requestId}] = kind;
}

std::size_t PeeringManager::establish(const MicroDcTopology& topo, CacheId a, CacheId b,
                                      NodeId network, const PeeringLinkConfig& cfg,
                                      std::uint64_t seed) {
    if (!topo.hasCache(a) || !topo.hasCache(b))
        throw SimError("peering endpoint cache does not exist");
    TenantId ta = topo.cacheTenant(a);
    TenantId tb = topo.cacheTenant(b);
    if (a == b || ta == tb)
        throw SameTenantError("peering is inter-VNO; both caches belong to tenant " +
                              std::to_string(ta));

    const SharedNetwork& net = topo.sharedNetwork(network);
    for (auto [cache, tenant] : {std::pair{a, ta}, std::pair{b, tb}}) {
        if (tenant != net.owner && net.granted.count(tenant) == 0)
            throw NotGrantedError("tenant " + std::to_string(tenant) +
                                  " was not granted access to network " + std::to_string(network));
        if (net.attached.count(cache) == 0)
            throw NotGrantedError("cache " + std::to_string(cache) +
                                  " is not attached to network " + std::to_string(network));
    }

    std::uint64_t tokenAtoB = mix64(mix64(seed ^ (std::uint64_t(a) << 32 | b)) ^ network);
    std::uint64_t tokenBtoA = mix64(mix64(seed ^ (std::uint64_t(b) << 32 | a)) ^ network ^ 1);
    links_.emplace_back(a, b, network, cfg, tokenAtoB, tokenBtoA);
    links_.back().setState(LinkState::Active);
    rebuildRules();
    return links_.size() - 1;
}

void PeeringManager::revoke(std::size_t linkIdx) {
    links_.at(linkIdx).setState(LinkState::Revoked);
    rebuildRules();
}

void PeeringManager::rebuildRules() {
    rules_.clear();
    for (const PeeringLink& link : links_) {
        if (link.state() != LinkState::Active) continue;
        for (CacheId self : {link.cacheA(), link.cacheB()}) {
            CacheId peer = link.peerOf(self);
            AccessRuleSet& rs = rules_[self];
            rs.allowedSources.insert(peer);
            rs.allowedPorts = {PeerPort::Icp, PeerPort::Fetch};
            rs.expectedToken[peer] = link.tokenOf(peer);
        }
    }
}

void PeeringManager::configurePool(CacheId cache, const DelayPoolConfig& cfg) {
    pools_[cache] = DelayPool(cfg);
}

DelayPool& PeeringManager::poolOf(CacheId cache) {
    return pools_[cache];  // default-constructed pool is unlimited
}

const AccessRuleSet& PeeringManager::rulesOf(CacheId cache) const {
    static const AccessRuleSet kEmpty;  // default drop-everything rule set
    auto it = rules_.find(cache);
    return it == rules_.end() ? kEmpty : it->second;
}

IcpMessage PeeringManager::handleIcpQuery(PeeringLink& link, CacheId receiver,
                                          const CacheStore& store, const IcpMessage& query,
                                          bool& wasDuplicate) {
    IcpMessage reply;
    reply.requestId = query.requestId;
    reply.contentId = query.contentId;
    reply.sender = receiver;
    reply.token = link.tokenOf(receiver);

    if (auto remembered = link.rememberedReply(query.sender, query.requestId)) {
        wasDuplicate = true;
        reply.kind = *remembered;
        return reply;
    }
    wasDuplicate = false;

    PeeringAccounting& acct = link.accountingOf(receiver);
    acct.queriesReceived += 1;
    // availability probe: peek, never promote
    bool hit = store.peek(query.contentId);
    reply.kind = hit ? IcpKind::Hit : IcpKind::Miss;
    if (hit)
        acct.hitsReturned += 1;
    else
        acct.missesReturned += 1;
    link.rememberReply(query.sender, query.requestId, reply.kind);
    return reply;
}

void PeeringManager::recordTransfer(PeeringLink& link, CacheId servingCache,
                                    std::uint64_t bytes) {
    link.accountingOf(servingCache).bytesServedToPeer += bytes;
    link.accountingOf(link.peerOf(servingCache)).bytesFetchedFromPeer += bytes;
}

std::vector<std::size_t> PeeringManager::linksOf(CacheId cache) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < links_.size(); ++i)
        if (links_[i].state() == LinkState::Active && links_[i].involves(cache)) out.push_back(i);
    return out;
}

}  // namespace vcsim

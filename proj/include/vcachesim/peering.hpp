#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "vcachesim/cache.hpp"
#include "vcachesim/cache_digest.hpp"
#include "vcachesim/delay_pool.hpp"
#include "vcachesim/topology.hpp"

namespace vcsim {

// ICP-style sibling protocol: a query is answered with a hit or a miss
// (failure) message carrying the query's request id.
enum class IcpKind { Query, Hit, Miss };

struct IcpMessage {
    IcpKind kind = IcpKind::Query;
    std::uint64_t requestId = 0;
    ContentId contentId;
    CacheId sender = 0;
    std::uint64_t token = 0;
};

enum class PeerPort { Icp, Fetch };

// Per-cache ingress filter, the iptables analogue: peering traffic is only
// accepted from known peer caches, on the two peering ports, with the
// expected per-direction credential. Everything else is dropped.
struct AccessRuleSet {
    std::set<CacheId> allowedSources;
    std::set<PeerPort> allowedPorts;
    std::map<CacheId, std::uint64_t> expectedToken;
};

// Pure check; drop is a result, not an error.
bool aclCheck(const AccessRuleSet& rules, CacheId sender, PeerPort port, std::uint64_t token);

struct PeeringAccounting {
    std::uint64_t bytesServedToPeer = 0;
    std::uint64_t bytesFetchedFromPeer = 0;
    std::uint64_t queriesSent = 0;
    std::uint64_t queriesReceived = 0;
    std::uint64_t hitsReturned = 0;
    std::uint64_t missesReturned = 0;
};

// served / fetched; nullopt ("undefined") when nothing was fetched.
std::optional<double> symmetryRatio(const PeeringAccounting& acct);

enum class LinkState { Proposed, Active, Revoked };

struct PeeringLinkConfig {
    bool readThrough = true;   // insert peer-served objects locally
    bool alwaysIcp = false;    // query even on digest miss
    bool shapeIcp = false;     // ICP messages pass the delay pool too
    std::optional<double> icpTimeoutS;  // default: 4x shared-network RTT
};

// One sibling relationship between two caches over a shared network.
class PeeringLink {
public:
    PeeringLink(CacheId a, CacheId b, NodeId network, PeeringLinkConfig cfg,
                std::uint64_t tokenAtoB, std::uint64_t tokenBtoA)
        : cacheA_(a), cacheB_(b), network_(network), cfg_(cfg), tokenAtoB_(tokenAtoB),
          tokenBtoA_(tokenBtoA) {}

    CacheId cacheA() const { return cacheA_; }
    CacheId cacheB() const { return cacheB_; }
    NodeId network() const { return network_; }
    LinkState state() const { return state_; }
    void setState(LinkState s) { state_ = s; }
    const PeeringLinkConfig& config() const { return cfg_; }

    bool involves(CacheId c) const { return c == cacheA_ || c == cacheB_; }
    CacheId peerOf(CacheId self) const { return self == cacheA_ ? cacheB_ : cacheA_; }

    // Credential `sender` presents on messages over this link.
    std::uint64_t tokenOf(CacheId sender) const {
        return sender == cacheA_ ? tokenAtoB_ : tokenBtoA_;
    }

    PeeringAccounting& accountingOf(CacheId self) {
        return self == cacheA_ ? acctA_ : acctB_;
    }
    const PeeringAccounting& accountingOf(CacheId self) const {
        return self == cacheA_ ? acctA_ : acctB_;
    }

    // The copy of the peer's digest held at `self` (pushed on rebuilds).
    std::optional<CacheDigest>& peerDigestAt(CacheId self) {
        return self == cacheA_ ? digestAtA_ : digestAtB_;
    }

    std::optional<IcpKind> rememberedReply(CacheId sender, std::uint64_t requestId) const;
    void rememberReply(CacheId sender, std::uint64_t requestId, IcpKind kind);

private:
    CacheId cacheA_;
    CacheId cacheB_;
    NodeId network_;
    PeeringLinkConfig cfg_;
    std::uint64_t tokenAtoB_;
    std::uint64_t tokenBtoA_;
    LinkState state_ = LinkState::Proposed;
    PeeringAccounting acctA_;
    PeeringAccounting acctB_;
    std::optional<CacheDigest> digestAtA_;  // digest of B held at A
    std::optional<CacheDigest> digestAtB_;  // digest of A held at B
    std::map<std::pair<CacheId, std::uint64_t>, IcpKind> seenQueries_;
};

// Owns all peering links, per-cache ACLs and delay pools. Driven by the
// simulation event loop; deterministic given call order.
class PeeringManager {
public:
    // Verifies the RBAC preconditions on `network` and activates the link.
    // Throws SameTenantError for intra-VNO pairs, NotGrantedError when grant
    // or attachment is missing.
    std::size_t establish(const MicroDcTopology& topo, CacheId a, CacheId b, NodeId network,
                          const PeeringLinkConfig& cfg, std::uint64_t seed);

    void revoke(std::size_t linkIdx);

    void configurePool(CacheId cache, const DelayPoolConfig& cfg);
    DelayPool& poolOf(CacheId cache);

    const AccessRuleSet& rulesOf(CacheId cache) const;

    // Handles one authenticated ICP query at the receiving cache. Duplicate
    // (sender, requestId) pairs are answered idempotently and counted once.
    IcpMessage handleIcpQuery(PeeringLink& link, CacheId receiver, const CacheStore& store,
                              const IcpMessage& query, bool& wasDuplicate);

    // Single mutation point for transfer byte counters, so the two sides
    // advance in lockstep.
    void recordTransfer(PeeringLink& link, CacheId servingCache, std::uint64_t bytes);

    std::vector<std::size_t> linksOf(CacheId cache) const;  // creation order
    PeeringLink& link(std::size_t idx) { return links_.at(idx); }
    const PeeringLink& link(std::size_t idx) const { return links_.at(idx); }
    std::size_t linkCount() const { return links_.size(); }

private:
    void rebuildRules();

    std::vector<PeeringLink> links_;
    std::map<CacheId, AccessRuleSet> rules_;
    std::map<CacheId, DelayPool> pools_;
};

}  // namespace vcsim

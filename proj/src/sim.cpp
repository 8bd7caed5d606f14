#include "vcachesim/sim.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "json.hpp"
#include "vcachesim/cache_digest.hpp"
#include "vcachesim/errors.hpp"
#include "vcachesim/rng.hpp"

namespace vcsim {

namespace {

constexpr std::uint64_t kNoRequest = std::numeric_limits<std::uint64_t>::max();
constexpr std::size_t kNoLink = std::numeric_limits<std::size_t>::max();
constexpr std::uint64_t kForgedToken = 0;
// fixed delivery delay for injected attack traffic; it only has to reach the
// target's ACL, its timing carries no metric weight
constexpr double kAttackDeliveryS = 0.0005;

enum class EventKind {
    RequestArrival,
    IcpDelivery,
    TransferCompletion,
    DigestRebuild,
    RuleDerivation,
    PoolAdmission,
};

// subtypes per kind
enum : std::uint8_t {
    kIssue = 0,
    kAtCache = 1,
    kAttackQuery = 2,
    kAttackFetch = 3,

    kQueryArrive = 0,
    kReplyArrive = 1,
    kIcpTimeout = 2,

    kPeerTransfer = 0,
    kOriginResponse = 1,
    kPeerFetchFailed = 2,

    kFetchArrive = 0,
    kFetchGranted = 1,
};

struct Event {
    SimTime time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::RequestArrival;
    std::uint8_t sub = 0;
    std::uint32_t tenantIdx = 0;
    std::uint64_t reqIdx = kNoRequest;
    std::uint64_t epoch = 0;
    std::size_t linkIdx = kNoLink;
    CacheId sender = 0;
    std::uint64_t token = 0;
    ContentId cid;
    std::uint64_t icpReqId = 0;
    IcpKind replyKind = IcpKind::Miss;
    std::uint64_t bytes = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

struct Pending {
    std::uint32_t tenantIdx = 0;
    ContentId id;
    std::uint64_t bytes = 0;
    bool cacheable = true;
    SimTime issuedAt = 0.0;
    int vi = 0;
    std::size_t linkCursor = 0;
    std::uint64_t epoch = 0;
    bool lastDigestSaidHit = false;
    bool done = false;
};

struct TenantRt {
    const TenantSpec* spec = nullptr;
    TenantId tenantId = 0;
    CacheId cacheId = 0;
    NodeId cacheNode = 0;
    NodeId userNode = 0;
    VlanId vlan = 0;
    double procS = 0.0;
    CacheStore store{0};
    AccessLog log;
    RuleTable rules;
    TenantWorkload workload;
    std::uint64_t digestGeneration = 0;
    PathResult pUserCache;
    PathResult pCacheOrigin;
    PathResult pUserOrigin;
    std::vector<std::size_t> peerLinks;  // PeeringManager indices, creation order
    TenantMetrics metrics;
};

struct LinkRt {
    PathResult pShared;
    double icpTimeoutS = 0.0;
};

class Simulation {
public:
    explicit Simulation(const ScenarioConfig& cfg) : cfg_(cfg) {}

    SimResult run();

private:
    void setup();
    void schedule(Event ev);
    std::uint64_t newRequest(std::uint32_t tenantIdx, const TenantWorkload::Draw& draw,
                             SimTime issuedAt);
    TenantRt& tenantOfCache(CacheId cache) { return tenants_.at(cache); }

    void onIssue(const Event& ev);
    void onAtCache(const Event& ev);
    void tryPeersOrOrigin(std::uint64_t reqIdx, SimTime now);
    void sendIcpQuery(std::uint64_t reqIdx, std::size_t linkIdx, SimTime now, bool digestHit);
    void sendFetch(std::uint64_t reqIdx, std::size_t linkIdx, SimTime now);
    void goOrigin(std::uint64_t reqIdx, SimTime now);
    void onIcpQueryArrive(const Event& ev);
    void onIcpReply(const Event& ev);
    void onIcpTimeout(const Event& ev);
    void onFetchArrive(const Event& ev);
    void onFetchGranted(const Event& ev);
    void onPeerTransfer(const Event& ev);
    void onPeerFetchFailed(const Event& ev);
    void onOriginResponse(const Event& ev);
    void onDigestRebuild(const Event& ev);
    void onRuleDerivation(const Event& ev);
    void onAttackIssue(const Event& ev);
    void complete(std::uint64_t reqIdx, ServedBy servedBy, SimTime at);
    void traceIcp(SimTime t, IcpKind kind, std::uint64_t rid, CacheId sender, ObjectKey key,
                  const char* verdict);

    ScenarioConfig cfg_;
    MicroDcTopology topo_;
    std::vector<TenantRt> tenants_;
    PeeringManager peering_;
    std::vector<LinkRt> linkRt_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t eventSeq_ = 0;
    std::uint64_t icpIdCounter_ = 0;
    std::uint64_t digestSeed_ = 0;
    Rng attackRng_;
    int attackerIdx_ = -1;
    int attackTargetIdx_ = -1;
    std::vector<Pending> pending_;
    std::vector<RequestRecord> records_;
    std::vector<IcpTraceRow> icpTrace_;
};

void Simulation::schedule(Event ev) {
    ev.seq = eventSeq_++;
    queue_.push(std::move(ev));
}

std::uint64_t Simulation::newRequest(std::uint32_t tenantIdx, const TenantWorkload::Draw& draw,
                                     SimTime issuedAt) {
    Pending p;
    p.tenantIdx = tenantIdx;
    p.id = draw.id;
    p.bytes = draw.bytes;
    p.cacheable = draw.cacheable;
    p.issuedAt = issuedAt;
    pending_.push_back(p);

    RequestRecord rec;
    rec.seq = records_.size();
    rec.tenantIdx = tenantIdx;
    rec.contentId = draw.id;
    rec.issuedAt = issuedAt;
    records_.push_back(rec);
    return pending_.size() - 1;
}

void Simulation::setup() {
    {
        auto violations = validateConfig(cfg_);
        for (const ConfigViolation& v : violations)
            if (!v.warning) throw ConfigError(v.path, v.message);
    }
    BuiltTopology built = buildTopology(cfg_);
    topo_ = std::move(built.topo);

    digestSeed_ = deriveSeed(cfg_.seed, 0x4000);
    attackRng_ = Rng(deriveSeed(cfg_.seed, 0x3000));

    for (std::size_t i = 0; i < cfg_.tenants.size(); ++i) {
        const TenantSpec& spec = cfg_.tenants[i];
        TenantRt rt;
        rt.spec = &cfg_.tenants[i];
        rt.tenantId = static_cast<TenantId>(i);
        rt.cacheId = built.cacheIds[i];
        rt.cacheNode = built.cacheNodes[i];
        rt.userNode = built.userNodes[i];
        rt.vlan = built.vlans[i];
        rt.procS = msToS(spec.cache.processingDelayMs);
        rt.store = CacheStore(spec.cache.capacityBytes);
        rt.rules = RuleTable(rt.tenantId);
        for (const StaticRuleSpec& sr : spec.interception.staticRules)
            rt.rules.addRule(FlowRule{tenantDestinationId(i, sr.destinationIndex), sr.action,
                                      sr.priority});
        rt.workload = TenantWorkload(
            buildCatalog(cfg_, i), spec.workload.zipfAlpha, spec.workload.rateRps,
            spec.workload.personalizedFraction,
            deriveSeed(cfg_.seed, 0x1000 + static_cast<std::uint64_t>(i)),
            deriveSeed(cfg_.seed, 0x2000 + static_cast<std::uint64_t>(i)));
        FlowScope scope = FlowScope::vlan(rt.vlan);
        rt.pUserCache = topo_.computePath(rt.userNode, rt.cacheNode, scope);
        rt.pCacheOrigin = topo_.computePath(rt.cacheNode, built.origin, scope);
        rt.pUserOrigin = topo_.computePath(rt.userNode, built.origin, scope);
        tenants_.push_back(std::move(rt));
    }

    // Peering substrate: the owner creates the shared network, grants the
    // peer tenant, both caches attach, then the link comes up.
    for (const PeeringLinkSpec& spec : cfg_.peeringLinks) {
        int ia = -1, ib = -1, iowner = -1;
        for (std::size_t i = 0; i < tenants_.size(); ++i) {
            if (cfg_.tenants[i].name == spec.a) ia = static_cast<int>(i);
            if (cfg_.tenants[i].name == spec.b) ib = static_cast<int>(i);
            if (cfg_.tenants[i].name == spec.owner) iowner = static_cast<int>(i);
        }
        TenantRt& ra = tenants_.at(ia);
        TenantRt& rb = tenants_.at(ib);
        TenantRt& rown = tenants_.at(iowner);
        TenantRt& rguest = iowner == ia ? rb : ra;

        NodeId net = topo_.createSharedNetwork(rown.tenantId);
        topo_.grantNetworkAccess(net, rown.tenantId, rguest.tenantId);
        topo_.attachCache(net, rown.cacheId);
        topo_.attachCache(net, rguest.cacheId);

        PeeringLinkConfig lc;
        lc.readThrough = spec.readThrough;
        lc.alwaysIcp = spec.alwaysIcp;
        lc.shapeIcp = spec.shapeIcp;
        lc.icpTimeoutS = spec.icpTimeoutS;
        std::size_t idx = peering_.establish(topo_, ra.cacheId, rb.cacheId, net, lc, cfg_.seed);
        ra.peerLinks.push_back(idx);
        rb.peerLinks.push_back(idx);
        if (spec.delayPool) {
            peering_.configurePool(ra.cacheId, *spec.delayPool);
            peering_.configurePool(rb.cacheId, *spec.delayPool);
        }

        LinkRt lrt;
        lrt.pShared =
            topo_.computePath(ra.cacheNode, rb.cacheNode, FlowScope::sharedNetwork(net));
        lrt.icpTimeoutS = spec.icpTimeoutS.value_or(4.0 * 2.0 * lrt.pShared.latencyS);
        linkRt_.push_back(lrt);
    }

    // Warm caches before anything is scheduled: most popular ends up MRU.
    for (TenantRt& rt : tenants_) {
        const PrefillSpec& pf = rt.spec->cache.prefill;
        if (pf.fraction <= 0.0) continue;
        double target = pf.fraction * static_cast<double>(rt.store.capacityBytes());
        std::uint64_t used = 0;
        std::vector<const CatalogObject*> chosen;
        const auto& catalog = rt.workload.catalog();
        for (std::size_t r = pf.offsetObjects; r < catalog.size(); ++r) {
            const CatalogObject& obj = catalog[r];
            if (obj.personalizedDestination) continue;
            if (static_cast<double>(used + obj.bytes) > target) break;
            chosen.push_back(&obj);
            used += obj.bytes;
        }
        for (auto it = chosen.rbegin(); it != chosen.rend(); ++it)
            rt.store.insert(ContentObject{(*it)->id, (*it)->bytes, true}, 0.0);
    }

    // Initial events. Digest pushes fire at t=0 so peers start with a fresh
    // view of warmed contents.
    for (std::size_t i = 0; i < tenants_.size(); ++i) {
        TenantRt& rt = tenants_[i];
        if (!rt.peerLinks.empty() && cfg_.durationS > 0.0) {
            Event ev;
            ev.time = 0.0;
            ev.kind = EventKind::DigestRebuild;
            ev.tenantIdx = static_cast<std::uint32_t>(i);
            schedule(ev);
        }
        if (rt.spec->interception.enabled &&
            rt.spec->interception.derivePeriodS < cfg_.durationS) {
            Event ev;
            ev.time = rt.spec->interception.derivePeriodS;
            ev.kind = EventKind::RuleDerivation;
            ev.tenantIdx = static_cast<std::uint32_t>(i);
            schedule(ev);
        }
        if (rt.workload.active()) {
            SimTime first = rt.workload.nextArrivalGap();
            if (first < cfg_.durationS) {
                Event ev;
                ev.time = first;
                ev.kind = EventKind::RequestArrival;
                ev.sub = kIssue;
                ev.tenantIdx = static_cast<std::uint32_t>(i);
                schedule(ev);
            }
        }
    }

    if (cfg_.attack) {
        for (std::size_t i = 0; i < tenants_.size(); ++i) {
            if (cfg_.tenants[i].name == cfg_.attack->tenant) attackerIdx_ = static_cast<int>(i);
            if (cfg_.tenants[i].name == cfg_.attack->target) attackTargetIdx_ = static_cast<int>(i);
        }
        for (std::uint8_t sub : {kAttackQuery, kAttackFetch}) {
            double rate =
                sub == kAttackQuery ? cfg_.attack->queryRateRps : cfg_.attack->fetchRateRps;
            if (rate <= 0.0) continue;
            SimTime first = attackRng_.exponential(rate);
            if (first >= cfg_.durationS) continue;
            Event ev;
            ev.time = first;
            ev.kind = EventKind::RequestArrival;
            ev.sub = sub;
            ev.tenantIdx = static_cast<std::uint32_t>(attackerIdx_);
            schedule(ev);
        }
    }
}

void Simulation::traceIcp(SimTime t, IcpKind kind, std::uint64_t rid, CacheId sender,
                          ObjectKey key, const char* verdict) {
    if (!cfg_.emitIcpTrace) return;
    icpTrace_.push_back(IcpTraceRow{t, kind, rid, sender, key, verdict});
}

void Simulation::complete(std::uint64_t reqIdx, ServedBy servedBy, SimTime at) {
    Pending& req = pending_[reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    RequestRecord& rec = records_[reqIdx];
    rec.completedAt = at;
    rec.servedBy = servedBy;
    rec.viTraversals = req.vi;
    switch (servedBy) {
        case ServedBy::Local:
            rt.metrics.localHits += 1;
            break;
        case ServedBy::Peer:
            rt.metrics.peerHits += 1;
            break;
        case ServedBy::Origin:
            rt.metrics.originServed += 1;
            break;
        case ServedBy::OriginBypassed:
            rt.metrics.bypassed += 1;
            break;
    }
    rt.metrics.latenciesMs.push_back(rec.latencyMs());
    rt.metrics.viSum += static_cast<std::uint64_t>(req.vi);
    req.done = true;
}

void Simulation::onIssue(const Event& ev) {
    TenantRt& rt = tenants_[ev.tenantIdx];
    SimTime next = ev.time + rt.workload.nextArrivalGap();
    if (next < cfg_.durationS) {
        Event nextEv = ev;
        nextEv.time = next;
        schedule(nextEv);
    }

    TenantWorkload::Draw draw = rt.workload.sample();
    std::uint64_t reqIdx = newRequest(ev.tenantIdx, draw, ev.time);
    Pending& req = pending_[reqIdx];
    rt.metrics.requests += 1;
    rt.metrics.ruleLookups += 1;

    if (rt.rules.match(draw.id.destination) == FlowAction::Bypass) {
        // straight to the origin, no cache detour and no cache log record
        const PathResult& p = rt.pUserOrigin;
        SimTime done =
            ev.time + p.latencyFor(cfg_.messages.requestBytes) + p.latencyFor(draw.bytes);
        req.vi += 2 * p.viTraversals;
        rt.metrics.wanBytes += draw.bytes + cfg_.messages.requestBytes;
        complete(reqIdx, ServedBy::OriginBypassed, done);
        return;
    }

    Event at;
    at.time = ev.time + rt.pUserCache.latencyFor(cfg_.messages.requestBytes);
    at.kind = EventKind::RequestArrival;
    at.sub = kAtCache;
    at.tenantIdx = ev.tenantIdx;
    at.reqIdx = reqIdx;
    req.vi += rt.pUserCache.viTraversals;
    schedule(at);
}

void Simulation::onAtCache(const Event& ev) {
    Pending& req = pending_[ev.reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    if (rt.store.lookup(req.id, ev.time)) {
        rt.log.append({ev.time, req.id, AccessOutcome::Hit, req.cacheable});
        SimTime done = ev.time + rt.procS + rt.pUserCache.latencyFor(req.bytes);
        req.vi += rt.pUserCache.viTraversals;
        complete(ev.reqIdx, ServedBy::Local, done);
        return;
    }
    if (rt.spec->workload.abusePeering && !rt.peerLinks.empty()) {
        // misbehaving peer: skip availability checks and offload the miss
        sendFetch(ev.reqIdx, rt.peerLinks.front(), ev.time);
        return;
    }
    req.linkCursor = 0;
    tryPeersOrOrigin(ev.reqIdx, ev.time);
}

void Simulation::tryPeersOrOrigin(std::uint64_t reqIdx, SimTime now) {
    Pending& req = pending_[reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    while (req.linkCursor < rt.peerLinks.size()) {
        std::size_t linkIdx = rt.peerLinks[req.linkCursor];
        PeeringLink& link = peering_.link(linkIdx);
        if (link.state() != LinkState::Active) {
            req.linkCursor += 1;
            continue;
        }
        const auto& slot = link.peerDigestAt(rt.cacheId);
        bool digestHit = slot.has_value() && slot->contains(req.id);
        if (digestHit || link.config().alwaysIcp) {
            sendIcpQuery(reqIdx, linkIdx, now, digestHit);
            return;
        }
        req.linkCursor += 1;
    }
    goOrigin(reqIdx, now);
}

void Simulation::sendIcpQuery(std::uint64_t reqIdx, std::size_t linkIdx, SimTime now,
                              bool digestHit) {
    Pending& req = pending_[reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    PeeringLink& link = peering_.link(linkIdx);
    const LinkRt& lrt = linkRt_[linkIdx];

    req.epoch += 1;
    req.lastDigestSaidHit = digestHit;
    std::uint64_t rid = ++icpIdCounter_;
    link.accountingOf(rt.cacheId).queriesSent += 1;

    Event q;
    q.time = now + rt.procS + lrt.pShared.latencyFor(cfg_.messages.icpBytes);
    q.kind = EventKind::IcpDelivery;
    q.sub = kQueryArrive;
    q.reqIdx = reqIdx;
    q.epoch = req.epoch;
    q.linkIdx = linkIdx;
    q.sender = rt.cacheId;
    q.token = link.tokenOf(rt.cacheId);
    q.cid = req.id;
    q.icpReqId = rid;
    schedule(q);

    Event to;
    to.time = now + lrt.icpTimeoutS;
    to.kind = EventKind::IcpDelivery;
    to.sub = kIcpTimeout;
    to.reqIdx = reqIdx;
    to.epoch = req.epoch;
    to.linkIdx = linkIdx;
    to.icpReqId = rid;
    schedule(to);
}

void Simulation::onIcpQueryArrive(const Event& ev) {
    CacheId receiver;
    if (ev.linkIdx == kNoLink) {
        receiver = tenants_.at(attackTargetIdx_).cacheId;
    } else {
        receiver = peering_.link(ev.linkIdx).peerOf(ev.sender);
    }
    TenantRt& rtR = tenantOfCache(receiver);

    bool allow = aclCheck(peering_.rulesOf(receiver), ev.sender, PeerPort::Icp, ev.token);
    traceIcp(ev.time, IcpKind::Query, ev.icpReqId, ev.sender, ev.cid.objectKey,
             allow ? "allow" : "drop");
    if (!allow) {
        rtR.metrics.aclDroppedQueries += 1;
        return;  // silent drop; a legitimate requester would hit its timeout
    }
    if (ev.reqIdx == kNoRequest) {
        // an injected query got past the ACL; count it, never answer it
        rtR.metrics.attackQueriesAnswered += 1;
        return;
    }

    PeeringLink& link = peering_.link(ev.linkIdx);
    const LinkRt& lrt = linkRt_[ev.linkIdx];
    IcpMessage query{IcpKind::Query, ev.icpReqId, ev.cid, ev.sender, ev.token};
    bool duplicate = false;
    IcpMessage reply = peering_.handleIcpQuery(link, receiver, rtR.store, query, duplicate);

    SimTime departAt = ev.time + rtR.procS;
    if (link.config().shapeIcp)
        departAt = peering_.poolOf(receiver).admit(ev.sender, cfg_.messages.icpBytes, departAt);

    Event re;
    re.time = departAt + lrt.pShared.latencyFor(cfg_.messages.icpBytes);
    re.kind = EventKind::IcpDelivery;
    re.sub = kReplyArrive;
    re.reqIdx = ev.reqIdx;
    re.epoch = ev.epoch;
    re.linkIdx = ev.linkIdx;
    re.sender = receiver;
    re.cid = ev.cid;
    re.icpReqId = ev.icpReqId;
    re.replyKind = reply.kind;
    schedule(re);
}

void Simulation::onIcpReply(const Event& ev) {
    Pending& req = pending_[ev.reqIdx];
    if (req.done || ev.epoch != req.epoch) {
        traceIcp(ev.time, ev.replyKind, ev.icpReqId, ev.sender, ev.cid.objectKey, "stale");
        return;
    }
    TenantRt& rt = tenants_[req.tenantIdx];
    traceIcp(ev.time, ev.replyKind, ev.icpReqId, ev.sender, ev.cid.objectKey, "accept");
    req.epoch += 1;  // consume the wait; the pending timeout becomes stale
    if (ev.replyKind == IcpKind::Hit) {
        sendFetch(ev.reqIdx, ev.linkIdx, ev.time);
        return;
    }
    if (req.lastDigestSaidHit) rt.metrics.digestFalsePositives += 1;
    req.linkCursor += 1;
    tryPeersOrOrigin(ev.reqIdx, ev.time);
}

void Simulation::onIcpTimeout(const Event& ev) {
    Pending& req = pending_[ev.reqIdx];
    if (req.done || ev.epoch != req.epoch) return;  // answered in time
    TenantRt& rt = tenants_[req.tenantIdx];
    rt.metrics.icpTimeouts += 1;
    traceIcp(ev.time, IcpKind::Query, ev.icpReqId, rt.cacheId, req.id.objectKey, "timeout");
    req.epoch += 1;
    req.linkCursor += 1;
    tryPeersOrOrigin(ev.reqIdx, ev.time);
}

void Simulation::sendFetch(std::uint64_t reqIdx, std::size_t linkIdx, SimTime now) {
    Pending& req = pending_[reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    PeeringLink& link = peering_.link(linkIdx);
    const LinkRt& lrt = linkRt_[linkIdx];
    req.epoch += 1;

    Event fe;
    fe.time = now + lrt.pShared.latencyFor(cfg_.messages.requestBytes);
    fe.kind = EventKind::PoolAdmission;
    fe.sub = kFetchArrive;
    fe.reqIdx = reqIdx;
    fe.epoch = req.epoch;
    fe.linkIdx = linkIdx;
    fe.sender = rt.cacheId;
    fe.token = link.tokenOf(rt.cacheId);
    fe.cid = req.id;
    fe.bytes = req.bytes;
    schedule(fe);
}

void Simulation::onFetchArrive(const Event& ev) {
    CacheId serving;
    if (ev.linkIdx == kNoLink) {
        serving = tenants_.at(attackTargetIdx_).cacheId;
    } else {
        serving = peering_.link(ev.linkIdx).peerOf(ev.sender);
    }
    TenantRt& rtS = tenantOfCache(serving);

    bool allow = aclCheck(peering_.rulesOf(serving), ev.sender, PeerPort::Fetch, ev.token);
    if (!allow) {
        rtS.metrics.aclDroppedFetches += 1;
        if (ev.reqIdx != kNoRequest) {
            // cannot happen over an active link; resolve via origin fallback
            Event fail;
            fail.time = ev.time;
            fail.kind = EventKind::TransferCompletion;
            fail.sub = kPeerFetchFailed;
            fail.reqIdx = ev.reqIdx;
            fail.epoch = ev.epoch;
            schedule(fail);
        }
        return;
    }
    if (ev.reqIdx == kNoRequest) {
        rtS.metrics.attackBytesServed += ev.bytes;
        return;
    }

    SimTime admitAt = peering_.poolOf(serving).admit(ev.sender, ev.bytes, ev.time);
    Event gr = ev;
    gr.time = admitAt;
    gr.sub = kFetchGranted;
    schedule(gr);
}

void Simulation::onFetchGranted(const Event& ev) {
    Pending& req = pending_[ev.reqIdx];
    PeeringLink& link = peering_.link(ev.linkIdx);
    CacheId serving = link.peerOf(ev.sender);
    TenantRt& rtS = tenantOfCache(serving);
    const LinkRt& lrt = linkRt_[ev.linkIdx];

    // the ICP hit may have gone stale: eviction between probe and fetch
    if (rtS.store.lookup(req.id, ev.time)) {
        rtS.log.append({ev.time, req.id, AccessOutcome::Hit, true});
        Event tx;
        tx.time = ev.time + rtS.procS + lrt.pShared.latencyFor(ev.bytes);
        tx.kind = EventKind::TransferCompletion;
        tx.sub = kPeerTransfer;
        tx.reqIdx = ev.reqIdx;
        tx.epoch = ev.epoch;
        tx.linkIdx = ev.linkIdx;
        tx.sender = ev.sender;
        tx.bytes = ev.bytes;
        schedule(tx);
        return;
    }
    Event fail;
    fail.time = ev.time + rtS.procS + lrt.pShared.latencyFor(cfg_.messages.icpBytes);
    fail.kind = EventKind::TransferCompletion;
    fail.sub = kPeerFetchFailed;
    fail.reqIdx = ev.reqIdx;
    fail.epoch = ev.epoch;
    schedule(fail);
}

void Simulation::onPeerTransfer(const Event& ev) {
    Pending& req = pending_[ev.reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    PeeringLink& link = peering_.link(ev.linkIdx);
    CacheId serving = link.peerOf(ev.sender);

    peering_.recordTransfer(link, serving, ev.bytes);
    rt.log.append({ev.time, req.id, AccessOutcome::PeerHit, req.cacheable});
    if (link.config().readThrough && req.cacheable && rt.store.wouldFit(req.bytes)) {
        std::size_t evicted =
            rt.store.insert(ContentObject{req.id, req.bytes, true}, ev.time).size();
        rt.metrics.inserted += 1;
        rt.metrics.evicted += evicted;
    }
    SimTime done = ev.time + rt.procS + rt.pUserCache.latencyFor(req.bytes);
    req.vi += rt.pUserCache.viTraversals;
    complete(ev.reqIdx, ServedBy::Peer, done);
}

void Simulation::onPeerFetchFailed(const Event& ev) {
    Pending& req = pending_[ev.reqIdx];
    if (req.done) return;
    TenantRt& rt = tenants_[req.tenantIdx];
    rt.metrics.evictedRaces += 1;
    goOrigin(ev.reqIdx, ev.time);
}

void Simulation::goOrigin(std::uint64_t reqIdx, SimTime now) {
    Pending& req = pending_[reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    rt.log.append({now, req.id, AccessOutcome::LocalMiss, req.cacheable});
    req.epoch += 1;

    const PathResult& p = rt.pCacheOrigin;
    Event resp;
    resp.time = now + rt.procS + p.latencyFor(cfg_.messages.requestBytes) + p.latencyFor(req.bytes);
    resp.kind = EventKind::TransferCompletion;
    resp.sub = kOriginResponse;
    resp.reqIdx = reqIdx;
    resp.epoch = req.epoch;
    req.vi += 2 * p.viTraversals;
    rt.metrics.wanBytes += req.bytes + cfg_.messages.requestBytes;
    schedule(resp);
}

void Simulation::onOriginResponse(const Event& ev) {
    Pending& req = pending_[ev.reqIdx];
    TenantRt& rt = tenants_[req.tenantIdx];
    if (req.cacheable && rt.store.wouldFit(req.bytes)) {
        std::size_t evicted =
            rt.store.insert(ContentObject{req.id, req.bytes, true}, ev.time).size();
        rt.metrics.inserted += 1;
        rt.metrics.evicted += evicted;
    }
    SimTime done = ev.time + rt.procS + rt.pUserCache.latencyFor(req.bytes);
    req.vi += rt.pUserCache.viTraversals;
    complete(ev.reqIdx, ServedBy::Origin, done);
}

void Simulation::onDigestRebuild(const Event& ev) {
    TenantRt& rt = tenants_[ev.tenantIdx];
    const DigestSpec& ds = rt.spec->cache.digest;
    rt.digestGeneration += 1;
    CacheDigest digest =
        buildDigest(rt.store, ds.bits, ds.hashes, digestSeed_, rt.digestGeneration, ev.time);
    for (std::size_t linkIdx : rt.peerLinks) {
        PeeringLink& link = peering_.link(linkIdx);
        if (link.state() != LinkState::Active) continue;
        link.peerDigestAt(link.peerOf(rt.cacheId)) = digest;
    }
    rt.metrics.digestRebuilds += 1;
    SimTime next = ev.time + ds.rebuildPeriodS;
    if (next < cfg_.durationS) {
        Event nx = ev;
        nx.time = next;
        schedule(nx);
    }
}

void Simulation::onRuleDerivation(const Event& ev) {
    TenantRt& rt = tenants_[ev.tenantIdx];
    const InterceptionSpec& is = rt.spec->interception;
    MissPredictorConfig cfg{is.windowS, is.minSamples, is.missThreshold};
    RuleTable derived = deriveRules(rt.log, cfg, ev.time, rt.tenantId);
    // static rules ride above derived ones
    for (const StaticRuleSpec& sr : rt.spec->interception.staticRules)
        derived.addRule(FlowRule{
            tenantDestinationId(ev.tenantIdx, sr.destinationIndex), sr.action, sr.priority});
    rt.rules = std::move(derived);
    rt.metrics.ruleDerivations += 1;
    SimTime next = ev.time + is.derivePeriodS;
    if (next < cfg_.durationS) {
        Event nx = ev;
        nx.time = next;
        schedule(nx);
    }
}

void Simulation::onAttackIssue(const Event& ev) {
    double rate = ev.sub == kAttackQuery ? cfg_.attack->queryRateRps : cfg_.attack->fetchRateRps;
    SimTime next = ev.time + attackRng_.exponential(rate);
    if (next < cfg_.durationS) {
        Event nx = ev;
        nx.time = next;
        schedule(nx);
    }

    TenantRt& attacker = tenants_.at(attackerIdx_);
    TenantRt& target = tenants_.at(attackTargetIdx_);
    const auto& catalog = target.workload.catalog();
    const CatalogObject& obj = catalog[attackRng_.uniformInt(catalog.size())];

    Event msg;
    msg.time = ev.time + kAttackDeliveryS;
    msg.reqIdx = kNoRequest;
    msg.linkIdx = kNoLink;
    msg.sender = attacker.cacheId;
    msg.token = kForgedToken;
    msg.cid = obj.id;
    msg.bytes = obj.bytes;
    if (ev.sub == kAttackQuery) {
        msg.kind = EventKind::IcpDelivery;
        msg.sub = kQueryArrive;
        msg.icpReqId = ++icpIdCounter_;
    } else {
        msg.kind = EventKind::PoolAdmission;
        msg.sub = kFetchArrive;
    }
    schedule(msg);
}

SimResult Simulation::run() {
    setup();

    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        switch (ev.kind) {
            case EventKind::RequestArrival:
                if (ev.sub == kIssue)
                    onIssue(ev);
                else if (ev.sub == kAtCache)
                    onAtCache(ev);
                else
                    onAttackIssue(ev);
                break;
            case EventKind::IcpDelivery:
                if (ev.sub == kQueryArrive)
                    onIcpQueryArrive(ev);
                else if (ev.sub == kReplyArrive)
                    onIcpReply(ev);
                else
                    onIcpTimeout(ev);
                break;
            case EventKind::PoolAdmission:
                if (ev.sub == kFetchArrive)
                    onFetchArrive(ev);
                else
                    onFetchGranted(ev);
                break;
            case EventKind::TransferCompletion:
                if (ev.sub == kPeerTransfer)
                    onPeerTransfer(ev);
                else if (ev.sub == kOriginResponse)
                    onOriginResponse(ev);
                else
                    onPeerFetchFailed(ev);
                break;
            case EventKind::DigestRebuild:
                onDigestRebuild(ev);
                break;
            case EventKind::RuleDerivation:
                onRuleDerivation(ev);
                break;
        }
    }

    for (const Pending& p : pending_)
        if (!p.done) throw SimError("internal: request left unresolved at end of run");

    SimResult result;
    result.report.scenario = cfg_.name;
    result.report.seed = cfg_.seed;
    result.report.durationS = cfg_.durationS;

    for (std::size_t i = 0; i < tenants_.size(); ++i) {
        TenantRt& rt = tenants_[i];
        for (std::size_t linkIdx : rt.peerLinks) {
            const PeeringAccounting& acct = peering_.link(linkIdx).accountingOf(rt.cacheId);
            rt.metrics.peeringBytesFetched += acct.bytesFetchedFromPeer;
            rt.metrics.peeringBytesServed += acct.bytesServedToPeer;
        }
        result.report.tenants.emplace_back(cfg_.tenants[i].name, rt.metrics);
        result.report.global.absorb(rt.metrics);
        result.tenantNames.push_back(cfg_.tenants[i].name);
        result.accessLogs.emplace(cfg_.tenants[i].name, std::move(rt.log));
        result.finalRules.emplace(cfg_.tenants[i].name, rt.rules);
    }
    for (std::size_t l = 0; l < peering_.linkCount(); ++l) {
        const PeeringLink& link = peering_.link(l);
        LinkReport lr;
        lr.a = cfg_.tenants[link.cacheA()].name;
        lr.b = cfg_.tenants[link.cacheB()].name;
        lr.acctA = link.accountingOf(link.cacheA());
        lr.acctB = link.accountingOf(link.cacheB());
        result.report.links.push_back(lr);
    }
    result.trace = std::move(records_);
    result.icpTrace = std::move(icpTrace_);
    return result;
}

}  // namespace

SimResult runScenario(const ScenarioConfig& cfg) { return Simulation(cfg).run(); }

CompareResult runCompare(const ScenarioConfig& cfg) {
    if (cfg.peeringLinks.empty())
        throw NoPeeringDefinedError("scenario defines no peering links to compare");
    CompareResult out;
    out.peeringOn = runScenario(cfg);
    ScenarioConfig off = cfg;
    off.peeringLinks.clear();
    out.peeringOff = runScenario(off);

    const TenantMetrics& on = out.peeringOn.report.global;
    const TenantMetrics& offm = out.peeringOff.report.global;
    out.deltaMeanLatencyMs = on.meanLatencyMs() - offm.meanLatencyMs();
    out.deltaWanBytes =
        static_cast<std::int64_t>(on.wanBytes) - static_cast<std::int64_t>(offm.wanBytes);
    out.deltaViTraversalsMean = on.meanViTraversals() - offm.meanViTraversals();
    out.peeringBytes = on.peeringBytesServed;
    return out;
}

std::string CompareResult::toJsonString() const {
    nlohmann::json root;
    auto summary = [](const TenantMetrics& m) {
        return nlohmann::json{{"requests", m.requests},
                              {"meanLatencyMs", m.meanLatencyMs()},
                              {"wanBytes", m.wanBytes},
                              {"viTraversalsMean", m.meanViTraversals()},
                              {"hitRatioLocal", m.hitRatioLocal()},
                              {"hitRatioPeer", m.hitRatioPeer()}};
    };
    root["peeringOn"] = summary(peeringOn.report.global);
    root["peeringOff"] = summary(peeringOff.report.global);
    root["delta"] = {{"meanLatencyMs", deltaMeanLatencyMs},
                     {"wanBytes", deltaWanBytes},
                     {"viTraversalsMean", deltaViTraversalsMean}};
    root["peeringBytes"] = peeringBytes;
    return root.dump(2) + "\n";
}

}  // namespace vcsim

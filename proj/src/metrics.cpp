#include "vcachesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace vcsim {

using nlohmann::json;

const char* servedByName(ServedBy s) {
    switch (s) {
        case ServedBy::Local:
            return "local";
        case ServedBy::Peer:
            return "peer";
        case ServedBy::Origin:
            return "origin";
        case ServedBy::OriginBypassed:
            return "origin-bypassed";
    }
    return "?";
}

void TenantMetrics::absorb(const TenantMetrics& o) {
    requests += o.requests;
    localHits += o.localHits;
    peerHits += o.peerHits;
    originServed += o.originServed;
    bypassed += o.bypassed;
    latenciesMs.insert(latenciesMs.end(), o.latenciesMs.begin(), o.latenciesMs.end());
    viSum += o.viSum;
    wanBytes += o.wanBytes;
    peeringBytesFetched += o.peeringBytesFetched;
    peeringBytesServed += o.peeringBytesServed;
    ruleLookups += o.ruleLookups;
    inserted += o.inserted;
    evicted += o.evicted;
    digestRebuilds += o.digestRebuilds;
    ruleDerivations += o.ruleDerivations;
    digestFalsePositives += o.digestFalsePositives;
    evictedRaces += o.evictedRaces;
    icpTimeouts += o.icpTimeouts;
    aclDroppedQueries += o.aclDroppedQueries;
    aclDroppedFetches += o.aclDroppedFetches;
    attackQueriesAnswered += o.attackQueriesAnswered;
    attackBytesServed += o.attackBytesServed;
}

double TenantMetrics::hitRatioLocal() const {
    return requests == 0 ? 0.0 : static_cast<double>(localHits) / requests;
}

double TenantMetrics::hitRatioPeer() const {
    return requests == 0 ? 0.0 : static_cast<double>(peerHits) / requests;
}

double TenantMetrics::meanLatencyMs() const {
    if (latenciesMs.empty()) return 0.0;
    double sum = 0.0;
    for (double v : latenciesMs) sum += v;
    return sum / static_cast<double>(latenciesMs.size());
}

namespace {
double nearestRankPercentile(std::vector<double> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double rank = std::ceil(pct / 100.0 * static_cast<double>(values.size()));
    std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
    if (idx >= values.size()) idx = values.size() - 1;
    return values[idx];
}
}  // namespace

double TenantMetrics::medianLatencyMs() const { return nearestRankPercentile(latenciesMs, 50.0); }
double TenantMetrics::p95LatencyMs() const { return nearestRankPercentile(latenciesMs, 95.0); }

double TenantMetrics::meanViTraversals() const {
    return requests == 0 ? 0.0 : static_cast<double>(viSum) / static_cast<double>(requests);
}

namespace {

json accountingJson(const PeeringAccounting& a) {
    json j;
    j["bytesServedToPeer"] = a.bytesServedToPeer;
    j["bytesFetchedFromPeer"] = a.bytesFetchedFromPeer;
    j["queriesSent"] = a.queriesSent;
    j["queriesReceived"] = a.queriesReceived;
    j["hitsReturned"] = a.hitsReturned;
    j["missesReturned"] = a.missesReturned;
    auto ratio = symmetryRatio(a);
    j["symmetryRatio"] = ratio ? json(*ratio) : json(nullptr);
    return j;
}

json tenantJson(const TenantMetrics& m) {
    json j;
    j["requests"] = m.requests;
    j["servedBy"] = {{"local", m.localHits},
                     {"peer", m.peerHits},
                     {"origin", m.originServed},
                     {"originBypassed", m.bypassed}};
    j["hitRatioLocal"] = m.hitRatioLocal();
    j["hitRatioPeer"] = m.hitRatioPeer();
    j["hitRatioCombined"] = m.hitRatioLocal() + m.hitRatioPeer();
    j["latencyMs"] = {{"mean", m.meanLatencyMs()},
                      {"median", m.medianLatencyMs()},
                      {"p95", m.p95LatencyMs()}};
    j["viTraversalsMean"] = m.meanViTraversals();
    j["wanBytes"] = m.wanBytes;
    j["peeringBytesFetched"] = m.peeringBytesFetched;
    j["peeringBytesServed"] = m.peeringBytesServed;
    j["ruleLookups"] = m.ruleLookups;
    j["cache"] = {{"inserted", m.inserted},
                  {"evicted", m.evicted},
                  {"digestRebuilds", m.digestRebuilds},
                  {"ruleDerivations", m.ruleDerivations},
                  {"digestFalsePositives", m.digestFalsePositives},
                  {"evictedRaces", m.evictedRaces},
                  {"icpTimeouts", m.icpTimeouts}};
    j["acl"] = {{"droppedQueries", m.aclDroppedQueries},
                {"droppedFetches", m.aclDroppedFetches},
                {"attackQueriesAnswered", m.attackQueriesAnswered},
                {"attackBytesServed", m.attackBytesServed}};
    return j;
}

}  // namespace

std::string MetricsReport::toJsonString() const {
    json root;
    root["scenario"] = scenario;
    root["seed"] = seed;
    root["durationS"] = durationS;
    root["global"] = tenantJson(global);
    json tj = json::object();
    for (const auto& [name, m] : tenants) tj[name] = tenantJson(m);
    root["tenants"] = tj;
    json lj = json::array();
    for (const LinkReport& l : links) {
        json e;
        e["a"] = l.a;
        e["b"] = l.b;
        e["accountingA"] = accountingJson(l.acctA);
        e["accountingB"] = accountingJson(l.acctB);
        lj.push_back(e);
    }
    root["peeringLinks"] = lj;
    return root.dump(2) + "\n";
}

void SimResult::writeTraceCsv(std::ostream& out) const {
    out << "time,tenant,objectKey,servedBy,latencyMs,viTraversals\n";
    char buf[64];
    for (const RequestRecord& r : trace) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.issuedAt);
        out << buf << ',' << tenantNames.at(r.tenantIdx) << ',' << r.contentId.objectKey << ','
            << servedByName(r.servedBy) << ',';
        std::snprintf(buf, sizeof(buf), "%.6f", r.latencyMs());
        out << buf << ',' << r.viTraversals << '\n';
    }
}

void SimResult::writeIcpTraceCsv(std::ostream& out) const {
    out << "time,kind,requestId,sender,contentKey,verdict\n";
    char buf[64];
    for (const IcpTraceRow& r : icpTrace) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.time);
        const char* kind = r.kind == IcpKind::Query ? "query"
                           : r.kind == IcpKind::Hit ? "hit"
                                                    : "miss";
        out << buf << ',' << kind << ',' << r.requestId << ',' << r.sender << ',' << r.contentKey
            << ',' << r.verdict << '\n';
    }
}

}  // namespace vcsim

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vcachesim/access_log.hpp"
#include "vcachesim/interception.hpp"
#include "vcachesim/peering.hpp"
#include "vcachesim/types.hpp"

namespace vcsim {

enum class ServedBy { Local, Peer, Origin, OriginBypassed };

const char* servedByName(ServedBy s);

struct RequestRecord {
    std::uint64_t seq = 0;  // issue order
    std::uint32_t tenantIdx = 0;
    ContentId contentId;
    SimTime issuedAt = 0.0;
    SimTime completedAt = 0.0;
    ServedBy servedBy = ServedBy::Origin;
    int viTraversals = 0;

    double latencyMs() const { return sToMs(completedAt - issuedAt); }
};

struct TenantMetrics {
    std::uint64_t requests = 0;
    std::uint64_t localHits = 0;
    std::uint64_t peerHits = 0;
    std::uint64_t originServed = 0;
    std::uint64_t bypassed = 0;
    std::vector<double> latenciesMs;  // per request, issue order
    std::uint64_t viSum = 0;
    std::uint64_t wanBytes = 0;
    std::uint64_t peeringBytesFetched = 0;  // over all links of this tenant's cache
    std::uint64_t peeringBytesServed = 0;
    std::uint64_t ruleLookups = 0;
    std::uint64_t inserted = 0;
    std::uint64_t evicted = 0;
    std::uint64_t digestRebuilds = 0;
    std::uint64_t ruleDerivations = 0;
    std::uint64_t digestFalsePositives = 0;
    std::uint64_t evictedRaces = 0;
    std::uint64_t icpTimeouts = 0;
    std::uint64_t aclDroppedQueries = 0;
    std::uint64_t aclDroppedFetches = 0;
    // would only move off zero if an unauthenticated message passed the ACL
    std::uint64_t attackQueriesAnswered = 0;
    std::uint64_t attackBytesServed = 0;

    void absorb(const TenantMetrics& other);
    double hitRatioLocal() const;
    double hitRatioPeer() const;
    double meanLatencyMs() const;
    double medianLatencyMs() const;
    double p95LatencyMs() const;
    double meanViTraversals() const;
};

struct LinkReport {
    std::string a;
    std::string b;
    PeeringAccounting acctA;
    PeeringAccounting acctB;
};

struct MetricsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    double durationS = 0.0;
    TenantMetrics global;
    std::vector<std::pair<std::string, TenantMetrics>> tenants;
    std::vector<LinkReport> links;

    // Canonical serialization; byte-identical for identical runs.
    std::string toJsonString() const;
};

struct IcpTraceRow {
    SimTime time = 0.0;
    IcpKind kind = IcpKind::Query;
    std::uint64_t requestId = 0;
    CacheId sender = 0;
    ObjectKey contentKey = 0;
    std::string verdict;  // allow | drop | hit | miss | timeout | duplicate
};

struct SimResult {
    MetricsReport report;
    std::vector<RequestRecord> trace;
    std::vector<std::string> tenantNames;
    std::map<std::string, AccessLog> accessLogs;   // keyed by tenant name
    std::map<std::string, RuleTable> finalRules;   // keyed by tenant name
    std::vector<IcpTraceRow> icpTrace;

    void writeTraceCsv(std::ostream& out) const;
    void writeIcpTraceCsv(std::ostream& out) const;
};

}  // namespace vcsim

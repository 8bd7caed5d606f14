#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>

#include "vcachesim/access_log.hpp"
#include "vcachesim/types.hpp"

namespace vcsim {

enum class FlowAction { Intercept, Bypass };

const char* flowActionName(FlowAction a);

struct FlowRule {
    DestinationId match = 0;
    FlowAction action = FlowAction::Intercept;
    int priority = 0;
};

// Per-tenant match/action table at the integration bridge. At most one rule
// per destination; the highest-priority matching rule wins, otherwise the
// default action (intercept).
class RuleTable {
public:
    RuleTable() = default;
    explicit RuleTable(TenantId tenant) : tenant_(tenant) {}

    TenantId tenant() const { return tenant_; }
    FlowAction defaultAction() const { return FlowAction::Intercept; }

    void addRule(const FlowRule& rule);
    FlowAction match(DestinationId destination) const;

    std::size_t ruleCount() const { return rules_.size(); }
    const std::map<DestinationId, FlowRule>& rules() const { return rules_; }

    // CSV schema: tenant,destination,action,priority
    void writeCsv(std::ostream& out) const;
    static RuleTable readCsv(std::istream& in);

private:
    TenantId tenant_ = 0;
    std::map<DestinationId, FlowRule> rules_;
};

struct MissPredictorConfig {
    double windowS = 300.0;
    std::uint64_t minSamples = 10;
    double missThreshold = 0.8;  // theta
};

// Derives bypass rules from an access log: a destination with enough samples
// in the window is bypassed when the fraction of its requests that were
// local misses of non-cacheable or never-subsequently-hit content reaches
// the threshold. Deterministic in (log, cfg, now).
RuleTable deriveRules(const AccessLog& log, const MissPredictorConfig& cfg, SimTime now,
                      TenantId tenant);

struct RuleEvaluation {
    std::size_t footprintRuleCount = 0;
    std::size_t bypassedRequests = 0;
    std::size_t interceptedRequests = 0;
    double truePositiveBypass = 0.0;             // bypassed that were not hits
    double falseBypass = 0.0;                    // bypassed that were hits
    std::optional<double> interceptHitRate;      // nullopt when nothing intercepted
};

// Replays a holdout log through the table; the holdout's recorded outcomes
// are the oracle for what each request would have done at the cache.
RuleEvaluation evaluateRules(const RuleTable& table, const AccessLog& holdout);

}  // namespace vcsim

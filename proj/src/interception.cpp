#include "vcachesim/interception.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "vcachesim/errors.hpp"

namespace vcsim {

const char* flowActionName(FlowAction a) {
    return a == FlowAction::Intercept ? "intercept" : "bypass";
}

void RuleTable::addRule(const FlowRule& rule) {
    auto it = rules_.find(rule.match);
    if (it == rules_.end() || it->second.priority < rule.priority) rules_[rule.match] = rule;
}

FlowAction RuleTable::match(DestinationId destination) const {
    auto it = rules_.find(destination);
    return it == rules_.end() ? defaultAction() : it->second.action;
}

void RuleTable::writeCsv(std::ostream& out) const {
    out << "tenant,destination,action,priority\n";
    for (const auto& [dest, rule] : rules_)
        out << tenant_ << ',' << dest << ',' << flowActionName(rule.action) << ','
            << rule.priority << '\n';
}

RuleTable RuleTable::readCsv(std::istream& in) {
    RuleTable table;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        if (lineNo == 1 && line.rfind("tenant,", 0) == 0) continue;
        std::istringstream fields(line);
        std::string cell;
        try {
            FlowRule rule;
            if (!std::getline(fields, cell, ',')) throw ParseError("missing tenant");
            table.tenant_ = static_cast<TenantId>(std::stoul(cell));
            if (!std::getline(fields, cell, ',')) throw ParseError("missing destination");
            rule.match = std::stoull(cell);
            if (!std::getline(fields, cell, ',')) throw ParseError("missing action");
            if (cell == "bypass")
                rule.action = FlowAction::Bypass;
            else if (cell == "intercept")
                rule.action = FlowAction::Intercept;
            else
                throw ParseError("unknown action '" + cell + "'");
            if (!std::getline(fields, cell, ',')) throw ParseError("missing priority");
            rule.priority = std::stoi(cell);
            table.addRule(rule);
        } catch (const std::exception& e) {
            throw ParseError("rule table line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return table;
}

RuleTable deriveRules(const AccessLog& log, const MissPredictorConfig& cfg, SimTime now,
                      TenantId tenant) {
    RuleTable table(tenant);
    const auto& records = log.records();
    const double windowStart = now - cfg.windowS;

    // latest in-window hit time per content, to decide "never subsequently hit"
    std::map<ContentId, SimTime> lastHitAt;
    for (const AccessLogRecord& r : records) {
        if (r.time < windowStart || r.time > now) continue;
        if (r.outcome == AccessOutcome::Hit || r.outcome == AccessOutcome::PeerHit) {
            auto [it, inserted] = lastHitAt.try_emplace(r.contentId, r.time);
            if (!inserted) it->second = std::max(it->second, r.time);
        }
    }

    struct DestStats {
        std::uint64_t total = 0;
        std::uint64_t missProne = 0;
    };
    std::map<DestinationId, DestStats> perDest;
    for (const AccessLogRecord& r : records) {
        if (r.time < windowStart || r.time > now) continue;
        DestStats& s = perDest[r.contentId.destination];
        s.total += 1;
        if (r.outcome != AccessOutcome::LocalMiss) continue;
        bool neverHitLater = true;
        if (auto it = lastHitAt.find(r.contentId); it != lastHitAt.end())
            neverHitLater = it->second <= r.time;
        if (!r.cacheable || neverHitLater) s.missProne += 1;
    }

    for (const auto& [dest, stats] : perDest) {
        if (stats.total < cfg.minSamples) continue;
        double ratio = static_cast<double>(stats.missProne) / static_cast<double>(stats.total);
        if (ratio >= cfg.missThreshold)
            table.addRule(FlowRule{dest, FlowAction::Bypass, 100});
    }
    return table;
}

RuleEvaluation evaluateRules(const RuleTable& table, const AccessLog& holdout) {
    RuleEvaluation ev;
    ev.footprintRuleCount = table.ruleCount();
    std::size_t bypassHits = 0;
    std::size_t interceptHits = 0;
    for (const AccessLogRecord& r : holdout.records()) {
        bool wouldHit = r.outcome == AccessOutcome::Hit;
        if (table.match(r.contentId.destination) == FlowAction::Bypass) {
            ev.bypassedRequests += 1;
            if (wouldHit) ++bypassHits;
        } else {
            ev.interceptedRequests += 1;
            if (wouldHit) ++interceptHits;
        }
    }
    if (ev.bypassedRequests > 0) {
        ev.falseBypass = static_cast<double>(bypassHits) / ev.bypassedRequests;
        ev.truePositiveBypass = 1.0 - ev.falseBypass;
    }
    if (ev.interceptedRequests > 0)
        ev.interceptHitRate = static_cast<double>(interceptHits) / ev.interceptedRequests;
    return ev;
}

}  // namespace vcsim

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vcachesim/errors.hpp"
#include "vcachesim/types.hpp"

namespace vcsim {

// Outcome of a request as seen by one cache. Bypassed requests never touch a
// cache, so simulation-produced cache logs never contain Bypassed; the value
// exists for externally produced logs fed to offline rule derivation.
enum class AccessOutcome { Hit, LocalMiss, PeerHit, Bypassed };

const char* accessOutcomeName(AccessOutcome o);
AccessOutcome accessOutcomeFromName(const std::string& name);

struct AccessLogRecord {
    SimTime time = 0.0;
    ContentId contentId;
    AccessOutcome outcome = AccessOutcome::Hit;
    bool cacheable = true;
};

// Append-only, time-ordered request log. Feeds interception-rule derivation
// and the CSV export.
class AccessLog {
public:
    void append(const AccessLogRecord& rec);
    const std::vector<AccessLogRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    // CSV schema: time,objectKey,destination,outcome,cacheable
    void writeCsv(std::ostream& out) const;
    static AccessLog readCsv(std::istream& in);

private:
    std::vector<AccessLogRecord> records_;
};

}  // namespace vcsim

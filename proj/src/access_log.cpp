#include "vcachesim/access_log.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace vcsim {

const char* accessOutcomeName(AccessOutcome o) {
    switch (o) {
        case AccessOutcome::Hit:
            return "hit";
        case AccessOutcome::LocalMiss:
            return "local-miss";
        case AccessOutcome::PeerHit:
            return "peer-hit";
        case AccessOutcome::Bypassed:
            return "bypassed";
    }
    return "?";
}

AccessOutcome accessOutcomeFromName(const std::string& name) {
    if (name == "hit") return AccessOutcome::Hit;
    if (name == "local-miss") return AccessOutcome::LocalMiss;
    if (name == "peer-hit") return AccessOutcome::PeerHit;
    if (name == "bypassed") return AccessOutcome::Bypassed;
    throw ParseError("unknown access outcome '" + name + "'");
}

void AccessLog::append(const AccessLogRecord& rec) {
    if (!records_.empty() && rec.time < records_.back().time)
        throw TimeRegressionError("access log append would regress time");
    records_.push_back(rec);
}

void AccessLog::writeCsv(std::ostream& out) const {
    out << "time,objectKey,destination,outcome,cacheable\n";
    char buf[64];
    for (const AccessLogRecord& r : records_) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.time);
        out << buf << ',' << r.contentId.objectKey << ',' << r.contentId.destination << ','
            << accessOutcomeName(r.outcome) << ',' << (r.cacheable ? 1 : 0) << '\n';
    }
}

AccessLog AccessLog::readCsv(std::istream& in) {
    AccessLog log;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        if (lineNo == 1 && line.rfind("time,", 0) == 0) continue;  // header
        std::istringstream fields(line);
        std::string cell;
        AccessLogRecord rec;
        try {
            if (!std::getline(fields, cell, ',')) throw ParseError("missing time");
            rec.time = std::stod(cell);
            if (!std::getline(fields, cell, ',')) throw ParseError("missing objectKey");
            rec.contentId.objectKey = std::stoull(cell);
            if (!std::getline(fields, cell, ',')) throw ParseError("missing destination");
            rec.contentId.destination = std::stoull(cell);
            if (!std::getline(fields, cell, ',')) throw ParseError("missing outcome");
            rec.outcome = accessOutcomeFromName(cell);
            if (!std::getline(fields, cell, ',')) throw ParseError("missing cacheable");
            rec.cacheable = cell == "1" || cell == "true";
        } catch (const std::exception& e) {
            throw ParseError("access log line " + std::to_string(lineNo) + ": " + e.what());
        }
        log.append(rec);
    }
    return log;
}

}  // namespace vcsim

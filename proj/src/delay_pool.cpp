#include "vcachesim/delay_pool.hpp"

#include <algorithm>

namespace vcsim {

SimTime DelayPool::admit(CacheId peer, std::uint64_t bytes, SimTime now) {
    if (!limited_) return now;

    auto [it, inserted] = individual_.try_emplace(
        peer, cfg_.individualCapacityBytes, cfg_.individualRateBps);
    TokenBucket& ind = it->second;

    // FIFO per pool: a request never overtakes an earlier one.
    SimTime start = std::max(now, lastAdmit_);
    aggregate_.refillTo(start);
    ind.refillTo(start);

    double b = static_cast<double>(bytes);
    SimTime admitAt = start + std::max(aggregate_.waitFor(b), ind.waitFor(b));

    aggregate_.refillTo(admitAt);
    ind.refillTo(admitAt);
    aggregate_.debit(b);
    ind.debit(b);
    lastAdmit_ = admitAt;
    return admitAt;
}

}  // namespace vcsim

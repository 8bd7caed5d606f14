#pragma once

#include <cstdint>
#include <map>

#include "vcachesim/types.hpp"

namespace vcsim {

// Continuously refilled token bucket. Refill is computed lazily at the times
// the bucket is consulted, saturating at capacity, so admission decisions are
// exact and independent of any tick size.
class TokenBucket {
public:
    TokenBucket() = default;
    TokenBucket(double capacityBytes, double rateBytesPerS)
        : capacity_(capacityBytes), rate_(rateBytesPerS), level_(capacityBytes) {}

    void refillTo(SimTime t) {
        if (t <= lastRefill_) return;
        level_ = std::min(capacity_, level_ + rate_ * (t - lastRefill_));
        lastRefill_ = t;
    }

    // Seconds from t until the (uncapped) accumulation reaches `bytes`,
    // assuming refillTo(t) was just applied. Zero when already covered.
    double waitFor(double bytes) const {
        if (level_ >= bytes) return 0.0;
        return (bytes - level_) / rate_;
    }

    // Debits `bytes`, clamped at zero. An oversized request (> capacity)
    // drains the bucket entirely; its excess was paid for by waitFor(), which
    // ignores the cap, and the level invariant [0, capacity] is preserved.
    void debit(double bytes) { level_ = std::max(0.0, level_ - bytes); }

    double level() const { return level_; }
    double capacity() const { return capacity_; }
    double rate() const { return rate_; }

private:
    double capacity_ = 0.0;
    double rate_ = 1.0;
    double level_ = 0.0;
    SimTime lastRefill_ = 0.0;
};

struct DelayPoolConfig {
    double aggregateCapacityBytes = 0.0;
    double aggregateRateBps = 0.0;  // bytes per second
    double individualCapacityBytes = 0.0;
    double individualRateBps = 0.0;
};

// Class-2 delay pool: one aggregate bucket for the shared network plus an
// individual bucket per peer. Transfers are admitted at the earliest time
// both buckets cover the request, in FIFO order per pool. Admission may be
// delayed, never refused.
class DelayPool {
public:
    DelayPool() = default;  // unlimited: admits immediately
    explicit DelayPool(const DelayPoolConfig& cfg) : cfg_(cfg), limited_(true) {
        aggregate_ = TokenBucket(cfg.aggregateCapacityBytes, cfg.aggregateRateBps);
    }

    SimTime admit(CacheId peer, std::uint64_t bytes, SimTime now);

    bool limited() const { return limited_; }
    const DelayPoolConfig& config() const { return cfg_; }

private:
    DelayPoolConfig cfg_;
    bool limited_ = false;
    TokenBucket aggregate_;
    std::map<CacheId, TokenBucket> individual_;
    SimTime lastAdmit_ = 0.0;
};

}  // namespace vcsim

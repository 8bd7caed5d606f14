#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "vcachesim/delay_pool.hpp"

using namespace vcsim;

namespace {
// the spec's running example: aggregate 8000 B at 1000 B/s,
// individual 4000 B at 500 B/s
DelayPoolConfig classTwo() { return DelayPoolConfig{8000.0, 1000.0, 4000.0, 500.0}; }
}  // namespace

TEST_SUITE("delay_pool") {

TEST_CASE("full buckets admit immediately") {
    DelayPool pool(classTwo());
    CHECK(pool.admit(1, 500, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("drained buckets delay by the binding refill") {
    DelayPool pool(classTwo());
    // drain the individual bucket of peer 1 and, with peer 2, the aggregate
    CHECK(pool.admit(1, 4000, 0.0) == doctest::Approx(0.0));
    CHECK(pool.admit(2, 4000, 0.0) == doctest::Approx(0.0));
    // both relevant buckets now empty; 1000 B needs 2 s at the individual
    // bucket's 500 B/s, only 1 s at the aggregate's 1000 B/s
    CHECK(pool.admit(1, 1000, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("unlimited pool never delays") {
    DelayPool pool;
    CHECK_FALSE(pool.limited());
    CHECK(pool.admit(1, 1 << 20, 3.5) == doctest::Approx(3.5));
}

TEST_CASE("admissions are fifo per pool") {
    DelayPool pool(classTwo());
    SimTime last = 0.0;
    for (int i = 0; i < 50; ++i) {
        CacheId peer = 1 + (i % 3);
        SimTime t = pool.admit(peer, 900, 0.01 * i);
        CHECK(t >= last);
        last = t;
    }
}

TEST_CASE("oversized request waits out the uncapped refill") {
    // 6000 B against a 4000 B / 500 B/s individual bucket starting full:
    // (6000 - 4000) / 500 = 4 s
    DelayPool pool(classTwo());
    CHECK(pool.admit(1, 6000, 0.0) == doctest::Approx(4.0));
    // the bucket was left empty, so a second oversized request pays the
    // full 6000 B refill
    CHECK(pool.admit(1, 6000, 4.0) == doctest::Approx(16.0));
}

TEST_CASE("sustained saturation respects the shaping bound") {
    // one peer hammers the pool for 100 s; delivered bytes may not exceed
    // individualCap + individualRate * T within one object
    const double objBytes = 1000.0;
    const double horizon = 100.0;
    DelayPool pool(classTwo());
    std::uint64_t delivered = 0;
    SimTime t = 0.0;
    while (true) {
        SimTime admit = pool.admit(1, static_cast<std::uint64_t>(objBytes), t);
        if (admit > horizon) break;
        delivered += static_cast<std::uint64_t>(objBytes);
        t = admit;
    }
    double bound = 4000.0 + 500.0 * horizon;
    CHECK(static_cast<double>(delivered) <= bound + objBytes);
    // and the pool is not pointlessly conservative
    CHECK(static_cast<double>(delivered) >= bound - 2 * objBytes);
}

TEST_CASE("two saturating peers are bound individually and in aggregate") {
    const double objBytes = 1000.0;
    const double horizon = 100.0;
    DelayPool pool(classTwo());
    std::map<CacheId, double> delivered;
    SimTime t = 0.0;
    int i = 0;
    while (t <= horizon) {
        CacheId peer = 1 + (i++ % 2);
        SimTime admit = pool.admit(peer, static_cast<std::uint64_t>(objBytes), t);
        if (admit > horizon) break;
        delivered[peer] += objBytes;
        t = admit;
    }
    double indBound = 4000.0 + 500.0 * horizon + objBytes;
    double aggBound = 8000.0 + 1000.0 * horizon + objBytes;
    CHECK(delivered[1] <= indBound);
    CHECK(delivered[2] <= indBound);
    CHECK(delivered[1] + delivered[2] <= aggBound);
}

TEST_CASE("continuous admission matches the 1 ms step oracle") {
    // independent fine-grained stepper; totals must agree within one object
    const double objBytes = 1000.0;
    const double horizon = 100.0;

    std::vector<oracle::PoolRequest> requests;
    for (int i = 0; i < 300; ++i)
        requests.push_back({0.25 * i, 1 + (i % 2), objBytes});

    auto oracleDeliveries = oracle::stepPool(requests, 8000.0, 1000.0, 4000.0, 500.0, horizon);
    double oracleBytes = 0.0;
    for (const auto& d : oracleDeliveries)
        if (d.admitS <= horizon) oracleBytes += d.bytes;

    DelayPool pool(classTwo());
    double implBytes = 0.0;
    for (const auto& r : requests) {
        SimTime admit = pool.admit(static_cast<CacheId>(r.peer),
                                   static_cast<std::uint64_t>(r.bytes), r.arrivalS);
        if (admit <= horizon) implBytes += r.bytes;
    }
    CHECK(std::abs(implBytes - oracleBytes) <= objBytes);
}

TEST_CASE("per-request admit times track the oracle") {
    const double objBytes = 1500.0;
    std::vector<oracle::PoolRequest> requests;
    for (int i = 0; i < 40; ++i) requests.push_back({0.5 * i, 1, objBytes});

    auto oracleDeliveries = oracle::stepPool(requests, 8000.0, 1000.0, 4000.0, 500.0, 200.0);
    REQUIRE(oracleDeliveries.size() == requests.size());

    DelayPool pool(classTwo());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        SimTime admit = pool.admit(1, static_cast<std::uint64_t>(objBytes), requests[i].arrivalS);
        CHECK(admit == doctest::Approx(oracleDeliveries[i].admitS).epsilon(0.01));
    }
}

}  // TEST_SUITE

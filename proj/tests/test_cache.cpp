#include <sstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "vcachesim/access_log.hpp"
#include "vcachesim/cache.hpp"
#include "vcachesim/rng.hpp"

using namespace vcsim;

namespace {
ContentId cid(std::uint64_t key, std::uint64_t dest = 1) { return ContentId{key, dest}; }
ContentObject obj(std::uint64_t key, std::uint64_t bytes, bool cacheable = true) {
    return ContentObject{cid(key), bytes, cacheable};
}
}  // namespace

TEST_SUITE("cache") {

TEST_CASE("empty store misses") {
    CacheStore store(100);
    CHECK_FALSE(store.lookup(cid(1), 0.0));
    CHECK(store.usedBytes() == 0);
}

TEST_CASE("insert then lookup hits") {
    CacheStore store(100);
    CHECK(store.insert(obj(1, 10), 0.0).empty());
    CHECK(store.lookup(cid(1), 1.0));
    CHECK(store.usedBytes() == 10);
}

TEST_CASE("lru trace from two-unit store") {
    // capacity 2 units; c1, c2 inserted; c1 touched; c3 evicts c2
    CacheStore store(2);
    store.insert(obj(1, 1), 0.0);
    store.insert(obj(2, 1), 1.0);
    CHECK(store.lookup(cid(1), 2.0));
    auto evicted = store.insert(obj(3, 1), 3.0);
    REQUIRE(evicted.size() == 1);
    CHECK(evicted[0] == cid(2));
    CHECK_FALSE(store.lookup(cid(2), 4.0));
    CHECK(store.lookup(cid(1), 5.0));
}

TEST_CASE("full store evicts in recency order") {
    CacheStore store(2);
    store.insert(obj(1, 1), 0.0);
    store.insert(obj(2, 1), 1.0);
    auto evicted = store.insert(obj(3, 1), 2.0);
    REQUIRE(evicted.size() == 1);
    CHECK(evicted[0] == cid(1));
}

TEST_CASE("oversized and non-cacheable objects are rejected") {
    CacheStore store(10);
    CHECK_THROWS_AS(store.insert(obj(1, 11), 0.0), ObjectTooLargeError);
    CHECK_THROWS_AS(store.insert(obj(1, 5, false), 0.0), NotCacheableError);
}

TEST_CASE("peek does not promote") {
    CacheStore store(2);
    store.insert(obj(1, 1), 0.0);
    store.insert(obj(2, 1), 1.0);
    CHECK(store.peek(cid(1)));
    auto evicted = store.insert(obj(3, 1), 2.0);
    // a promoting lookup would have saved c1
    REQUIRE(evicted.size() == 1);
    CHECK(evicted[0] == cid(1));
}

TEST_CASE("random trace matches the recency-list oracle") {
    // 10^4 mixed operations; hit/miss and eviction sequences must agree
    // exactly and the capacity invariant must hold after every step
    const std::uint64_t capacity = 40;
    CacheStore store(capacity);
    oracle::LruList reference(capacity);
    Rng rng(0xC0FFEE);
    for (int i = 0; i < 10000; ++i) {
        std::uint64_t key = rng.uniformInt(60);
        if (rng.bernoulli(0.5)) {
            CHECK(store.lookup(cid(key), i) == reference.lookup(cid(key)));
        } else {
            std::uint64_t bytes = 1 + key % 5;  // size fixed per id
            auto got = store.insert(obj(key, bytes), i);
            auto expected = reference.insert(cid(key), bytes);
            CHECK(got == expected);
        }
        CHECK(store.usedBytes() <= capacity);
        CHECK(store.usedBytes() == reference.usedBytes());
    }
    CHECK(store.recencyOrder() == reference.order());
}

TEST_CASE("reinserting a stored id promotes without eviction") {
    CacheStore store(2);
    store.insert(obj(1, 1), 0.0);
    store.insert(obj(2, 1), 1.0);
    CHECK(store.insert(obj(1, 1), 2.0).empty());
    auto evicted = store.insert(obj(3, 1), 3.0);
    REQUIRE(evicted.size() == 1);
    CHECK(evicted[0] == cid(2));
}

TEST_CASE("access log appends in time order") {
    AccessLog log;
    log.append({1.0, cid(1), AccessOutcome::Hit, true});
    log.append({1.0, cid(2), AccessOutcome::LocalMiss, false});
    log.append({2.0, cid(3), AccessOutcome::PeerHit, true});
    CHECK(log.size() == 3);
    CHECK_THROWS_AS(log.append({0.5, cid(4), AccessOutcome::Hit, true}), TimeRegressionError);
    CHECK(log.size() == 3);
}

TEST_CASE("access log keeps insertion order over many appends") {
    AccessLog log;
    for (int i = 0; i < 1000; ++i)
        log.append({static_cast<double>(i), cid(i), AccessOutcome::Hit, true});
    for (int i = 0; i < 1000; ++i)
        CHECK(log.records()[i].contentId.objectKey == static_cast<std::uint64_t>(i));
}

TEST_CASE("access log csv round trip") {
    AccessLog log;
    log.append({0.25, cid(7, 3), AccessOutcome::LocalMiss, false});
    log.append({1.5, cid(8, 4), AccessOutcome::Bypassed, true});
    std::ostringstream out;
    log.writeCsv(out);
    std::istringstream in(out.str());
    AccessLog parsed = AccessLog::readCsv(in);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed.records()[0].contentId == cid(7, 3));
    CHECK(parsed.records()[0].outcome == AccessOutcome::LocalMiss);
    CHECK_FALSE(parsed.records()[0].cacheable);
    CHECK(parsed.records()[1].outcome == AccessOutcome::Bypassed);
}

}  // TEST_SUITE

#pragma once

#include <cstdint>
#include <vector>

#include "vcachesim/cache.hpp"
#include "vcachesim/types.hpp"

namespace vcsim {

// Bloom-filter cache digest: the compact content summary a cache pushes to
// its siblings. k probe positions come from double hashing over the seeded
// 128-bit content hash, so a digest is reproducible from (contents, seed).
// No false negatives by construction; false positives are resolved by ICP.
class CacheDigest {
public:
    CacheDigest() = default;
    CacheDigest(std::uint64_t bits, std::uint32_t hashCount, std::uint64_t seed);

    void add(const ContentId& id);
    bool contains(const ContentId& id) const;

    std::uint64_t bitCount() const { return bits_; }
    std::uint32_t hashCount() const { return hashes_; }
    std::uint64_t generation() const { return generation_; }
    SimTime builtAt() const { return builtAt_; }
    void stamp(std::uint64_t generation, SimTime builtAt) {
        generation_ = generation;
        builtAt_ = builtAt;
    }

    std::size_t setBitCount() const;

private:
    std::uint64_t probe(const Hash128& h, std::uint32_t i) const;

    std::uint64_t bits_ = 0;
    std::uint32_t hashes_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t generation_ = 0;
    SimTime builtAt_ = 0.0;
    std::vector<std::uint64_t> words_;
};

// Builds a digest over the store's current contents, stamped with the next
// generation number.
CacheDigest buildDigest(const CacheStore& store, std::uint64_t bits, std::uint32_t hashCount,
                        std::uint64_t seed, std::uint64_t generation, SimTime now);

// Analytic false-positive rate for n insertions into m bits with k hashes.
double bloomTheoreticalFpr(std::uint64_t n, std::uint64_t m, std::uint32_t k);

}  // namespace vcsim

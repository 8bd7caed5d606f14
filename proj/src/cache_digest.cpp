#include "vcachesim/cache_digest.hpp"

#include <bit>
#include <cmath>

#include "vcachesim/errors.hpp"

namespace vcsim {

CacheDigest::CacheDigest(std::uint64_t bits, std::uint32_t hashCount, std::uint64_t seed)
    : bits_(bits), hashes_(hashCount), seed_(seed) {
    if (bits == 0) throw SimError("digest bit count must be > 0");
    if (hashCount == 0) throw SimError("digest hash count must be >= 1");
    words_.assign((bits + 63) / 64, 0);
}

std::uint64_t CacheDigest::probe(const Hash128& h, std::uint32_t i) const {
    // per-index remix of the 128-bit content hash; unlike plain double
    // hashing this tracks the analytic false-positive rate even at high
    // hash counts and low fill
    return mix64(h.h1 ^ (h.h2 + 0x9E3779B97F4A7C15ULL * (i + 1))) % bits_;
}

void CacheDigest::add(const ContentId& id) {
    Hash128 h = contentHash128(id, seed_);
    for (std::uint32_t i = 0; i < hashes_; ++i) {
        std::uint64_t pos = probe(h, i);
        words_[pos >> 6] |= 1ULL << (pos & 63);
    }
}

bool CacheDigest::contains(const ContentId& id) const {
    if (words_.empty()) return false;
    Hash128 h = contentHash128(id, seed_);
    for (std::uint32_t i = 0; i < hashes_; ++i) {
        std::uint64_t pos = probe(h, i);
        if ((words_[pos >> 6] & (1ULL << (pos & 63))) == 0) return false;
    }
    return true;
}

std::size_t CacheDigest::setBitCount() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

CacheDigest buildDigest(const CacheStore& store, std::uint64_t bits, std::uint32_t hashCount,
                        std::uint64_t seed, std::uint64_t generation, SimTime now) {
    CacheDigest digest(bits, hashCount, seed);
    for (const CacheStore::Entry& e : store.entries()) digest.add(e.id);
    digest.stamp(generation, now);
    return digest;
}

double bloomTheoreticalFpr(std::uint64_t n, std::uint64_t m, std::uint32_t k) {
    double kd = static_cast<double>(k);
    double exponent = -kd * static_cast<double>(n) / static_cast<double>(m);
    return std::pow(1.0 - std::exp(exponent), kd);
}

}  // namespace vcsim

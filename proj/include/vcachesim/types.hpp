#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace vcsim {

// Opaque scenario-scoped identifiers. Kept as plain integers so they can be
// written to CSV/JSON and compared bit-exactly across runs.
using NodeId = std::uint32_t;
using TenantId = std::uint32_t;
using CacheId = std::uint32_t;
using VlanId = std::uint32_t;
using HostId = std::uint32_t;

using ObjectKey = std::uint64_t;
using DestinationId = std::uint64_t;

// Simulation time in seconds; latencies cross the config boundary in ms.
using SimTime = double;

inline constexpr double kMsPerSecond = 1000.0;
inline double msToS(double ms) { return ms / kMsPerSecond; }
inline double sToMs(double s) { return s * kMsPerSecond; }

// A cached object identity: the object key plus the origin server it lives
// on. Equality is on the pair; the destination is what interception rules
// match on.
struct ContentId {
    ObjectKey objectKey = 0;
    DestinationId destination = 0;

    friend bool operator==(const ContentId&, const ContentId&) = default;
    friend auto operator<=>(const ContentId&, const ContentId&) = default;
};

// splitmix64 finalizer; the fixed mixing function used everywhere identifiers
// need hashing. Fully portable, no libc dependence.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct ContentIdHash {
    std::size_t operator()(const ContentId& id) const noexcept {
        return static_cast<std::size_t>(mix64(mix64(id.objectKey) ^ id.destination));
    }
};

// 128-bit content hash, seeded per scenario. Feeds the digest's
// double-hashing scheme and the peering credential generator.
struct Hash128 {
    std::uint64_t h1 = 0;
    std::uint64_t h2 = 0;
};

inline Hash128 contentHash128(const ContentId& id, std::uint64_t seed) {
    Hash128 h;
    h.h1 = mix64(mix64(seed ^ id.objectKey) ^ id.destination);
    h.h2 = mix64(h.h1 ^ 0xD6E8FEB86659FD93ULL);
    return h;
}

}  // namespace vcsim

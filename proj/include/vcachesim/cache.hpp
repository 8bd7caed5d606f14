#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "vcachesim/errors.hpp"
#include "vcachesim/types.hpp"

namespace vcsim {

struct ContentObject {
    ContentId id;
    std::uint64_t bytes = 0;
    bool cacheable = true;  // false models personalized content
};

// Bounded LRU content store. Capacity is in bytes; recency order is the
// eviction order. Single writer (the event loop).
class CacheStore {
public:
    explicit CacheStore(std::uint64_t capacityBytes) : capacity_(capacityBytes) {}

    // Hit promotes the entry to most-recently-used and stamps lastAccess.
    bool lookup(const ContentId& id, SimTime now);

    // Availability probe: no recency promotion, no mutation. ICP queries and
    // digest checks use this.
    bool peek(const ContentId& id) const { return index_.count(id) > 0; }

    // Inserts obj, evicting least-recently-used entries until it fits.
    // Returns the evicted ids in eviction order. Re-inserting a stored id
    // just promotes it.
    std::vector<ContentId> insert(const ContentObject& obj, SimTime now);

    bool wouldFit(std::uint64_t bytes) const { return bytes <= capacity_; }
    std::uint64_t capacityBytes() const { return capacity_; }
    std::uint64_t usedBytes() const { return used_; }
    std::size_t entryCount() const { return entries_.size(); }
    std::uint64_t entryBytes(const ContentId& id) const;

    // MRU-first snapshot; used for digest builds and by the LRU test oracle.
    std::vector<ContentId> recencyOrder() const;

    struct Entry {
        ContentId id;
        std::uint64_t bytes;
        SimTime lastAccess;
    };
    const std::list<Entry>& entries() const { return entries_; }

private:
    void touch(std::list<Entry>::iterator it, SimTime now);

    std::uint64_t capacity_;
    std::uint64_t used_ = 0;
    std::list<Entry> entries_;  // front = most recently used
    std::unordered_map<ContentId, std::list<Entry>::iterator, ContentIdHash> index_;
};

}  // namespace vcsim

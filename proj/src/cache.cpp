#include "vcachesim/cache.hpp"

namespace vcsim {

void CacheStore::touch(std::list<Entry>::iterator it, SimTime now) {
    it->lastAccess = now;
    entries_.splice(entries_.begin(), entries_, it);
}

bool CacheStore::lookup(const ContentId& id, SimTime now) {
    auto it = index_.find(id);
    if (it == index_.end()) return false;
    touch(it->second, now);
    return true;
}

std::uint64_t CacheStore::entryBytes(const ContentId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? 0 : it->second->bytes;
}

std::vector<ContentId> CacheStore::insert(const ContentObject& obj, SimTime now) {
    if (!obj.cacheable) throw NotCacheableError("object is not cacheable");
    if (obj.bytes > capacity_) throw ObjectTooLargeError("object exceeds cache capacity");

    if (auto it = index_.find(obj.id); it != index_.end()) {
        // size is fixed per id within a scenario, so this is a pure promotion
        touch(it->second, now);
        return {};
    }

    std::vector<ContentId> evicted;
    while (used_ + obj.bytes > capacity_) {
        Entry& victim = entries_.back();
        used_ -= victim.bytes;
        evicted.push_back(victim.id);
        index_.erase(victim.id);
        entries_.pop_back();
    }
    entries_.push_front(Entry{obj.id, obj.bytes, now});
    index_[obj.id] = entries_.begin();
    used_ += obj.bytes;
    return evicted;
}

std::vector<ContentId> CacheStore::recencyOrder() const {
    std::vector<ContentId> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.id);
    return out;
}

}  // namespace vcsim

#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

namespace niwalk {

/// Open-addressing hash set of packed lattice sites (nonzero 64-bit keys,
/// zero = empty slot). Linear probing, power-of-two capacity, grown at 70%
/// load. clear() keeps small tables and reallocates oversized ones so that
/// reuse across millions of short-lived pairs stays cheap.
class SiteSet {
public:
    explicit SiteSet(std::size_t initial_capacity = 1024) {
        std::size_t cap = 16;
        while (cap < initial_capacity) cap <<= 1;
        slots_.assign(cap, 0);
        mask_ = cap - 1;
    }

    /// A set sized so that n insertions trigger no rehash.
    static SiteSet sized_for(std::size_t n) {
        return SiteSet((n + 1) * 10 / 7 + 16);
    }

    /// Hints the cache about the bucket a future contains/insert will touch.
    void prefetch(std::uint64_t key) const {
        __builtin_prefetch(&slots_[mix(key) & mask_]);
    }

    std::size_t size() const { return count_; }
    std::size_t capacity() const { return slots_.size(); }

    bool contains(std::uint64_t key) const {
        std::size_t i = mix(key) & mask_;
        while (slots_[i] != 0) {
            if (slots_[i] == key) return true;
            i = (i + 1) & mask_;
        }
        return false;
    }

    /// Returns true if the key was newly inserted.
    bool insert(std::uint64_t key) {
        if ((count_ + 1) * 10 >= slots_.size() * 7) grow();
        std::size_t i = mix(key) & mask_;
        while (slots_[i] != 0) {
            if (slots_[i] == key) return false;
            i = (i + 1) & mask_;
        }
        slots_[i] = key;
        ++count_;
        return true;
    }

    void reserve(std::size_t n) {
        while (slots_.size() * 7 < (n + 1) * 10) grow();
    }

    void clear() {
        count_ = 0;
        if (slots_.size() > (std::size_t{1} << 15)) {
            slots_.assign(1024, 0);
            mask_ = 1023;
        } else {
            std::memset(slots_.data(), 0, slots_.size() * sizeof(std::uint64_t));
        }
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBULL;
        x ^= x >> 31;
        return x;
    }

    void grow() {
        std::vector<std::uint64_t> old = std::move(slots_);
        slots_.assign(old.size() * 2, 0);
        mask_ = slots_.size() - 1;
        for (std::uint64_t k : old) {
            if (k == 0) continue;
            std::size_t i = mix(k) & mask_;
            while (slots_[i] != 0) i = (i + 1) & mask_;
            slots_[i] = k;
        }
    }

    std::vector<std::uint64_t> slots_;
    std::size_t mask_ = 0;
    std::size_t count_ = 0;
};

}  // namespace niwalk

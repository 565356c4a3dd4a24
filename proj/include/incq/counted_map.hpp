#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "incq/value.hpp"

namespace incq {

/// A set of values with per-element derivation counts and deterministic
/// (first-insertion) iteration order. An element is live iff its count >= 1.
class CountedSet {
public:
    /// Returns true when the element transitioned absent -> present.
    bool cadd(const Value &v) {
        auto it = pos_.find(v);
        if (it == pos_.end()) {
            pos_.emplace(v, slots_.size());
            slots_.emplace_back(v, 1);
            ++live_;
            return true;
        }
        ++slots_[it->second].second;
        return false;
    }

    /// Returns true when the element transitioned present -> absent.
    bool cdel(const Value &v) {
        auto it = pos_.find(v);
        if (it == pos_.end() || slots_[it->second].second <= 0)
            throw std::logic_error("cdel of absent element: " + v.to_string());
        if (--slots_[it->second].second == 0) {
            pos_.erase(it);
            --live_;
            ++dead_;
            maybe_compact();
            return true;
        }
        return false;
    }

    /// Uncounted add; the element must be absent.
    void add(const Value &v) {
        auto it = pos_.find(v);
        if (it != pos_.end())
            throw std::logic_error("uncounted add of present element: " + v.to_string());
        pos_.emplace(v, slots_.size());
        slots_.emplace_back(v, 1);
        ++live_;
    }

    /// Uncounted delete; the element must be present.
    void del(const Value &v) {
        auto it = pos_.find(v);
        if (it == pos_.end())
            throw std::logic_error("uncounted del of absent element: " + v.to_string());
        slots_[it->second].second = 0;
        pos_.erase(it);
        --live_;
        ++dead_;
        maybe_compact();
    }

    /// Guarded add: no-op when present. Returns true when inserted.
    bool add_if_absent(const Value &v) {
        if (contains(v)) return false;
        add(v);
        return true;
    }

    bool contains(const Value &v) const { return pos_.count(v) != 0; }

    int32_t count(const Value &v) const {
        auto it = pos_.find(v);
        return it == pos_.end() ? 0 : slots_[it->second].second;
    }

    size_t size() const { return live_; }
    bool empty() const { return live_ == 0; }

    template <typename F>
    void for_each(F &&f) const {
        for (const auto &[v, c] : slots_)
            if (c > 0) f(v);
    }

    template <typename F>
    void for_each_counted(F &&f) const {
        for (const auto &[v, c] : slots_)
            if (c > 0) f(v, c);
    }

    ValueVec to_vector() const {
        ValueVec out;
        out.reserve(live_);
        for_each([&out](const Value &v) { out.push_back(v); });
        return out;
    }

private:
    void maybe_compact() {
        if (dead_ < 16 || dead_ < live_) return;
        std::vector<std::pair<Value, int32_t>> fresh;
        fresh.reserve(live_);
        for (auto &s : slots_)
            if (s.second > 0) fresh.push_back(std::move(s));
        slots_ = std::move(fresh);
        pos_.clear();
        for (size_t i = 0; i < slots_.size(); ++i) pos_.emplace(slots_[i].first, i);
        dead_ = 0;
    }

    std::vector<std::pair<Value, int32_t>> slots_;
    std::unordered_map<Value, size_t, ValueHash> pos_;
    size_t live_ = 0;
    size_t dead_ = 0;
};

/// Keyed map from key tuples to counted image sets: the single physical
/// representation of results, tag sets, filtered relations, inverse maps,
/// and demand projections. Lookups are expected O(1); images are references.
class CountedMap {
public:
    explicit CountedMap(bool counted = true) : counted_(counted) {}

    bool counted() const { return counted_; }
    void set_counted(bool c) { counted_ = c; }

    /// Counted add; returns true on an absent -> present transition.
    bool cadd(const Value &key, const Value &val) {
        if (!counted_) throw std::logic_error("cadd on uncounted map");
        return entry(key).img.cadd(val);
    }

    bool cdel(const Value &key, const Value &val) {
        if (!counted_) throw std::logic_error("cdel on uncounted map");
        auto it = require(key);
        bool gone = it->second.img.cdel(val);
        if (gone && it->second.img.empty()) entries_.erase(it);
        return gone;
    }

    void add(const Value &key, const Value &val) {
        if (counted_) throw std::logic_error("uncounted add on counted map");
        entry(key).img.add(val);
    }

    void del(const Value &key, const Value &val) {
        if (counted_) throw std::logic_error("uncounted del on counted map");
        auto it = require(key);
        it->second.img.del(val);
        if (it->second.img.empty()) entries_.erase(it);
    }

    /// Guarded add: no-op when the pair is present.
    bool add_if_absent(const Value &key, const Value &val) {
        if (counted_) throw std::logic_error("uncounted add on counted map");
        return entry(key).img.add_if_absent(val);
    }

    bool dom_contains(const Value &key) const { return entries_.count(key) != 0; }

    bool contains(const Value &key, const Value &val) const {
        auto it = entries_.find(key);
        return it != entries_.end() && it->second.img.contains(val);
    }

    int32_t count(const Value &key, const Value &val) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.img.count(val);
    }

    /// O(1) image reference; null when the key is absent.
    const CountedSet *image(const Value &key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second.img;
    }

    size_t num_keys() const { return entries_.size(); }

    /// Live size per the measurement convention: number of keys plus the
    /// size of each key's image set.
    size_t live_size() const {
        size_t n = entries_.size();
        for (const auto &[k, e] : entries_) n += e.img.size();
        return n;
    }

    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); next_seq_ = 0; }

    /// Keys in first-insertion order (of the current incarnation of each key).
    template <typename F>
    void for_each_key(F &&f) const {
        std::vector<std::pair<uint64_t, const Value *>> keys;
        keys.reserve(entries_.size());
        for (const auto &[k, e] : entries_) keys.emplace_back(e.seq, &k);
        std::sort(keys.begin(), keys.end(),
                  [](const auto &a, const auto &b) { return a.first < b.first; });
        for (auto &[seq, k] : keys) f(*k);
    }

private:
    struct Entry {
        uint64_t seq;
        CountedSet img;
    };

    Entry &entry(const Value &key) {
        auto it = entries_.find(key);
        if (it == entries_.end())
            it = entries_.emplace(key, Entry{next_seq_++, CountedSet{}}).first;
        return it->second;
    }

    std::unordered_map<Value, Entry, ValueHash>::iterator require(const Value &key) {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw std::logic_error("delete from absent key: " + key.to_string());
        return it;
    }

    bool counted_;
    std::unordered_map<Value, Entry, ValueHash> entries_;
    uint64_t next_seq_ = 0;
};

} // namespace incq

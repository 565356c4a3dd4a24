#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "incq/counted_map.hpp"
#include "incq/value.hpp"

namespace incq {

/// Object store. Plain objects carry partial field maps; set objects carry
/// element sets with reference identity. Iteration order over set elements
/// and fields is insertion order, so runs are reproducible.
class Heap {
public:
    Value new_object() {
        objects_.emplace_back();
        return Value::obj(static_cast<int64_t>(objects_.size()) - 1);
    }

    Value new_set() {
        sets_.emplace_back();
        return Value::set(static_cast<int64_t>(sets_.size()) - 1);
    }

    bool has_field(const Value &obj, const std::string &field) const {
        return obj.is_obj() && object(obj).fields.count(field) != 0;
    }

    std::optional<Value> get_field(const Value &obj, const std::string &field) const {
        if (!obj.is_obj()) return std::nullopt;
        const auto &fm = object(obj).fields;
        auto it = fm.find(field);
        if (it == fm.end()) return std::nullopt;
        return it->second;
    }

    /// Returns the previous value, if any.
    std::optional<Value> set_field(const Value &obj, const std::string &field, const Value &val) {
        auto &rec = object(obj);
        auto it = rec.fields.find(field);
        if (it == rec.fields.end()) {
            rec.fields.emplace(field, val);
            rec.field_order.push_back(field);
            return std::nullopt;
        }
        Value old = it->second;
        it->second = val;
        return old;
    }

    bool set_contains(const Value &set, const Value &elem) const {
        return set.is_set() && set_record(set).contains(elem);
    }

    void set_add(const Value &set, const Value &elem) { set_record(set).add(elem); }
    void set_del(const Value &set, const Value &elem) { set_record(set).del(elem); }

    const CountedSet &set_elems(const Value &set) const { return set_record(set); }

    size_t num_objects() const { return objects_.size(); }
    size_t num_sets() const { return sets_.size(); }

    template <typename F>
    void for_each_field_pair(const std::string &field, F &&f) const {
        for (size_t i = 0; i < objects_.size(); ++i) {
            auto it = objects_[i].fields.find(field);
            if (it != objects_[i].fields.end())
                f(Value::obj(static_cast<int64_t>(i)), it->second);
        }
    }

    template <typename F>
    void for_each_member_pair(F &&f) const {
        for (size_t i = 0; i < sets_.size(); ++i) {
            Value s = Value::set(static_cast<int64_t>(i));
            sets_[i].for_each([&](const Value &x) { f(s, x); });
        }
    }

    /// Field names present on any object, in first-appearance order.
    std::vector<std::string> field_names() const {
        std::vector<std::string> names;
        std::unordered_map<std::string, bool> seen;
        for (const auto &rec : objects_)
            for (const auto &fname : rec.field_order)
                if (rec.fields.count(fname) && !seen[fname]) {
                    seen[fname] = true;
                    names.push_back(fname);
                }
        return names;
    }

private:
    struct ObjectRecord {
        std::unordered_map<std::string, Value> fields;
        std::vector<std::string> field_order;
    };

    const ObjectRecord &object(const Value &v) const { return objects_.at(static_cast<size_t>(v.id())); }
    ObjectRecord &object(const Value &v) { return objects_.at(static_cast<size_t>(v.id())); }
    const CountedSet &set_record(const Value &v) const { return sets_.at(static_cast<size_t>(v.id())); }
    CountedSet &set_record(const Value &v) { return sets_.at(static_cast<size_t>(v.id())); }

    std::vector<ObjectRecord> objects_;
    std::vector<CountedSet> sets_;
};

} // namespace incq

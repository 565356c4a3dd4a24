#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace incq {

/// Runtime value: object/set references (identity semantics), scalars, and
/// immutable fixed-length tuples.
class Value {
public:
    enum class Kind : uint8_t { Obj, Set, Int, Str, Bool, Tuple };

    Value() : kind_(Kind::Int), num_(0) {}

    static Value obj(int64_t id) { return Value(Kind::Obj, id); }
    static Value set(int64_t id) { return Value(Kind::Set, id); }
    static Value integer(int64_t v) { return Value(Kind::Int, v); }
    static Value boolean(bool b) { return Value(Kind::Bool, b ? 1 : 0); }
    static Value str(std::string s);
    static Value tuple(std::vector<Value> elems);

    Kind kind() const { return kind_; }
    bool is_ref() const { return kind_ == Kind::Obj || kind_ == Kind::Set; }
    bool is_obj() const { return kind_ == Kind::Obj; }
    bool is_set() const { return kind_ == Kind::Set; }
    bool is_int() const { return kind_ == Kind::Int; }
    bool is_bool() const { return kind_ == Kind::Bool; }
    bool is_str() const { return kind_ == Kind::Str; }
    bool is_tuple() const { return kind_ == Kind::Tuple; }

    int64_t id() const { return num_; }
    int64_t as_int() const { return num_; }
    bool as_bool() const { return num_ != 0; }
    const std::string &as_str() const { return str_; }
    const std::vector<Value> &elems() const { return elems_; }

    bool operator==(const Value &o) const;
    bool operator!=(const Value &o) const { return !(*this == o); }
    /// Total order across all kinds (kind tag first); used for canonical
    /// result-set ordering only, not exposed to query expressions.
    bool operator<(const Value &o) const;

    size_t hash() const;
    std::string to_string() const;

private:
    Value(Kind k, int64_t n) : kind_(k), num_(n) {}

    Kind kind_;
    int64_t num_ = 0;
    std::string str_;
    std::vector<Value> elems_;
};

struct ValueHash {
    size_t operator()(const Value &v) const { return v.hash(); }
};

using ValueVec = std::vector<Value>;

/// Packs a tuple of values into a single map key. Single components are kept
/// unwrapped so unary keys hash like plain values.
Value pack_key(const ValueVec &parts);

std::string to_string(const ValueVec &vs);

} // namespace incq

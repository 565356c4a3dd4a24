#include "incq/value.hpp"

#include <sstream>

namespace incq {

Value Value::str(std::string s) {
    Value v(Kind::Str, 0);
    v.str_ = std::move(s);
    return v;
}

Value Value::tuple(std::vector<Value> elems) {
    Value v(Kind::Tuple, 0);
    v.elems_ = std::move(elems);
    return v;
}

bool Value::operator==(const Value &o) const {
    if (kind_ != o.kind_) {
        // Object and set references live in separate id spaces but are both
        // references; they are simply never the same object.
        return false;
    }
    switch (kind_) {
        case Kind::Obj:
        case Kind::Set:
        case Kind::Int:
        case Kind::Bool: return num_ == o.num_;
        case Kind::Str: return str_ == o.str_;
        case Kind::Tuple: return elems_ == o.elems_;
    }
    return false;
}

bool Value::operator<(const Value &o) const {
    if (kind_ != o.kind_) return static_cast<int>(kind_) < static_cast<int>(o.kind_);
    switch (kind_) {
        case Kind::Obj:
        case Kind::Set:
        case Kind::Int:
        case Kind::Bool: return num_ < o.num_;
        case Kind::Str: return str_ < o.str_;
        case Kind::Tuple: return elems_ < o.elems_;
    }
    return false;
}

size_t Value::hash() const {
    size_t h = 0xcbf29ce484222325ull ^ static_cast<size_t>(kind_);
    auto mix = [&h](size_t x) {
        h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    switch (kind_) {
        case Kind::Obj:
        case Kind::Set:
        case Kind::Int:
        case Kind::Bool: mix(static_cast<size_t>(num_)); break;
        case Kind::Str: mix(std::hash<std::string>{}(str_)); break;
        case Kind::Tuple:
            for (const Value &e : elems_) mix(e.hash());
            break;
    }
    return h;
}

std::string Value::to_string() const {
    switch (kind_) {
        case Kind::Obj: return "obj#" + std::to_string(num_);
        case Kind::Set: return "set#" + std::to_string(num_);
        case Kind::Int: return std::to_string(num_);
        case Kind::Bool: return num_ ? "true" : "false";
        case Kind::Str: {
            std::ostringstream os;
            os << '"' << str_ << '"';
            return os.str();
        }
        case Kind::Tuple: {
            std::string s = "(";
            for (size_t i = 0; i < elems_.size(); ++i) {
                if (i) s += ", ";
                s += elems_[i].to_string();
            }
            s += ")";
            return s;
        }
    }
    return "?";
}

Value pack_key(const ValueVec &parts) {
    if (parts.size() == 1) return parts[0];
    return Value::tuple(parts);
}

std::string to_string(const ValueVec &vs) {
    std::string s = "(";
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) s += ", ";
        s += vs[i].to_string();
    }
    return s + ")";
}

} // namespace incq

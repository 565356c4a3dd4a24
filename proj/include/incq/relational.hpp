#pragma once

#include <map>
#include <string>
#include <vector>

#include "incq/ast.hpp"

namespace incq {

/// Identity of a relation as used in clauses, plans, and stores.
/// F_f relates an object with its field value: (o,x) in F_f  <=>  x = o.f.
/// M relates each set with each member:       (s,x) in M    <=>  x in s.
/// U is the demand set over (dp1,...,dpj).
/// Inversion and demand-filtering (S(.)) are orthogonal markers on top of a
/// base field/member relation; the occurrence suffix distinguishes repeated
/// uses of the same relation within one query.
struct RelId {
    enum class Kind { Field, Member, Demand, Result, Tag };

    Kind kind = Kind::Member;
    std::string name;   // field name (Field), query name (Demand/Result), variable (Tag)
    int occurrence = 0; // 1-based for Field/Member clauses
    bool inverse = false;
    bool filtered = false;

    static RelId field(std::string f, int occ = 0) {
        RelId r;
        r.kind = Kind::Field;
        r.name = std::move(f);
        r.occurrence = occ;
        return r;
    }
    static RelId member(int occ = 0) {
        RelId r;
        r.kind = Kind::Member;
        r.occurrence = occ;
        return r;
    }
    static RelId demand(std::string q) {
        RelId r;
        r.kind = Kind::Demand;
        r.name = std::move(q);
        return r;
    }
    static RelId result(std::string q) {
        RelId r;
        r.kind = Kind::Result;
        r.name = std::move(q);
        return r;
    }
    static RelId tag(std::string var) {
        RelId r;
        r.kind = Kind::Tag;
        r.name = std::move(var);
        return r;
    }

    RelId inverted() const {
        RelId r = *this;
        r.inverse = !r.inverse;
        return r;
    }

    RelId with_filter() const {
        RelId r = *this;
        r.filtered = true;
        return r;
    }

    /// Physical relation identity, as updates refer to it (no occurrence,
    /// inversion, or filtering).
    bool same_base(const RelId &o) const { return kind == o.kind && name == o.name; }

    bool operator==(const RelId &o) const {
        return kind == o.kind && name == o.name && occurrence == o.occurrence &&
               inverse == o.inverse && filtered == o.filtered;
    }
    bool operator!=(const RelId &o) const { return !(*this == o); }
    bool operator<(const RelId &o) const {
        if (kind != o.kind) return kind < o.kind;
        if (name != o.name) return name < o.name;
        if (occurrence != o.occurrence) return occurrence < o.occurrence;
        if (inverse != o.inverse) return inverse < o.inverse;
        return filtered < o.filtered;
    }

    /// Display name in standard notation, e.g. F_loc, M_2, M^-1, S(M^-1)_2,
    /// U, r, T_user.
    std::string to_string() const;
    /// Name without the occurrence suffix (F_loc, M, U, ...).
    std::string base_name() const;
};

/// (x1,...,xn) in R with R a relation identifier only; no selectors remain
/// after lowering.
struct RelClause {
    std::vector<std::string> lhs;
    RelId rel;

    std::string to_string() const;
};

struct RelationalQuery {
    std::string name;
    std::vector<std::string> params;
    std::vector<std::string> demand_params;
    std::vector<RelClause> rel_clauses;   // U clause first when demand_params nonempty
    std::vector<ExprPtr> conditions;      // over variables only
    ExprPtr result;                       // over variables only
    std::map<std::string, std::string> fresh_vars; // selector occurrence -> introduced variable

    bool has_demand_clause() const { return !demand_params.empty(); }
    std::string to_string() const;
};

struct RelUpdate {
    bool is_add = true;
    RelId rel;   // Field(f), Member, or Demand(q)
    ValueVec tuple;

    std::string to_string() const;
};

/// Phase 1 on queries: rewrites field selections to fresh variables with F_f
/// clauses and memberships to M clauses, prepends the demand clause, and
/// unifies variables equated by `v == w` conditions (keeping parameters and
/// original query variables over fresh ones).
RelationalQuery lower_query(const QuerySpec &q);

} // namespace incq

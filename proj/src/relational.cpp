#include "incq/relational.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace incq {

std::string RelId::base_name() const {
    std::string core;
    switch (kind) {
        case Kind::Field: core = "F_" + name; break;
        case Kind::Member: core = "M"; break;
        case Kind::Demand: core = "U"; break;
        case Kind::Result: core = "r"; break;
        case Kind::Tag: return "T_" + name;
    }
    if (inverse) core += "^-1";
    if (filtered) core = "S(" + core + ")";
    return core;
}

std::string RelId::to_string() const {
    std::string s = base_name();
    // Single-occurrence relations keep their plain name, and a raw inverse is
    // one physical map shared by every occurrence.
    if (occurrence > 0 && (kind == Kind::Field || kind == Kind::Member) &&
        !(inverse && !filtered))
        s += "_" + std::to_string(occurrence);
    return s;
}

std::string RelClause::to_string() const {
    std::string s = "(";
    for (size_t i = 0; i < lhs.size(); ++i) {
        if (i) s += ",";
        s += lhs[i];
    }
    s += ") in " + rel.to_string();
    return s;
}

std::string RelationalQuery::to_string() const {
    std::ostringstream os;
    os << "{" << expr_to_string(result) << " : ";
    bool first = true;
    for (const auto &c : rel_clauses) {
        if (!first) os << ", ";
        first = false;
        os << c.to_string();
    }
    for (const auto &c : conditions) {
        if (!first) os << ", ";
        first = false;
        os << expr_to_string(c);
    }
    os << "}";
    return os.str();
}

std::string RelUpdate::to_string() const {
    return rel.to_string() + (is_add ? " += " : " -= ") + "{" + incq::to_string(tuple) + "}";
}

namespace {

/// Rewrites an expression, replacing every field selection rooted at a
/// variable with the fresh variable registered for it.
class SelectorLowering {
public:
    SelectorLowering(RelationalQuery &rq, int &counter) : rq_(rq), counter_(counter) {}

    /// Returns the variable standing for the selector chain root.f1...fk,
    /// introducing F_f clauses as needed.
    std::string lower_chain(const std::string &root, const std::vector<std::string> &fields) {
        std::string cur = root;
        for (const auto &f : fields) cur = lower_one(cur, f);
        return cur;
    }

    ExprPtr lower_expr(const ExprPtr &e) {
        if (!e) return e;
        if (e->kind == Expr::Kind::FieldSel) {
            // Collapse the chain to its root variable, then introduce one
            // fresh variable per selection, left to right.
            std::vector<std::string> fields;
            const Expr *cur = e.get();
            while (cur->kind == Expr::Kind::FieldSel) {
                fields.push_back(cur->name);
                cur = cur->children[0].get();
            }
            if (cur->kind != Expr::Kind::Var)
                throw std::logic_error("selector not rooted at a variable: " + expr_to_string(e));
            std::reverse(fields.begin(), fields.end());
            return Expr::var(lower_chain(cur->name, fields), e->pos);
        }
        if (e->children.empty()) return e;
        Expr copy = *e;
        for (auto &c : copy.children) c = lower_expr(c);
        return std::make_shared<const Expr>(std::move(copy));
    }

private:
    std::string lower_one(const std::string &obj, const std::string &field) {
        std::string key = obj + "." + field;
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::string fresh = obj + "__" + field + "__" + std::to_string(++counter_);
        memo_.emplace(key, fresh);
        rq_.fresh_vars.emplace(key, fresh);
        rq_.rel_clauses.push_back({{obj, fresh}, RelId::field(field)});
        return fresh;
    }

    RelationalQuery &rq_;
    int &counter_;
    std::unordered_map<std::string, std::string> memo_;
};

ExprPtr substitute_vars(const ExprPtr &e, const std::unordered_map<std::string, std::string> &sub) {
    if (!e) return e;
    if (e->kind == Expr::Kind::Var) {
        auto it = sub.find(e->name);
        return it == sub.end() ? e : Expr::var(it->second, e->pos);
    }
    if (e->children.empty()) return e;
    Expr copy = *e;
    for (auto &c : copy.children) c = substitute_vars(c, sub);
    return std::make_shared<const Expr>(std::move(copy));
}

/// Union-find keyed by variable name, preferring parameters, then original
/// query variables, then fresh variables as class representatives.
class VarUnifier {
public:
    VarUnifier(const std::vector<std::string> &params, const RelationalQuery &rq) {
        for (const auto &p : params) rank_[p] = 2;
        for (const auto &[sel, fresh] : rq.fresh_vars) rank_.emplace(fresh, 0);
    }

    const std::string &find(const std::string &v) {
        auto it = parent_.find(v);
        if (it == parent_.end() || it->second == v) return v;
        const std::string &root = find(it->second);
        it->second = root;
        return root;
    }

    /// Unifies unless both representatives are parameters.
    bool unify(const std::string &a, const std::string &b) {
        std::string ra = find(a), rb = find(b);
        if (ra == rb) return true;
        int qa = rank(ra), qb = rank(rb);
        if (qa == 2 && qb == 2) return false;
        if (qa < qb) std::swap(ra, rb);
        parent_[rb] = ra; // keep the higher-ranked name
        parent_.emplace(ra, ra);
        return true;
    }

    std::unordered_map<std::string, std::string> substitution() {
        std::unordered_map<std::string, std::string> sub;
        for (const auto &[v, p] : parent_) {
            const std::string &r = find(v);
            if (r != v) sub.emplace(v, r);
        }
        return sub;
    }

private:
    int rank(const std::string &v) const {
        auto it = rank_.find(v);
        return it == rank_.end() ? 1 : it->second;
    }

    std::unordered_map<std::string, std::string> parent_;
    std::unordered_map<std::string, int> rank_;
};

} // namespace

RelationalQuery lower_query(const QuerySpec &q) {
    RelationalQuery rq;
    rq.name = q.name;
    rq.params = q.params;
    rq.demand_params = q.demand_params;

    int counter = 0;
    SelectorLowering sel(rq, counter);

    // Result expression first, then clauses in written order; this yields the
    // clause order U, <result F-clauses>, then per-clause rewrites.
    ExprPtr result = sel.lower_expr(q.result);
    for (const auto &c : q.clauses) {
        if (c.kind == Clause::Kind::Membership) {
            std::string set_var = sel.lower_chain(c.selector.root, c.selector.fields);
            rq.rel_clauses.push_back({{set_var, c.var}, RelId::member()});
        } else {
            rq.conditions.push_back(sel.lower_expr(c.cond));
        }
    }
    rq.result = result;

    // Unify variables equated by plain `v == w` conditions so that equality
    // joins become membership tests instead of scans.
    VarUnifier uf(q.params, rq);
    std::vector<ExprPtr> conds;
    for (const auto &c : rq.conditions) {
        if (c->kind == Expr::Kind::Cmp && c->name == "==" &&
            c->children[0]->kind == Expr::Kind::Var && c->children[1]->kind == Expr::Kind::Var &&
            uf.unify(c->children[0]->name, c->children[1]->name))
            continue;
        conds.push_back(c);
    }
    auto sub = uf.substitution();
    if (!sub.empty()) {
        for (auto &cl : rq.rel_clauses)
            for (auto &v : cl.lhs) {
                auto it = sub.find(v);
                if (it != sub.end()) v = it->second;
            }
        for (auto &c : conds) c = substitute_vars(c, sub);
        rq.result = substitute_vars(rq.result, sub);
        for (auto &[k, v] : rq.fresh_vars) {
            auto it = sub.find(v);
            if (it != sub.end()) v = it->second;
        }
    }
    rq.conditions = std::move(conds);

    // Clause lists are sets: identical clauses (possibly created by
    // unification) collapse to one.
    std::vector<RelClause> dedup;
    for (auto &cl : rq.rel_clauses) {
        bool dup = false;
        for (const auto &d : dedup)
            if (d.lhs == cl.lhs && d.rel.kind == cl.rel.kind && d.rel.name == cl.rel.name)
                dup = true;
        if (!dup) dedup.push_back(std::move(cl));
    }
    rq.rel_clauses = std::move(dedup);

    // Demand clause (dp1,...,dpj) in U, placed first as in the relational
    // form of the running example.
    if (!q.demand_params.empty()) {
        RelClause u{q.demand_params, RelId::demand(q.name)};
        rq.rel_clauses.insert(rq.rel_clauses.begin(), std::move(u));
    }

    // Occurrence suffixes, assigned in clause order per base relation.
    std::map<std::string, int> occ_count;
    for (auto &cl : rq.rel_clauses)
        if (cl.rel.kind == RelId::Kind::Field || cl.rel.kind == RelId::Kind::Member)
            occ_count[cl.rel.base_name()]++;
    std::map<std::string, int> occ_next;
    for (auto &cl : rq.rel_clauses) {
        if (cl.rel.kind != RelId::Kind::Field && cl.rel.kind != RelId::Kind::Member) continue;
        std::string base = cl.rel.base_name();
        if (occ_count[base] > 1) cl.rel.occurrence = ++occ_next[base];
    }
    return rq;
}

} // namespace incq

#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "dualize/algebra.hpp"

namespace dualize {

// ---------------------------------------------------------------------------
// Terms over a (partial operation, relation) signature
// ---------------------------------------------------------------------------

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    // Either a variable index or an application symbol(args...).
    int var = -1;
    std::string symbol;
    std::vector<TermPtr> args;

    bool is_var() const { return var >= 0; }

    static TermPtr mk_var(int index) {
        Term t;
        t.var = index;
        return std::make_shared<const Term>(std::move(t));
    }
    static TermPtr mk_app(std::string symbol, std::vector<TermPtr> args) {
        Term t;
        t.symbol = std::move(symbol);
        t.args = std::move(args);
        return std::make_shared<const Term>(std::move(t));
    }
};

inline bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (a->is_var() || b->is_var()) return a->var == b->var;
    if (a->symbol != b->symbol || a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!term_equal(a->args[i], b->args[i])) return false;
    return true;
}

// Renames variables through `map`; indices beyond the map are left alone.
inline TermPtr term_substitute(const TermPtr& t, const std::vector<int>& map) {
    if (t->is_var()) {
        int v = t->var;
        if (v < static_cast<int>(map.size())) v = map[static_cast<std::size_t>(v)];
        return Term::mk_var(v);
    }
    std::vector<TermPtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(term_substitute(a, map));
    return Term::mk_app(t->symbol, std::move(args));
}

inline void term_collect_vars(const TermPtr& t, std::vector<bool>& used) {
    if (t->is_var()) {
        if (t->var >= static_cast<int>(used.size())) used.resize(t->var + 1, false);
        used[static_cast<std::size_t>(t->var)] = true;
        return;
    }
    for (const auto& a : t->args) term_collect_vars(a, used);
}

// Strict evaluation: undefined propagates, an application outside its
// domain is undefined.
inline std::optional<Elem> term_eval(const TermPtr& t, const FiniteStructure& x,
                                     const std::vector<Elem>& assignment) {
    if (t->is_var()) return assignment[static_cast<std::size_t>(t->var)];
    const PartialOperation* h = x.find_op(t->symbol);
    if (!h) throw InputError("unknown operation symbol '" + t->symbol + "'");
    if (static_cast<int>(t->args.size()) != h->arity)
        throw InputError("arity mismatch for operation '" + t->symbol + "'");
    Tuple vals(t->args.size());
    for (std::size_t i = 0; i < t->args.size(); ++i) {
        auto v = term_eval(t->args[i], x, assignment);
        if (!v) return std::nullopt;
        vals[i] = *v;
    }
    return h->apply(vals);
}

// ---------------------------------------------------------------------------
// Atomic formulas
// ---------------------------------------------------------------------------

struct RelAtom {
    std::string symbol;
    std::vector<TermPtr> args;
};

struct EqAtom {
    TermPtr lhs, rhs;
};

struct Falsum {};

using Atom = std::variant<RelAtom, EqAtom, Falsum>;

// An atom containing an application outside its domain is false.
inline bool atom_holds(const Atom& atom, const FiniteStructure& x,
                       const std::vector<Elem>& assignment) {
    if (std::holds_alternative<Falsum>(atom)) return false;
    if (const auto* ra = std::get_if<RelAtom>(&atom)) {
        const Relation* r = x.find_rel(ra->symbol);
        if (!r) throw InputError("unknown relation symbol '" + ra->symbol + "'");
        if (static_cast<int>(ra->args.size()) != r->arity)
            throw InputError("arity mismatch for relation '" + ra->symbol + "'");
        Tuple vals(ra->args.size());
        for (std::size_t i = 0; i < ra->args.size(); ++i) {
            auto v = term_eval(ra->args[i], x, assignment);
            if (!v) return false;
            vals[i] = *v;
        }
        return r->contains(vals);
    }
    const auto& eq = std::get<EqAtom>(atom);
    auto l = term_eval(eq.lhs, x, assignment);
    if (!l) return false;
    auto r = term_eval(eq.rhs, x, assignment);
    return r && *l == *r;
}

inline Atom atom_substitute(const Atom& atom, const std::vector<int>& map) {
    if (std::holds_alternative<Falsum>(atom)) return atom;
    if (const auto* ra = std::get_if<RelAtom>(&atom)) {
        RelAtom out;
        out.symbol = ra->symbol;
        for (const auto& a : ra->args) out.args.push_back(term_substitute(a, map));
        return out;
    }
    const auto& eq = std::get<EqAtom>(atom);
    return EqAtom{term_substitute(eq.lhs, map), term_substitute(eq.rhs, map)};
}

inline void atom_collect_vars(const Atom& atom, std::vector<bool>& used) {
    if (const auto* ra = std::get_if<RelAtom>(&atom)) {
        for (const auto& a : ra->args) term_collect_vars(a, used);
    } else if (const auto* eq = std::get_if<EqAtom>(&atom)) {
        term_collect_vars(eq->lhs, used);
        term_collect_vars(eq->rhs, used);
    }
}

inline bool atom_equal(const Atom& a, const Atom& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<Falsum>(a)) return true;
    if (const auto* ra = std::get_if<RelAtom>(&a)) {
        const auto& rb = std::get<RelAtom>(b);
        if (ra->symbol != rb.symbol || ra->args.size() != rb.args.size()) return false;
        for (std::size_t i = 0; i < ra->args.size(); ++i)
            if (!term_equal(ra->args[i], rb.args[i])) return false;
        return true;
    }
    const auto& ea = std::get<EqAtom>(a);
    const auto& eb = std::get<EqAtom>(b);
    return term_equal(ea.lhs, eb.lhs) && term_equal(ea.rhs, eb.rhs);
}

// ---------------------------------------------------------------------------
// Conjunct-atomic formulas
// ---------------------------------------------------------------------------

struct ConjunctAtomicFormula {
    int nvars = 0;
    std::vector<Atom> conjuncts;

    bool holds(const FiniteStructure& x, const std::vector<Elem>& assignment) const {
        for (const auto& a : conjuncts)
            if (!atom_holds(a, x, assignment)) return false;
        return true;
    }

    // The solution set in x, as an nvars-ary relation.
    Relation solution_set(const FiniteStructure& x) const {
        Relation out;
        out.carrier = x.carrier;
        out.arity = nvars;
        std::vector<Elem> assignment;
        for_each_tuple(x.size(), nvars, [&](const Tuple& t) {
            assignment.assign(t.begin(), t.end());
            if (holds(x, assignment)) out.tuples.push_back(t);
        });
        return out;
    }

    // Renames the formula's variables: variable i becomes map[i]. The result
    // has new_nvars variables.
    ConjunctAtomicFormula substituted(const std::vector<int>& map, int new_nvars) const {
        ConjunctAtomicFormula out;
        out.nvars = new_nvars;
        for (const auto& a : conjuncts) out.conjuncts.push_back(atom_substitute(a, map));
        return out;
    }
};

// A primitive-positive formula: exists (the last n_exist variables) . body.
struct PPFormula {
    int nvars = 0;    // free variables
    int n_exist = 0;  // trailing existential block
    ConjunctAtomicFormula body;  // over nvars + n_exist variables

    bool holds(const FiniteStructure& x, const std::vector<Elem>& assignment) const {
        std::vector<Elem> full(assignment.begin(), assignment.end());
        full.resize(static_cast<std::size_t>(nvars + n_exist));
        bool found = false;
        std::function<void(int)> rec = [&](int pos) {
            if (found) return;
            if (pos == nvars + n_exist) {
                if (body.holds(x, full)) found = true;
                return;
            }
            for (std::size_t v = 0; v < x.size(); ++v) {
                full[static_cast<std::size_t>(pos)] = static_cast<Elem>(v);
                rec(pos + 1);
                if (found) return;
            }
        };
        rec(nvars);
        return found;
    }

    Relation solution_set(const FiniteStructure& x) const {
        Relation out;
        out.carrier = x.carrier;
        out.arity = nvars;
        Relation body_sol = body.solution_set(x);
        for (const auto& t : body_sol.tuples)
            out.tuples.push_back(Tuple(t.begin(), t.begin() + nvars));
        out.canonicalize();
        return out;
    }
};

// ---------------------------------------------------------------------------
// Printing (DSL syntax)
// ---------------------------------------------------------------------------

inline std::string default_var_name(int i) {
    static const char* base[] = {"u", "v", "w", "x", "y", "z"};
    if (i < 6) return base[i];
    return "w" + std::to_string(i - 5);
}

inline std::string term_to_string(const TermPtr& t,
                                  const std::vector<std::string>& var_names) {
    if (t->is_var()) {
        if (t->var < static_cast<int>(var_names.size()))
            return var_names[static_cast<std::size_t>(t->var)];
        return default_var_name(t->var);
    }
    std::string s = t->symbol + "(";
    for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) s += ",";
        s += term_to_string(t->args[i], var_names);
    }
    return s + ")";
}

inline std::string atom_to_string(const Atom& a, const std::vector<std::string>& var_names) {
    if (std::holds_alternative<Falsum>(a)) return "false";
    if (const auto* ra = std::get_if<RelAtom>(&a)) {
        std::string s = ra->symbol + "(";
        for (std::size_t i = 0; i < ra->args.size(); ++i) {
            if (i) s += ",";
            s += term_to_string(ra->args[i], var_names);
        }
        return s + ")";
    }
    const auto& eq = std::get<EqAtom>(a);
    return term_to_string(eq.lhs, var_names) + "=" + term_to_string(eq.rhs, var_names);
}

inline std::string formula_to_string(const ConjunctAtomicFormula& f,
                                     const std::vector<std::string>& var_names = {}) {
    if (f.conjuncts.empty()) return "true";
    std::string s;
    for (std::size_t i = 0; i < f.conjuncts.size(); ++i) {
        if (i) s += " & ";
        s += atom_to_string(f.conjuncts[i], var_names);
    }
    return s;
}

}  // namespace dualize

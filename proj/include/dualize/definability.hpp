#pragma once

#include "dualize/clone.hpp"

namespace dualize {

// ---------------------------------------------------------------------------
// Hom-minimality
// ---------------------------------------------------------------------------

// True iff every homomorphism r -> M is the restriction of a coordinate
// projection.
inline bool is_hom_minimal(const FiniteAlgebra& alg, const Relation& r) {
    if (r.empty()) throw InputError("is_hom_minimal: undefined on empty relations");
    std::vector<std::vector<Elem>> columns;
    for (int i = 0; i < r.arity; ++i) columns.push_back(r.column(i));
    for (const auto& h : hom_set(alg, r)) {
        bool is_projection = false;
        for (const auto& col : columns)
            if (h.values == col) { is_projection = true; break; }
        if (!is_projection) return false;
    }
    return true;
}

// All non-empty hom-minimal subuniverses r <= M^k for 1 <= k <= max_arity.
inline std::vector<Relation> hom_minimal_relations(const FiniteAlgebra& alg, int max_arity) {
    if (max_arity < 1) throw InputError("hom_minimal_relations: max_arity must be >= 1");
    std::vector<Relation> out;
    for (int k = 1; k <= max_arity; ++k) {
        for (auto& sub : all_subuniverses(alg, k)) {
            if (sub.empty()) continue;
            if (is_hom_minimal(alg, sub)) out.push_back(std::move(sub));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hat relations
// ---------------------------------------------------------------------------

// The (n+m)-ary relation {(a, f_1(a), ..., f_m(a)) : a in r}, with
// f_1, ..., f_m the canonical enumeration of hom_set(M, r).
inline Relation hat_relation(const FiniteAlgebra& alg, const Relation& r) {
    if (r.empty()) throw InputError("hat_relation: empty relation");
    auto homs = hom_set(alg, r);
    Relation hat;
    hat.name = r.name.empty() ? "" : "hat " + r.name;
    hat.carrier = r.carrier;
    hat.arity = r.arity + static_cast<int>(homs.size());
    hat.tuples.reserve(r.size());
    for (std::size_t i = 0; i < r.tuples.size(); ++i) {
        Tuple t = r.tuples[i];
        for (const auto& h : homs) t.push_back(h.values[i]);
        hat.tuples.push_back(std::move(t));
    }
    hat.canonicalize();
    return hat;
}

// ---------------------------------------------------------------------------
// Conjunct-atomic definability
// ---------------------------------------------------------------------------
//
// A relation is conjunct-atomic definable from an ego iff it equals the
// intersection of the solution sets of all atomic formulas (over the ego's
// signature, with arbitrary terms) that hold on it. Terms in n variables
// correspond exactly to the n-ary members of clo(E), so the check
// materialises the bounded clone fragment. Two exact reductions keep the
// working arity small: duplicate columns, and columns recoverable as a clone
// term of few other columns.

struct CadefOptions {
    CloneOptions clone;
    int elimination_max_vars = 3;  // term size tried during column elimination
};

namespace detail {

struct SeparationAtom {
    enum Kind { Definedness, Equation, RelationImage } kind = Definedness;
    std::size_t member_a = 0;              // Definedness / Equation
    std::size_t member_b = 0;              // Equation
    std::size_t rel_index = 0;             // RelationImage
    std::vector<std::size_t> arg_members;  // RelationImage
};

// Decides r in cadef(E) for a relation with pairwise-distinct columns at its
// own arity, and (on success) emits a small certificate over variables
// 0..arity-1 whose solution set is exactly r.
inline std::optional<std::vector<Atom>> cadef_core_check(CloneCache& cache, const Relation& r) {
    const AlterEgo& ego = cache.ego();
    const std::size_t m = ego.base.size();
    const int k = r.arity;
    const PartialClone& clone = cache.at(k);

    std::vector<std::size_t> r_cells;
    r_cells.reserve(r.size());
    for (const auto& t : r.tuples) r_cells.push_back(encode_tuple(t, m));

    // Members defined on all of r, grouped by their restriction to r.
    std::map<std::vector<std::int16_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < clone.members.size(); ++i) {
        std::vector<std::int16_t> restriction;
        restriction.reserve(r_cells.size());
        bool ok = true;
        for (std::size_t cell : r_cells) {
            std::int16_t v = clone.members[i].table[cell];
            if (v < 0) { ok = false; break; }
            restriction.push_back(v);
        }
        if (ok) groups[std::move(restriction)].push_back(i);
    }
    std::vector<const std::vector<std::size_t>*> group_list;
    for (const auto& [restr, ms] : groups) group_list.push_back(&ms);

    // Ego relations usable in atoms: those whose row-wise argument tuples can
    // be matched by group restrictions.
    struct RelInfo {
        const Relation* rel;
        std::size_t index;
    };
    std::vector<RelInfo> rel_infos;
    for (std::size_t i = 0; i < ego.r.size(); ++i) rel_infos.push_back({&ego.r[i], i});

    auto group_value_at = [&](const std::vector<std::size_t>& members, std::size_t cell)
        -> std::optional<std::int16_t> {
        // Groups reaching the relation phase have a unique defined value at
        // the probe cell (otherwise an equation/definedness atom separates).
        return clone.members[members.front()].table[cell] >= 0
                   ? std::optional<std::int16_t>(clone.members[members.front()].table[cell])
                   : std::nullopt;
    };

    auto separate = [&](std::size_t cell) -> std::optional<SeparationAtom> {
        // Definedness and equation atoms first.
        for (const auto* members : group_list) {
            std::optional<std::int16_t> value;
            std::size_t value_member = 0;
            for (std::size_t mi : *members) {
                std::int16_t v = clone.members[mi].table[cell];
                if (v < 0) return SeparationAtom{SeparationAtom::Definedness, mi, 0, 0, {}};
                if (!value) {
                    value = v;
                    value_member = mi;
                } else if (*value != v) {
                    return SeparationAtom{SeparationAtom::Equation, value_member, mi, 0, {}};
                }
            }
        }
        // Relation atoms: find argument terms (one group per position) whose
        // restriction columns lie row-wise in the relation but whose values at
        // the probe cell do not.
        for (const auto& info : rel_infos) {
            const Relation& r0 = *info.rel;
            const int j = r0.arity;
            std::vector<std::size_t> choice(static_cast<std::size_t>(j), 0);
            std::vector<const std::vector<std::size_t>*> chosen(static_cast<std::size_t>(j));
            // DFS with row-wise prefix feasibility against r0.
            std::function<std::optional<SeparationAtom>(int)> dfs =
                [&](int pos) -> std::optional<SeparationAtom> {
                if (pos == j) {
                    Tuple probe(static_cast<std::size_t>(j));
                    for (int p = 0; p < j; ++p) {
                        auto v = group_value_at(*chosen[static_cast<std::size_t>(p)], cell);
                        if (!v) return std::nullopt;  // handled by definedness pass
                        probe[static_cast<std::size_t>(p)] = static_cast<Elem>(*v);
                    }
                    if (!r0.contains(probe)) {
                        SeparationAtom atom;
                        atom.kind = SeparationAtom::RelationImage;
                        atom.rel_index = info.index;
                        for (int p = 0; p < j; ++p)
                            atom.arg_members.push_back(chosen[static_cast<std::size_t>(p)]->front());
                        return atom;
                    }
                    return std::nullopt;
                }
                for (const auto* members : group_list) {
                    chosen[static_cast<std::size_t>(pos)] = members;
                    // Prefix feasibility: every row's prefix must extend to a
                    // tuple of r0.
                    bool feasible = true;
                    for (std::size_t row = 0; row < r_cells.size() && feasible; ++row) {
                        Tuple prefix(static_cast<std::size_t>(pos) + 1);
                        for (int p = 0; p <= pos; ++p) {
                            const auto& ms = *chosen[static_cast<std::size_t>(p)];
                            std::int16_t v = clone.members[ms.front()].table[r_cells[row]];
                            // Restriction values: recompute from the group key
                            // via any member; all agree on r by construction.
                            (void)v;
                            prefix[static_cast<std::size_t>(p)] = static_cast<Elem>(
                                clone.members[ms.front()].table[r_cells[row]]);
                        }
                        auto lo = std::lower_bound(
                            r0.tuples.begin(), r0.tuples.end(), prefix,
                            [&](const Tuple& t, const Tuple& p) {
                                return std::lexicographical_compare(
                                    t.begin(), t.begin() + static_cast<long>(p.size()), p.begin(),
                                    p.end());
                            });
                        if (lo == r0.tuples.end() ||
                            !std::equal(prefix.begin(), prefix.end(), lo->begin()))
                            feasible = false;
                    }
                    if (!feasible) continue;
                    if (auto found = dfs(pos + 1)) return found;
                }
                return std::nullopt;
            };
            if (auto found = dfs(0)) return found;
        }
        return std::nullopt;
    };

    auto atom_false_at = [&](const SeparationAtom& a, std::size_t cell) {
        switch (a.kind) {
            case SeparationAtom::Definedness:
                return clone.members[a.member_a].table[cell] < 0;
            case SeparationAtom::Equation: {
                std::int16_t x = clone.members[a.member_a].table[cell];
                std::int16_t y = clone.members[a.member_b].table[cell];
                return x < 0 || y < 0 || x != y;
            }
            case SeparationAtom::RelationImage: {
                Tuple probe;
                for (std::size_t mi : a.arg_members) {
                    std::int16_t v = clone.members[mi].table[cell];
                    if (v < 0) return true;
                    probe.push_back(static_cast<Elem>(v));
                }
                return !ego.r[a.rel_index].contains(probe);
            }
        }
        return false;
    };

    std::vector<SeparationAtom> certificate;
    bool definable = true;
    std::size_t cell = 0;
    std::vector<std::size_t> r_cell_sorted = r_cells;
    std::sort(r_cell_sorted.begin(), r_cell_sorted.end());
    for_each_tuple(m, k, [&](const Tuple&) {
        std::size_t this_cell = cell++;
        if (!definable) return;
        if (std::binary_search(r_cell_sorted.begin(), r_cell_sorted.end(), this_cell)) return;
        for (const auto& a : certificate)
            if (atom_false_at(a, this_cell)) return;
        if (auto atom = separate(this_cell))
            certificate.push_back(*atom);
        else
            definable = false;
    });
    if (!definable) return std::nullopt;

    std::vector<Atom> atoms;
    for (const auto& a : certificate) {
        switch (a.kind) {
            case SeparationAtom::Definedness: {
                TermPtr t = clone.members[a.member_a].provenance;
                atoms.push_back(EqAtom{t, t});
                break;
            }
            case SeparationAtom::Equation:
                atoms.push_back(EqAtom{clone.members[a.member_a].provenance,
                                       clone.members[a.member_b].provenance});
                break;
            case SeparationAtom::RelationImage: {
                RelAtom ra;
                ra.symbol = ego.r[a.rel_index].name;
                for (std::size_t mi : a.arg_members) ra.args.push_back(clone.members[mi].provenance);
                atoms.push_back(std::move(ra));
                break;
            }
        }
    }
    return atoms;
}

// Searches for a clone term over a few of the other columns that reproduces
// column `col` on every tuple of r. Returns the term over r's variable
// indices.
inline std::optional<TermPtr> recover_column(CloneCache& cache, const Relation& r, int col,
                                             const CadefOptions& opts) {
    const std::size_t m = cache.ego().base.size();
    std::vector<Elem> target = r.column(col);
    std::vector<int> others;
    for (int i = 0; i < r.arity; ++i)
        if (i != col) others.push_back(i);
    int max_vars = std::min<int>(opts.elimination_max_vars, static_cast<int>(others.size()));
    for (int nv = 1; nv <= max_vars; ++nv) {
        // All nv-subsets of the other columns.
        std::vector<int> subset(static_cast<std::size_t>(nv));
        std::function<std::optional<TermPtr>(int, int)> choose =
            [&](int pos, int start) -> std::optional<TermPtr> {
            if (pos == nv) {
                const PartialClone& clone = cache.at(nv);
                std::vector<std::size_t> cells;
                cells.reserve(r.size());
                for (const auto& t : r.tuples) {
                    Tuple proj(static_cast<std::size_t>(nv));
                    for (int p = 0; p < nv; ++p)
                        proj[static_cast<std::size_t>(p)] =
                            t[static_cast<std::size_t>(subset[static_cast<std::size_t>(p)])];
                    cells.push_back(encode_tuple(proj, m));
                }
                for (const auto& member : clone.members) {
                    bool ok = true;
                    for (std::size_t i = 0; i < cells.size(); ++i)
                        if (member.table[cells[i]] != static_cast<std::int16_t>(target[i])) {
                            ok = false;
                            break;
                        }
                    if (ok) {
                        std::vector<int> map(static_cast<std::size_t>(nv));
                        for (int p = 0; p < nv; ++p)
                            map[static_cast<std::size_t>(p)] = subset[static_cast<std::size_t>(p)];
                        return term_substitute(member.provenance, map);
                    }
                }
                return std::nullopt;
            }
            for (int i = start; i < static_cast<int>(others.size()); ++i) {
                subset[static_cast<std::size_t>(pos)] = others[static_cast<std::size_t>(i)];
                if (auto found = choose(pos + 1, i + 1)) return found;
            }
            return std::nullopt;
        };
        if (auto found = choose(0, 0)) return found;
    }
    return std::nullopt;
}

}  // namespace detail

// Decides whether r is conjunct-atomic definable from E and, if so, returns
// a formula (a greedily simplified subset of the canonical conjunction of
// all atomic formulas true on r) whose solution set in E equals r exactly.
inline std::optional<ConjunctAtomicFormula> cadef_define(CloneCache& cache, const Relation& r,
                                                         CadefOptions opts = {}) {
    const AlterEgo& ego = cache.ego();
    if (!same_carrier(r.carrier, ego.base.carrier))
        throw InputError("cadef_define: relation is not over the ego's carrier");
    if (r.empty()) throw InputError("cadef_define: empty relations are excluded from cadef");

    std::vector<Atom> recorded;  // over the original variable indices

    // Reduction phase: drop duplicate columns, then columns recoverable as a
    // clone term of few other columns. Both reductions are exact in both
    // directions.
    std::vector<int> kept;  // original indices of the current columns
    Relation cur;
    {
        auto cc = detail::column_core(r);
        for (std::size_t j = 0, kpos = 0; j < static_cast<std::size_t>(r.arity); ++j) {
            if (kpos < cc.kept.size() && cc.kept[kpos] == static_cast<int>(j)) {
                ++kpos;
                continue;
            }
            // column j duplicates an earlier kept column
            auto col = r.column(static_cast<int>(j));
            for (int i : cc.kept)
                if (r.column(i) == col) {
                    recorded.push_back(EqAtom{Term::mk_var(static_cast<int>(j)), Term::mk_var(i)});
                    break;
                }
        }
        kept = cc.kept;
        cur = cc.core;
    }
    bool reduced = true;
    while (reduced && cur.arity > 1) {
        reduced = false;
        for (int c = cur.arity - 1; c >= 0; --c) {
            auto term = detail::recover_column(cache, cur, c, opts);
            if (!term) continue;
            // Map the term's variables (current indices minus c) back to the
            // original indices.
            std::vector<int> cur_to_orig;
            for (std::size_t i = 0; i < kept.size(); ++i) cur_to_orig.push_back(kept[i]);
            TermPtr orig_term = term_substitute(*term, cur_to_orig);
            recorded.push_back(EqAtom{Term::mk_var(kept[static_cast<std::size_t>(c)]), orig_term});

            std::vector<int> new_kept;
            Relation next;
            next.carrier = cur.carrier;
            next.arity = cur.arity - 1;
            for (int i = 0; i < cur.arity; ++i)
                if (i != c) new_kept.push_back(kept[static_cast<std::size_t>(i)]);
            for (const auto& t : cur.tuples) {
                Tuple nt;
                nt.reserve(t.size() - 1);
                for (int i = 0; i < cur.arity; ++i)
                    if (i != c) nt.push_back(t[static_cast<std::size_t>(i)]);
                next.tuples.push_back(std::move(nt));
            }
            next.canonicalize();
            if (next.size() != cur.size()) {
                // Not a bijective reduction; the dropped column was needed to
                // distinguish tuples. Revert.
                recorded.pop_back();
                continue;
            }
            kept = std::move(new_kept);
            cur = std::move(next);
            reduced = true;
            break;
        }
    }

    auto core_atoms = detail::cadef_core_check(cache, cur);
    if (!core_atoms) return std::nullopt;

    ConjunctAtomicFormula formula;
    formula.nvars = r.arity;
    std::vector<int> core_to_orig(kept.begin(), kept.end());
    for (const auto& a : *core_atoms) formula.conjuncts.push_back(atom_substitute(a, core_to_orig));
    for (const auto& a : recorded) formula.conjuncts.push_back(a);

    // The simplified certificate must define exactly r.
    Relation sol = formula.solution_set(ego.as_structure());
    if (!(sol == r))
        throw std::logic_error("cadef_define: certificate does not define the relation exactly");
    return formula;
}

inline std::optional<ConjunctAtomicFormula> cadef_define(const AlterEgo& ego, const Relation& r,
                                                         CadefOptions opts = {}) {
    CloneCache cache(ego, opts.clone);
    return cadef_define(cache, r, opts);
}

// ---------------------------------------------------------------------------
// beta formulas (Definitions 5.3/5.5 machinery)
// ---------------------------------------------------------------------------

struct BetaEntry {
    Relation r;
    Relation r_hat;
    ConjunctAtomicFormula hat;  // defines r_hat in the ego (n + m variables)
    PPFormula beta;             // exists w. hat — defines r in the ego
};

// Builds the hat relation of r, a conjunct-atomic definition of it in E2,
// and the primitive-positive formula existentially projecting it back to r.
inline BetaEntry beta_formulas(CloneCache& cache2, const FiniteAlgebra& alg, const Relation& r,
                               CadefOptions opts = {}) {
    BetaEntry entry;
    entry.r = r;
    entry.r_hat = hat_relation(alg, r);
    auto hat_formula = cadef_define(cache2, entry.r_hat, opts);
    if (!hat_formula)
        throw InputError("beta_formulas: the hat relation of '" +
                         (r.name.empty() ? "<relation>" : r.name) +
                         "' is not conjunct-atomic definable from the ego (assumption (hm) fails)");
    entry.hat = *hat_formula;
    entry.beta.nvars = r.arity;
    entry.beta.n_exist = entry.r_hat.arity - r.arity;
    entry.beta.body = entry.hat;
    // Lemma contract: beta defines r exactly.
    Relation sol = entry.beta.solution_set(cache2.ego().as_structure());
    if (!(sol == r)) throw std::logic_error("beta_formulas: beta does not define r");
    return entry;
}

inline BetaEntry beta_formulas(const AlterEgo& ego2, const FiniteAlgebra& alg, const Relation& r,
                               CadefOptions opts = {}) {
    CloneCache cache(ego2, opts.clone);
    return beta_formulas(cache, alg, r, opts);
}

// ---------------------------------------------------------------------------
// Bijective projections
// ---------------------------------------------------------------------------

// Finds theta : {1..k} -> {1..l} such that a |-> (a_theta(1), ..., a_theta(k))
// maps s bijectively onto r. Indices in the result are 0-based.
inline std::optional<std::vector<int>> bijective_projection(const Relation& r,
                                                            const Relation& s) {
    if (!same_carrier(r.carrier, s.carrier))
        throw InputError("bijective_projection: carrier mismatch");
    if (r.size() != s.size()) return std::nullopt;
    const int k = r.arity;
    const int l = s.arity;

    // Sorted prefix multisets of r for pruning.
    std::vector<std::vector<Tuple>> r_prefixes(static_cast<std::size_t>(k) + 1);
    for (int len = 1; len <= k; ++len) {
        for (const auto& t : r.tuples)
            r_prefixes[static_cast<std::size_t>(len)].push_back(
                Tuple(t.begin(), t.begin() + len));
        std::sort(r_prefixes[static_cast<std::size_t>(len)].begin(),
                  r_prefixes[static_cast<std::size_t>(len)].end());
    }

    std::vector<int> theta(static_cast<std::size_t>(k), 0);
    std::vector<Tuple> images(s.size());
    for (auto& t : images) t.reserve(static_cast<std::size_t>(k));

    std::function<bool(int)> dfs = [&](int pos) -> bool {
        if (pos == k) {
            std::vector<Tuple> sorted = images;
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            return sorted.size() == s.size() && sorted == r.tuples;
        }
        for (int c = 0; c < l; ++c) {
            for (std::size_t i = 0; i < s.tuples.size(); ++i)
                images[i].push_back(s.tuples[i][static_cast<std::size_t>(c)]);
            std::vector<Tuple> sorted = images;
            std::sort(sorted.begin(), sorted.end());
            if (sorted == r_prefixes[static_cast<std::size_t>(pos) + 1]) {
                theta[static_cast<std::size_t>(pos)] = c;
                if (dfs(pos + 1)) return true;
            }
            for (std::size_t i = 0; i < s.tuples.size(); ++i) images[i].pop_back();
        }
        return false;
    };
    if (k == 0) return s.size() == 1 && r.size() == 1 ? std::optional<std::vector<int>>({})
                                                      : std::nullopt;
    if (dfs(0)) return theta;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Structural reducts
// ---------------------------------------------------------------------------

// E1 is a structural reduct of E2 iff every operation of E1 extends in
// clo(E2) and every relation in R1 and every dom h (h in H1) is
// conjunct-atomic definable from E2.
inline bool is_structural_reduct(const AlterEgo& e1, const AlterEgo& e2,
                                 CadefOptions opts = {}, std::string* reason = nullptr) {
    if (!e1.same_base(e2)) throw InputError("is_structural_reduct: egos have different bases");
    CloneCache cache2(e2, opts.clone);
    for (const auto& h : e1.h) {
        if (!extends_in_clone(cache2, h)) {
            if (reason) *reason = "operation '" + h.name + "' has no extension in the clone";
            return false;
        }
    }
    auto check_rel = [&](const Relation& rel, const std::string& what) {
        if (rel.empty()) return true;  // empty relations carry no constraint here
        if (!cadef_define(cache2, rel, opts)) {
            if (reason) *reason = what + " is not conjunct-atomic definable";
            return false;
        }
        return true;
    };
    for (const auto& rel : e1.r)
        if (!check_rel(rel, "relation '" + rel.name + "'")) return false;
    for (const auto& h : e1.h)
        if (!check_rel(h.domain, "dom " + h.name)) return false;
    return true;
}

inline bool structurally_equivalent(const AlterEgo& e1, const AlterEgo& e2,
                                    CadefOptions opts = {}) {
    return is_structural_reduct(e1, e2, opts) && is_structural_reduct(e2, e1, opts);
}

}  // namespace dualize

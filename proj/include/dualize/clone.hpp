#pragma once

#include <cstring>
#include <unordered_set>

#include "dualize/formula.hpp"

namespace dualize {

// ---------------------------------------------------------------------------
// Alter egos
// ---------------------------------------------------------------------------

struct AlterEgo {
    std::string name;
    FiniteAlgebra base;
    std::vector<PartialOperation> h;  // compatible partial operations
    std::vector<Relation> r;          // compatible relations

    Signature signature() const {
        Signature sig;
        for (const auto& op : h) sig.push_back({op.name, SymbolKind::PartialOp, op.arity});
        for (const auto& rel : r) sig.push_back({rel.name, SymbolKind::Rel, rel.arity});
        return sig;
    }

    bool has_nullary() const {
        for (const auto& op : h)
            if (op.arity == 0) return true;
        return false;
    }

    // The alter ego viewed as a finite structure on M's carrier.
    FiniteStructure as_structure() const {
        FiniteStructure x;
        x.name = name;
        x.carrier = base.carrier;
        x.ops = h;
        x.rels = r;
        return x;
    }

    // Every member of H must have a compatible graph and every member of R
    // must be a subuniverse.
    void validate() const {
        base.validate();
        for (const auto& op : h) {
            op.validate();
            if (!same_carrier(op.carrier, base.carrier))
                throw InputError("ego '" + name + "': op '" + op.name + "' carrier mismatch");
            if (!is_subuniverse(base, op.graph()))
                throw InputError("ego '" + name + "': partial operation '" + op.name +
                                 "' is not compatible (graph is not a subuniverse)");
        }
        for (const auto& rel : r) {
            rel.validate();
            if (!same_carrier(rel.carrier, base.carrier))
                throw InputError("ego '" + name + "': relation '" + rel.name + "' carrier mismatch");
            if (!is_subuniverse(base, rel))
                throw InputError("ego '" + name + "': relation '" + rel.name +
                                 "' is not compatible (not a subuniverse)");
        }
    }

    bool same_base(const AlterEgo& other) const {
        return same_carrier(base.carrier, other.base.carrier) && base.same_signature(other.base);
    }
};

// ---------------------------------------------------------------------------
// The enriched partial clone (arity-bounded materialisation)
// ---------------------------------------------------------------------------

struct CloneOptions {
    int max_arity = 6;
    std::size_t max_members = 200000;
};

// A member of the k-ary fragment: value table over M^k (row-major), with -1
// marking cells outside the domain, plus the term that produced it.
struct CloneMember {
    std::vector<std::int16_t> table;
    TermPtr provenance;
    int depth = 0;

    bool defined(std::size_t cell) const { return table[cell] >= 0; }
};

struct PartialClone {
    CarrierPtr carrier;
    int arity = 0;
    std::vector<CloneMember> members;

    PartialOperation member_as_pop(std::size_t i) const {
        const CloneMember& cm = members[i];
        PartialOperation p;
        p.carrier = carrier;
        p.arity = arity;
        p.domain.carrier = carrier;
        p.domain.arity = arity;
        std::size_t cell = 0;
        for_each_tuple(carrier->size(), arity, [&](const Tuple& t) {
            if (cm.table[cell] >= 0) {
                p.domain.tuples.push_back(t);
                p.values.push_back(static_cast<Elem>(cm.table[cell]));
            }
            ++cell;
        });
        return p;
    }
};

namespace detail {

struct TableHash {
    std::size_t operator()(const std::vector<std::int16_t>& t) const {
        std::size_t h = 1469598103934665603ull;
        for (std::int16_t v : t) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

inline std::vector<std::int16_t> pop_value_table(const PartialOperation& h, std::size_t m) {
    std::vector<std::int16_t> table(pow_size(m, h.arity), -1);
    for (std::size_t i = 0; i < h.domain.tuples.size(); ++i)
        table[encode_tuple(h.domain.tuples[i], m)] = h.values[i];
    return table;
}

}  // namespace detail

// Materialises the k-ary fragment of clo(E): projections and the closure of
// H under composition with maximum non-empty domain. Deterministic order
// (breadth-first by term depth, insertion order within a round).
inline PartialClone clone_members(const AlterEgo& ego, int k, CloneOptions opts = {}) {
    if (k > opts.max_arity)
        throw BoundExceeded("clone fragment arity " + std::to_string(k) + " exceeds bound " +
                            std::to_string(opts.max_arity));
    const std::size_t m = ego.base.size();
    const std::size_t cells = pow_size(m, k);

    PartialClone clone;
    clone.carrier = ego.base.carrier;
    clone.arity = k;
    std::unordered_set<std::vector<std::int16_t>, detail::TableHash> seen;

    auto add = [&](std::vector<std::int16_t> table, TermPtr prov, int depth) -> bool {
        bool nonempty = std::any_of(table.begin(), table.end(),
                                    [](std::int16_t v) { return v >= 0; });
        if (!nonempty) return false;
        if (!seen.insert(table).second) return false;
        if (clone.members.size() >= opts.max_members)
            throw BoundExceeded("clone fragment exceeds " + std::to_string(opts.max_members) +
                                " members");
        clone.members.push_back(CloneMember{std::move(table), std::move(prov), depth});
        return true;
    };

    // Projections (arity >= 1 only).
    for (int i = 0; i < k; ++i) {
        std::vector<std::int16_t> table(cells);
        std::size_t cell = 0;
        for_each_tuple(m, k, [&](const Tuple& t) {
            table[cell++] = t[static_cast<std::size_t>(i)];
        });
        add(std::move(table), Term::mk_var(i), 0);
    }
    // Nullary symbols enter as constants at every arity.
    for (const auto& h : ego.h) {
        if (h.arity != 0) continue;
        auto v = h.apply(Tuple{});
        if (!v) continue;
        std::vector<std::int16_t> table(cells, static_cast<std::int16_t>(*v));
        add(std::move(table), Term::mk_app(h.name, {}), 0);
    }

    // Pre-tabulate the generating operations.
    struct Gen {
        const PartialOperation* op;
        std::vector<std::int16_t> table;
    };
    std::vector<Gen> gens;
    for (const auto& h : ego.h)
        if (h.arity > 0) gens.push_back(Gen{&h, detail::pop_value_table(h, m)});

    std::size_t round_start = 0;
    int depth = 0;
    while (round_start < clone.members.size()) {
        std::size_t round_end = clone.members.size();
        ++depth;
        for (const auto& gen : gens) {
            const int ga = gen.op->arity;
            // Compose gen over argument tuples with at least one member from
            // the last round.
            std::vector<std::size_t> idx(static_cast<std::size_t>(ga), 0);
            while (true) {
                bool has_new = false;
                for (std::size_t j : idx)
                    if (j >= round_start) { has_new = true; break; }
                if (has_new) {
                    std::vector<std::int16_t> table(cells, -1);
                    Tuple args(static_cast<std::size_t>(ga));
                    bool any = false;
                    for (std::size_t cell = 0; cell < cells; ++cell) {
                        bool ok = true;
                        for (int j = 0; j < ga; ++j) {
                            std::int16_t v = clone.members[idx[static_cast<std::size_t>(j)]].table[cell];
                            if (v < 0) { ok = false; break; }
                            args[static_cast<std::size_t>(j)] = static_cast<Elem>(v);
                        }
                        if (!ok) continue;
                        std::size_t gcell = encode_tuple(args, m);
                        if (gen.table[gcell] < 0) continue;
                        table[cell] = gen.table[gcell];
                        any = true;
                    }
                    if (any) {
                        std::vector<TermPtr> targs;
                        targs.reserve(static_cast<std::size_t>(ga));
                        for (int j = 0; j < ga; ++j)
                            targs.push_back(clone.members[idx[static_cast<std::size_t>(j)]].provenance);
                        add(std::move(table), Term::mk_app(gen.op->name, std::move(targs)), depth);
                    }
                }
                int pos = ga - 1;
                while (pos >= 0 && idx[static_cast<std::size_t>(pos)] + 1 == round_end) {
                    idx[static_cast<std::size_t>(pos)] = 0;
                    --pos;
                }
                if (pos < 0) break;
                ++idx[static_cast<std::size_t>(pos)];
            }
        }
        round_start = round_end;
    }
    return clone;
}

// Cache of per-arity clone fragments for one ego.
class CloneCache {
  public:
    CloneCache(const AlterEgo& ego, CloneOptions opts = {}) : ego_(&ego), opts_(opts) {}

    const PartialClone& at(int arity) {
        auto it = per_arity_.find(arity);
        if (it != per_arity_.end()) return it->second;
        return per_arity_.emplace(arity, clone_members(*ego_, arity, opts_)).first->second;
    }

    const AlterEgo& ego() const { return *ego_; }
    const CloneOptions& options() const { return opts_; }

  private:
    const AlterEgo* ego_;
    CloneOptions opts_;
    std::map<int, PartialClone> per_arity_;
};

// ---------------------------------------------------------------------------
// Column cores: transporting checks along bijective coordinate projections
// ---------------------------------------------------------------------------

namespace detail {

// Keeps the first occurrence of each distinct column, which is a bijective
// projection of r onto the reduced relation.
struct ColumnCore {
    std::vector<int> kept;  // indices of the kept columns
    Relation core;
};

inline ColumnCore column_core(const Relation& r) {
    ColumnCore out;
    std::vector<std::vector<Elem>> cols;
    for (int i = 0; i < r.arity; ++i) {
        auto col = r.column(i);
        bool dup = false;
        for (const auto& c : cols)
            if (c == col) { dup = true; break; }
        if (!dup) {
            cols.push_back(std::move(col));
            out.kept.push_back(i);
        }
    }
    out.core.carrier = r.carrier;
    out.core.arity = static_cast<int>(out.kept.size());
    for (const auto& t : r.tuples) {
        Tuple proj;
        proj.reserve(out.kept.size());
        for (int i : out.kept) proj.push_back(t[static_cast<std::size_t>(i)]);
        out.core.tuples.push_back(std::move(proj));
    }
    out.core.canonicalize();
    return out;
}

}  // namespace detail

// True iff some member of the k-ary clone fragment restricts on dom h to h.
inline bool extends_in_clone(CloneCache& cache, const PartialOperation& pop) {
    // Reduce along duplicate domain columns first; restriction transports
    // exactly both ways along the bijection.
    auto cc = detail::column_core(pop.domain);
    if (static_cast<int>(cc.kept.size()) < pop.arity) {
        PartialOperation reduced;
        reduced.carrier = pop.carrier;
        reduced.arity = cc.core.arity;
        reduced.domain = cc.core;
        reduced.values.resize(cc.core.size());
        for (std::size_t i = 0; i < pop.domain.tuples.size(); ++i) {
            Tuple proj;
            for (int c : cc.kept) proj.push_back(pop.domain.tuples[i][static_cast<std::size_t>(c)]);
            auto it = std::lower_bound(cc.core.tuples.begin(), cc.core.tuples.end(), proj);
            reduced.values[static_cast<std::size_t>(it - cc.core.tuples.begin())] = pop.values[i];
        }
        return extends_in_clone(cache, reduced);
    }
    const std::size_t m = cache.ego().base.size();
    const PartialClone& clone = cache.at(pop.arity);
    std::vector<std::size_t> cells;
    cells.reserve(pop.domain.size());
    for (const auto& t : pop.domain.tuples) cells.push_back(encode_tuple(t, m));
    for (const auto& member : clone.members) {
        bool ok = true;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (member.table[cells[i]] != static_cast<std::int16_t>(pop.values[i])) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

inline bool extends_in_clone(const AlterEgo& ego, const PartialOperation& pop,
                             CloneOptions opts = {}) {
    CloneCache cache(ego, opts);
    return extends_in_clone(cache, pop);
}

// Finds the witness term for an extension, when one exists.
inline std::optional<TermPtr> extension_witness(CloneCache& cache, const PartialOperation& pop) {
    auto cc = detail::column_core(pop.domain);
    const std::size_t m = cache.ego().base.size();
    PartialOperation reduced = pop;
    std::vector<int> back(static_cast<std::size_t>(pop.arity), 0);
    if (static_cast<int>(cc.kept.size()) < pop.arity) {
        reduced.arity = cc.core.arity;
        reduced.domain = cc.core;
        reduced.values.assign(cc.core.size(), 0);
        for (std::size_t i = 0; i < pop.domain.tuples.size(); ++i) {
            Tuple proj;
            for (int c : cc.kept) proj.push_back(pop.domain.tuples[i][static_cast<std::size_t>(c)]);
            auto it = std::lower_bound(cc.core.tuples.begin(), cc.core.tuples.end(), proj);
            reduced.values[static_cast<std::size_t>(it - cc.core.tuples.begin())] = pop.values[i];
        }
    }
    const PartialClone& clone = cache.at(reduced.arity);
    std::vector<std::size_t> cells;
    for (const auto& t : reduced.domain.tuples) cells.push_back(encode_tuple(t, m));
    for (const auto& member : clone.members) {
        bool ok = true;
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (member.table[cells[i]] != static_cast<std::int16_t>(reduced.values[i])) {
                ok = false;
                break;
            }
        if (ok) {
            // Rewrite the witness term back to the original coordinates.
            std::vector<int> map(static_cast<std::size_t>(reduced.arity));
            for (std::size_t j = 0; j < cc.kept.size(); ++j) map[j] = cc.kept[j];
            return term_substitute(member.provenance, map);
        }
    }
    return std::nullopt;
}

// True iff every compatible partial operation with domain r (that is, every
// member of hom_set(M, r) viewed with domain r) has an extension in clo(E).
// On failure `witness` (if given) receives a non-extending operation.
inline bool op_rich_at(CloneCache& cache, const Relation& r,
                       PartialOperation* witness = nullptr) {
    if (r.empty()) throw InputError("op_rich_at: empty relation");
    auto cc = detail::column_core(r);
    const FiniteAlgebra& base = cache.ego().base;
    // Richness transports exactly along the bijective projection onto the
    // distinct-column core.
    auto homs = hom_set(base, cc.core);
    for (const auto& h : homs) {
        if (!extends_in_clone(cache, h)) {
            if (witness) {
                PartialOperation w;
                w.carrier = base.carrier;
                w.arity = r.arity;
                w.domain = r;
                w.values.resize(r.size());
                for (std::size_t i = 0; i < r.tuples.size(); ++i) {
                    Tuple proj;
                    for (int c : cc.kept) proj.push_back(r.tuples[i][static_cast<std::size_t>(c)]);
                    auto it = std::lower_bound(cc.core.tuples.begin(), cc.core.tuples.end(), proj);
                    w.values[i] = h.values[static_cast<std::size_t>(it - cc.core.tuples.begin())];
                }
                *witness = std::move(w);
            }
            return false;
        }
    }
    return true;
}

inline bool op_rich_at(const AlterEgo& ego, const Relation& r, CloneOptions opts = {}) {
    CloneCache cache(ego, opts);
    return op_rich_at(cache, r);
}

}  // namespace dualize

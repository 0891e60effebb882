#pragma once

#include <cassert>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dualize/common.hpp"

namespace dualize {

// ---------------------------------------------------------------------------
// Finite algebras
// ---------------------------------------------------------------------------

struct Operation {
    std::string name;
    int arity = 0;
    // Total table over carrier^arity, row-major (lex order of argument
    // tuples). A nullary operation has a single entry.
    std::vector<Elem> table;

    Elem apply(const Tuple& args, std::size_t carrier_size) const {
        return table[encode_tuple(args, carrier_size)];
    }
};

struct FiniteAlgebra {
    std::string name;
    CarrierPtr carrier;
    std::vector<Operation> ops;

    std::size_t size() const { return carrier->size(); }

    const Operation* find_op(const std::string& op_name) const {
        for (const auto& op : ops)
            if (op.name == op_name) return &op;
        return nullptr;
    }

    bool has_nullary() const {
        for (const auto& op : ops)
            if (op.arity == 0) return true;
        return false;
    }

    bool same_signature(const FiniteAlgebra& other) const {
        if (ops.size() != other.ops.size()) return false;
        for (std::size_t i = 0; i < ops.size(); ++i)
            if (ops[i].name != other.ops[i].name || ops[i].arity != other.ops[i].arity)
                return false;
        return true;
    }

    void validate() const {
        if (!carrier || carrier->size() == 0)
            throw InputError("algebra '" + name + "' has an empty carrier");
        for (const auto& op : ops) {
            if (op.arity < 0) throw InputError("operation '" + op.name + "' has negative arity");
            if (op.table.size() != pow_size(carrier->size(), op.arity))
                throw InputError("operation '" + op.name + "' table is not total");
            for (Elem e : op.table)
                if (e >= carrier->size())
                    throw InputError("operation '" + op.name + "' table entry out of range");
        }
    }
};

// ---------------------------------------------------------------------------
// Relations (n-ary tuple sets, canonically sorted)
// ---------------------------------------------------------------------------

struct Relation {
    std::string name;
    CarrierPtr carrier;
    int arity = 0;
    std::vector<Tuple> tuples;  // sorted lexicographically by element index

    void canonicalize() {
        std::sort(tuples.begin(), tuples.end());
        tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
    }

    bool contains(const Tuple& t) const {
        return std::binary_search(tuples.begin(), tuples.end(), t);
    }

    std::size_t size() const { return tuples.size(); }
    bool empty() const { return tuples.empty(); }

    // The i-th coordinate as a value vector over the canonical tuple order.
    std::vector<Elem> column(int i) const {
        std::vector<Elem> col;
        col.reserve(tuples.size());
        for (const auto& t : tuples) col.push_back(t[static_cast<std::size_t>(i)]);
        return col;
    }

    void validate() const {
        if (arity < 0) throw InputError("relation arity must be >= 0");
        for (const auto& t : tuples) {
            if (static_cast<int>(t.size()) != arity)
                throw InputError("relation '" + name + "' has a tuple of wrong length");
            for (Elem e : t)
                if (!carrier || e >= carrier->size())
                    throw InputError("relation '" + name + "' has a tuple entry out of range");
        }
        if (!std::is_sorted(tuples.begin(), tuples.end()))
            throw InputError("relation '" + name + "' is not canonically sorted");
    }

    bool operator==(const Relation& o) const { return arity == o.arity && tuples == o.tuples; }
    bool operator<(const Relation& o) const {
        if (arity != o.arity) return arity < o.arity;
        return tuples < o.tuples;
    }

    static Relation full(CarrierPtr carrier, int arity, std::string name = "") {
        Relation r;
        r.name = std::move(name);
        r.carrier = carrier;
        r.arity = arity;
        for_each_tuple(carrier->size(), arity, [&](const Tuple& t) { r.tuples.push_back(t); });
        return r;
    }

    static Relation of(CarrierPtr carrier, int arity, std::vector<Tuple> tuples,
                       std::string name = "") {
        Relation r;
        r.name = std::move(name);
        r.carrier = std::move(carrier);
        r.arity = arity;
        r.tuples = std::move(tuples);
        r.canonicalize();
        return r;
    }
};

// ---------------------------------------------------------------------------
// Partial operations
// ---------------------------------------------------------------------------

struct PartialOperation {
    std::string name;
    CarrierPtr carrier;
    int arity = 0;
    Relation domain;             // canonical order
    std::vector<Elem> values;    // aligned with domain.tuples

    bool defined_on(const Tuple& t) const { return domain.contains(t); }

    std::optional<Elem> apply(const Tuple& t) const {
        auto it = std::lower_bound(domain.tuples.begin(), domain.tuples.end(), t);
        if (it == domain.tuples.end() || *it != t) return std::nullopt;
        return values[static_cast<std::size_t>(it - domain.tuples.begin())];
    }

    bool is_total() const { return domain.size() == pow_size(carrier->size(), arity); }

    Relation graph() const {
        Relation g;
        g.name = name.empty() ? "" : "graph " + name;
        g.carrier = carrier;
        g.arity = arity + 1;
        g.tuples.reserve(domain.size());
        for (std::size_t i = 0; i < domain.tuples.size(); ++i) {
            Tuple t = domain.tuples[i];
            t.push_back(values[i]);
            g.tuples.push_back(std::move(t));
        }
        g.canonicalize();
        return g;
    }

    // Value vector over the domain's canonical tuple order; the deterministic
    // sort key used everywhere an enumeration of homs is fixed.
    const std::vector<Elem>& value_vector() const { return values; }

    void validate() const {
        domain.validate();
        if (domain.arity != arity) throw InputError("partial op domain arity mismatch");
        if (values.size() != domain.size())
            throw InputError("partial op '" + name + "' values misaligned with domain");
        for (Elem e : values)
            if (e >= carrier->size())
                throw InputError("partial op '" + name + "' value out of range");
    }

    bool operator==(const PartialOperation& o) const {
        return arity == o.arity && domain == o.domain && values == o.values;
    }

    static PartialOperation from_graph(const Relation& g, std::string name = "") {
        if (g.arity < 1) throw InputError("graph relation must have arity >= 1");
        PartialOperation h;
        h.name = std::move(name);
        h.carrier = g.carrier;
        h.arity = g.arity - 1;
        h.domain.carrier = g.carrier;
        h.domain.arity = h.arity;
        for (const auto& t : g.tuples) {
            Tuple args(t.begin(), t.end() - 1);
            if (!h.domain.tuples.empty() && h.domain.tuples.back() == args)
                throw InputError("relation is not the graph of a partial operation");
            h.domain.tuples.push_back(std::move(args));
            h.values.push_back(t.back());
        }
        return h;
    }

    static PartialOperation total(const FiniteAlgebra& alg, const Operation& op) {
        PartialOperation h;
        h.name = op.name;
        h.carrier = alg.carrier;
        h.arity = op.arity;
        h.domain = Relation::full(alg.carrier, op.arity);
        h.values.reserve(h.domain.size());
        for (const auto& t : h.domain.tuples) h.values.push_back(op.apply(t, alg.size()));
        return h;
    }
};

// ---------------------------------------------------------------------------
// Finite structures over a (partial operation, relation) signature
// ---------------------------------------------------------------------------

enum class SymbolKind { PartialOp, Rel };

struct SigSymbol {
    std::string name;
    SymbolKind kind = SymbolKind::Rel;
    int arity = 0;

    bool operator==(const SigSymbol& o) const {
        return name == o.name && kind == o.kind && arity == o.arity;
    }
};

using Signature = std::vector<SigSymbol>;

struct FiniteStructure {
    std::string name;
    CarrierPtr carrier;  // element labels
    std::vector<PartialOperation> ops;
    std::vector<Relation> rels;

    std::size_t size() const { return carrier->size(); }

    Signature signature() const {
        Signature sig;
        for (const auto& h : ops) sig.push_back({h.name, SymbolKind::PartialOp, h.arity});
        for (const auto& r : rels) sig.push_back({r.name, SymbolKind::Rel, r.arity});
        return sig;
    }

    const PartialOperation* find_op(const std::string& n) const {
        for (const auto& h : ops)
            if (h.name == n) return &h;
        return nullptr;
    }

    const Relation* find_rel(const std::string& n) const {
        for (const auto& r : rels)
            if (r.name == n) return &r;
        return nullptr;
    }

    bool has_nullary_op() const {
        for (const auto& h : ops)
            if (h.arity == 0) return true;
        return false;
    }

    void validate() const {
        if (!carrier) throw InputError("structure '" + name + "' has no carrier");
        for (const auto& h : ops) {
            h.validate();
            if (!same_carrier(h.carrier, carrier))
                throw InputError("structure '" + name + "': op carrier mismatch");
        }
        for (const auto& r : rels) {
            r.validate();
            if (!same_carrier(r.carrier, carrier))
                throw InputError("structure '" + name + "': relation carrier mismatch");
        }
    }
};

inline bool same_signature(const Signature& a, const Signature& b) { return a == b; }

// ---------------------------------------------------------------------------
// Subuniverses
// ---------------------------------------------------------------------------

inline void require_relation_over(const FiniteAlgebra& alg, const Relation& r) {
    if (!same_carrier(alg.carrier, r.carrier))
        throw InputError("relation is not over the algebra's carrier");
}

// True iff r is closed under all operations of alg applied coordinatewise.
inline bool is_subuniverse(const FiniteAlgebra& alg, const Relation& r) {
    require_relation_over(alg, r);
    const std::size_t m = alg.size();
    for (const auto& op : alg.ops) {
        if (op.arity == 0) {
            if (r.arity == 0) {
                // Closure of an arity-0 relation under a nullary op requires
                // the empty tuple to be present.
                if (r.tuples.empty()) return false;
                continue;
            }
            // Nullary ops need no argument tuples, so even the empty
            // relation fails closure.
            Tuple diag(static_cast<std::size_t>(r.arity), op.table[0]);
            if (!r.contains(diag)) return false;
            continue;
        }
        const std::size_t s = r.size();
        std::vector<std::size_t> idx(static_cast<std::size_t>(op.arity), 0);
        if (s == 0) continue;
        while (true) {
            Tuple result(static_cast<std::size_t>(r.arity));
            Tuple args(static_cast<std::size_t>(op.arity));
            for (int c = 0; c < r.arity; ++c) {
                for (int j = 0; j < op.arity; ++j)
                    args[static_cast<std::size_t>(j)] =
                        r.tuples[idx[static_cast<std::size_t>(j)]][static_cast<std::size_t>(c)];
                result[static_cast<std::size_t>(c)] = op.apply(args, m);
            }
            if (!r.contains(result)) return false;
            int pos = op.arity - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] + 1 == s) {
                idx[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
        }
    }
    return true;
}

// Least superset of `generators` closed under alg's operations coordinatewise.
inline Relation subuniverse_closure(const FiniteAlgebra& alg, int arity,
                                    const std::vector<Tuple>& generators) {
    const std::size_t m = alg.size();
    std::set<Tuple> current;
    for (const auto& t : generators) {
        if (static_cast<int>(t.size()) != arity)
            throw InputError("generator tuple has wrong arity");
        for (Elem e : t)
            if (e >= m) throw InputError("generator tuple entry out of range");
        current.insert(t);
    }
    for (const auto& op : alg.ops) {
        if (op.arity == 0) {
            if (arity == 0)
                current.insert(Tuple{});
            else
                current.insert(Tuple(static_cast<std::size_t>(arity), op.table[0]));
        }
    }
    std::vector<Tuple> worklist(current.begin(), current.end());
    std::vector<Tuple> all(current.begin(), current.end());
    while (!worklist.empty()) {
        std::vector<Tuple> fresh;
        for (const auto& op : alg.ops) {
            if (op.arity == 0) continue;
            // Every argument combination must include at least one tuple from
            // the last round; older combinations were already processed.
            const std::size_t total = all.size();
            const std::size_t old_count = total - worklist.size();
            std::vector<std::size_t> idx(static_cast<std::size_t>(op.arity), 0);
            while (true) {
                bool has_new = false;
                for (std::size_t j : idx)
                    if (j >= old_count) { has_new = true; break; }
                if (has_new) {
                    Tuple result(static_cast<std::size_t>(arity));
                    Tuple args(static_cast<std::size_t>(op.arity));
                    for (int c = 0; c < arity; ++c) {
                        for (int j = 0; j < op.arity; ++j)
                            args[static_cast<std::size_t>(j)] =
                                all[idx[static_cast<std::size_t>(j)]][static_cast<std::size_t>(c)];
                        result[static_cast<std::size_t>(c)] = op.apply(args, m);
                    }
                    if (current.insert(result).second) fresh.push_back(std::move(result));
                }
                int pos = op.arity - 1;
                while (pos >= 0 && idx[static_cast<std::size_t>(pos)] + 1 == total) {
                    idx[static_cast<std::size_t>(pos)] = 0;
                    --pos;
                }
                if (pos < 0) break;
                ++idx[static_cast<std::size_t>(pos)];
            }
        }
        // `old_count` above relies on new tuples sitting at the tail.
        all.insert(all.end(), fresh.begin(), fresh.end());
        worklist = std::move(fresh);
    }
    Relation r = Relation::of(alg.carrier, arity, std::move(all));
    return r;
}

// ---------------------------------------------------------------------------
// Homomorphism enumeration
// ---------------------------------------------------------------------------

namespace detail {

// Shared backtracking engine: assigns values in M to the points 0..s-1 in
// order, checking every fully-assigned constraint instance as soon as its
// last point is assigned. `check(point)` must verify all constraints whose
// maximum involved point equals `point`.
template <class Check, class Emit>
inline bool search_assignments(std::size_t points, std::size_t values, Check&& check,
                               Emit&& emit, std::vector<Elem>& val) {
    std::size_t k = 0;
    std::vector<Elem> next(points, 0);
    while (true) {
        if (k == points) {
            if (!emit(val)) return false;
            if (points == 0) return true;
            --k;
            ++next[k];
        }
        while (next[k] >= values) {
            if (k == 0) return true;
            --k;
            ++next[k];
        }
        val[k] = next[k];
        if (check(k)) {
            ++k;
            if (k < points) next[k] = 0;
        } else {
            ++next[k];
        }
    }
}

}  // namespace detail

// All homomorphisms from the subalgebra r <= M^n into M, in the canonical
// order (sorted lexicographically by value vector over r's tuple order).
// Throws InputError unless r is a subuniverse.
inline std::vector<PartialOperation> hom_set(const FiniteAlgebra& alg, const Relation& r) {
    if (!is_subuniverse(alg, r))
        throw InputError("hom_set: relation is not a subuniverse of M^" + std::to_string(r.arity));
    const std::size_t s = r.size();
    const std::size_t m = alg.size();

    std::map<Tuple, std::size_t> index;
    for (std::size_t i = 0; i < s; ++i) index[r.tuples[i]] = i;

    // Operation instances grouped by the largest point they involve, so the
    // backtracking search can check each exactly once.
    struct Instance {
        const Operation* op;
        std::vector<std::size_t> args;
        std::size_t result;
    };
    std::vector<std::vector<Instance>> by_max_point(s);
    for (const auto& op : alg.ops) {
        if (op.arity == 0) continue;
        std::vector<std::size_t> idx(static_cast<std::size_t>(op.arity), 0);
        if (s == 0) continue;
        while (true) {
            Tuple result(static_cast<std::size_t>(r.arity));
            Tuple args(static_cast<std::size_t>(op.arity));
            for (int c = 0; c < r.arity; ++c) {
                for (int j = 0; j < op.arity; ++j)
                    args[static_cast<std::size_t>(j)] =
                        r.tuples[idx[static_cast<std::size_t>(j)]][static_cast<std::size_t>(c)];
                result[static_cast<std::size_t>(c)] = op.apply(args, m);
            }
            std::size_t res_idx = index.at(result);
            std::size_t mx = res_idx;
            for (std::size_t j : idx) mx = std::max(mx, j);
            by_max_point[mx].push_back(Instance{&op, idx, res_idx});
            int pos = op.arity - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] + 1 == s) {
                idx[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
        }
    }

    std::vector<Elem> val(s, 0);
    Tuple op_args;
    auto check = [&](std::size_t point) {
        for (const auto& inst : by_max_point[point]) {
            op_args.clear();
            for (std::size_t j : inst.args) op_args.push_back(val[j]);
            if (inst.op->apply(op_args, m) != val[inst.result]) return false;
        }
        return true;
    };

    std::vector<PartialOperation> homs;
    // Nullary constants pin their diagonal's value immediately; that falls out
    // of the instance checks only for arity >= 1 ops, so handle them here.
    std::vector<std::optional<Elem>> forced(s);
    for (const auto& op : alg.ops) {
        if (op.arity != 0) continue;
        if (r.arity == 0) continue;
        Tuple diag(static_cast<std::size_t>(r.arity), op.table[0]);
        forced[index.at(diag)] = op.table[0];
    }
    auto check_with_forced = [&](std::size_t point) {
        if (forced[point] && val[point] != *forced[point]) return false;
        return check(point);
    };
    auto emit = [&](const std::vector<Elem>& assignment) {
        PartialOperation h;
        h.carrier = alg.carrier;
        h.arity = r.arity;
        h.domain = r;
        h.values = assignment;
        homs.push_back(std::move(h));
        return true;
    };
    detail::search_assignments(s, m, check_with_forced, emit, val);
    std::sort(homs.begin(), homs.end(),
              [](const PartialOperation& a, const PartialOperation& b) {
                  return a.values < b.values;
              });
    return homs;
}

// Brute-force oracle: filter all |M|^|r| candidate maps by the commutation
// predicate. Exponential; intended for tests on |r| <= 8.
inline std::vector<PartialOperation> hom_set_bruteforce(const FiniteAlgebra& alg,
                                                        const Relation& r) {
    if (!is_subuniverse(alg, r)) throw InputError("hom_set_bruteforce: not a subuniverse");
    const std::size_t s = r.size();
    const std::size_t m = alg.size();
    std::map<Tuple, std::size_t> index;
    for (std::size_t i = 0; i < s; ++i) index[r.tuples[i]] = i;

    std::vector<PartialOperation> homs;
    for_each_tuple(m, static_cast<int>(s), [&](const Tuple& assignment) {
        for (const auto& op : alg.ops) {
            if (op.arity == 0) {
                if (r.arity == 0) continue;
                Tuple diag(static_cast<std::size_t>(r.arity), op.table[0]);
                if (assignment[index.at(diag)] != op.table[0]) return;
                continue;
            }
            std::vector<std::size_t> idx(static_cast<std::size_t>(op.arity), 0);
            if (s == 0) continue;
            bool done = false;
            while (!done) {
                Tuple result(static_cast<std::size_t>(r.arity));
                Tuple args(static_cast<std::size_t>(op.arity));
                Tuple vargs(static_cast<std::size_t>(op.arity));
                for (int c = 0; c < r.arity; ++c) {
                    for (int j = 0; j < op.arity; ++j)
                        args[static_cast<std::size_t>(j)] =
                            r.tuples[idx[static_cast<std::size_t>(j)]][static_cast<std::size_t>(c)];
                    result[static_cast<std::size_t>(c)] = op.apply(args, m);
                }
                for (int j = 0; j < op.arity; ++j)
                    vargs[static_cast<std::size_t>(j)] = assignment[idx[static_cast<std::size_t>(j)]];
                if (op.apply(vargs, m) != assignment[index.at(result)]) return;
                int pos = op.arity - 1;
                while (pos >= 0 && idx[static_cast<std::size_t>(pos)] + 1 == s) {
                    idx[static_cast<std::size_t>(pos)] = 0;
                    --pos;
                }
                if (pos < 0)
                    done = true;
                else
                    ++idx[static_cast<std::size_t>(pos)];
            }
        }
        PartialOperation h;
        h.carrier = alg.carrier;
        h.arity = r.arity;
        h.domain = r;
        h.values = assignment;
        homs.push_back(std::move(h));
    });
    std::sort(homs.begin(), homs.end(),
              [](const PartialOperation& a, const PartialOperation& b) {
                  return a.values < b.values;
              });
    return homs;
}

// ---------------------------------------------------------------------------
// Powers and structure morphisms
// ---------------------------------------------------------------------------

inline FiniteStructure build_power(const FiniteStructure& x, int k) {
    if (k < 1) throw InputError("build_power: only non-zero powers are allowed");
    if (k == 1) return x;
    const std::size_t n = x.size();
    std::vector<std::string> labels;
    labels.reserve(pow_size(n, k));
    for_each_tuple(n, k, [&](const Tuple& t) {
        std::string lbl = "(";
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) lbl += ",";
            lbl += x.carrier->name(t[i]);
        }
        lbl += ")";
        labels.push_back(std::move(lbl));
    });
    FiniteStructure p;
    p.name = x.name + "^" + std::to_string(k);
    p.carrier = make_carrier(std::move(labels));
    const std::size_t pn = p.carrier->size();

    for (const auto& h : x.ops) {
        PartialOperation ph;
        ph.name = h.name;
        ph.carrier = p.carrier;
        ph.arity = h.arity;
        ph.domain.carrier = p.carrier;
        ph.domain.arity = h.arity;
        // A tuple of power-elements is in the domain iff every coordinate is.
        for_each_tuple(pn, h.arity, [&](const Tuple& args) {
            Tuple value_tuple(static_cast<std::size_t>(k));
            Tuple coord_args(static_cast<std::size_t>(h.arity));
            for (int c = 0; c < k; ++c) {
                for (int j = 0; j < h.arity; ++j) {
                    Tuple decoded = decode_tuple(args[static_cast<std::size_t>(j)], n, k);
                    coord_args[static_cast<std::size_t>(j)] = decoded[static_cast<std::size_t>(c)];
                }
                auto v = h.apply(coord_args);
                if (!v) return;
                value_tuple[static_cast<std::size_t>(c)] = *v;
            }
            ph.domain.tuples.push_back(args);
            ph.values.push_back(static_cast<Elem>(encode_tuple(value_tuple, n)));
        });
        p.ops.push_back(std::move(ph));
    }
    for (const auto& r : x.rels) {
        Relation pr;
        pr.name = r.name;
        pr.carrier = p.carrier;
        pr.arity = r.arity;
        for_each_tuple(pn, r.arity, [&](const Tuple& args) {
            Tuple coord(static_cast<std::size_t>(r.arity));
            for (int c = 0; c < k; ++c) {
                for (int j = 0; j < r.arity; ++j) {
                    Tuple decoded = decode_tuple(args[static_cast<std::size_t>(j)], n, k);
                    coord[static_cast<std::size_t>(j)] = decoded[static_cast<std::size_t>(c)];
                }
                if (!r.contains(coord)) return;
            }
            pr.tuples.push_back(args);
        });
        p.rels.push_back(std::move(pr));
    }
    return p;
}

// All structure morphisms X -> Y (maps preserving relations tuple-wise and
// partial operations where defined), in the canonical order.
inline std::vector<std::vector<Elem>> structure_homs(const FiniteStructure& x,
                                                     const FiniteStructure& y,
                                                     std::size_t abort_above = 0) {
    if (!same_signature(x.signature(), y.signature()))
        throw InputError("structure_homs: signature mismatch");
    const std::size_t s = x.size();
    const std::size_t m = y.size();

    // Constraint instances grouped by their largest involved point.
    struct RelInstance {
        const Relation* target;
        std::vector<std::size_t> points;
    };
    struct OpInstance {
        const PartialOperation* target;
        std::vector<std::size_t> args;
        std::size_t result;
    };
    std::vector<std::vector<RelInstance>> rel_by_max(std::max<std::size_t>(s, 1));
    std::vector<std::vector<OpInstance>> op_by_max(std::max<std::size_t>(s, 1));
    for (std::size_t ri = 0; ri < x.rels.size(); ++ri) {
        const Relation& rx = x.rels[ri];
        const Relation& ry = y.rels[ri];
        for (const auto& t : rx.tuples) {
            std::vector<std::size_t> pts(t.begin(), t.end());
            std::size_t mx = 0;
            for (std::size_t p : pts) mx = std::max(mx, p);
            rel_by_max[mx].push_back(RelInstance{&ry, std::move(pts)});
        }
    }
    for (std::size_t oi = 0; oi < x.ops.size(); ++oi) {
        const PartialOperation& hx = x.ops[oi];
        const PartialOperation& hy = y.ops[oi];
        for (std::size_t d = 0; d < hx.domain.tuples.size(); ++d) {
            const Tuple& t = hx.domain.tuples[d];
            std::vector<std::size_t> args(t.begin(), t.end());
            std::size_t result = hx.values[d];
            std::size_t mx = result;
            for (std::size_t p : args) mx = std::max(mx, p);
            op_by_max[mx].push_back(OpInstance{&hy, std::move(args), result});
        }
    }

    std::vector<Elem> val(s, 0);
    Tuple image;
    auto check = [&](std::size_t point) {
        for (const auto& inst : rel_by_max[point]) {
            image.clear();
            for (std::size_t p : inst.points) image.push_back(val[p]);
            if (!inst.target->contains(image)) return false;
        }
        for (const auto& inst : op_by_max[point]) {
            image.clear();
            for (std::size_t p : inst.args) image.push_back(val[p]);
            auto v = inst.target->apply(image);
            if (!v || *v != val[inst.result]) return false;
        }
        return true;
    };

    std::vector<std::vector<Elem>> out;
    auto emit = [&](const std::vector<Elem>& assignment) {
        out.push_back(assignment);
        return abort_above == 0 || out.size() <= abort_above;
    };
    detail::search_assignments(s, m, check, emit, val);
    if (abort_above != 0 && out.size() > abort_above)
        throw BoundExceeded("structure_homs: more than " + std::to_string(abort_above) +
                            " morphisms");
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration of subuniverses and substructures
// ---------------------------------------------------------------------------

// All subuniverses of M^arity (including the empty one when the signature has
// no nullary operations), via closure-lattice breadth-first search.
inline std::vector<Relation> all_subuniverses(const FiniteAlgebra& alg, int arity) {
    std::set<std::vector<Tuple>> seen;
    std::vector<Relation> out;
    std::vector<Relation> frontier;

    Relation bottom = subuniverse_closure(alg, arity, {});
    seen.insert(bottom.tuples);
    out.push_back(bottom);
    frontier.push_back(std::move(bottom));

    std::vector<Tuple> universe;
    for_each_tuple(alg.size(), arity, [&](const Tuple& t) { universe.push_back(t); });

    while (!frontier.empty()) {
        std::vector<Relation> next;
        for (const auto& sub : frontier) {
            for (const auto& t : universe) {
                if (sub.contains(t)) continue;
                std::vector<Tuple> gens = sub.tuples;
                gens.push_back(t);
                Relation bigger = subuniverse_closure(alg, arity, gens);
                if (seen.insert(bigger.tuples).second) {
                    out.push_back(bigger);
                    next.push_back(std::move(bigger));
                }
            }
        }
        frontier = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// All subsets of X closed under its partial operations (the substructure
// carriers), each returned as the induced substructure.
inline FiniteStructure induced_substructure(const FiniteStructure& x,
                                            const std::vector<Elem>& subset) {
    std::vector<std::string> labels;
    std::vector<int> reindex(x.size(), -1);
    for (std::size_t i = 0; i < subset.size(); ++i) {
        labels.push_back(x.carrier->name(subset[i]));
        reindex[subset[i]] = static_cast<int>(i);
    }
    FiniteStructure s;
    s.name = x.name + "|sub";
    s.carrier = make_carrier(std::move(labels));
    for (const auto& h : x.ops) {
        PartialOperation hs;
        hs.name = h.name;
        hs.carrier = s.carrier;
        hs.arity = h.arity;
        hs.domain.carrier = s.carrier;
        hs.domain.arity = h.arity;
        for (std::size_t d = 0; d < h.domain.tuples.size(); ++d) {
            const Tuple& t = h.domain.tuples[d];
            bool inside = std::all_of(t.begin(), t.end(),
                                      [&](Elem e) { return reindex[e] >= 0; });
            if (!inside || reindex[h.values[d]] < 0) continue;
            Tuple mapped(t.size());
            for (std::size_t j = 0; j < t.size(); ++j)
                mapped[j] = static_cast<Elem>(reindex[t[j]]);
            hs.domain.tuples.push_back(std::move(mapped));
            hs.values.push_back(static_cast<Elem>(reindex[h.values[d]]));
        }
        s.ops.push_back(std::move(hs));
    }
    for (const auto& r : x.rels) {
        Relation rs;
        rs.name = r.name;
        rs.carrier = s.carrier;
        rs.arity = r.arity;
        for (const auto& t : r.tuples) {
            bool inside = std::all_of(t.begin(), t.end(),
                                      [&](Elem e) { return reindex[e] >= 0; });
            if (!inside) continue;
            Tuple mapped(t.size());
            for (std::size_t j = 0; j < t.size(); ++j)
                mapped[j] = static_cast<Elem>(reindex[t[j]]);
            rs.tuples.push_back(std::move(mapped));
        }
        rs.canonicalize();
        s.rels.push_back(std::move(rs));
    }
    return s;
}

// Closes a subset of X's carrier under the partial operations (values of
// defined instances must be present).
inline std::vector<Elem> substructure_closure(const FiniteStructure& x,
                                              std::vector<Elem> subset) {
    std::vector<bool> in(x.size(), false);
    for (Elem e : subset) in[e] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& h : x.ops) {
            for (std::size_t d = 0; d < h.domain.tuples.size(); ++d) {
                const Tuple& t = h.domain.tuples[d];
                bool inside = std::all_of(t.begin(), t.end(), [&](Elem e) { return in[e]; });
                if (inside && !in[h.values[d]]) {
                    in[h.values[d]] = true;
                    changed = true;
                }
            }
        }
    }
    std::vector<Elem> out;
    for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i]) out.push_back(static_cast<Elem>(i));
    return out;
}

// Carriers of all substructures of X (subsets closed under the partial
// operations), smallest first. Includes the empty carrier when closed.
inline std::vector<std::vector<Elem>> all_substructure_carriers(const FiniteStructure& x) {
    std::set<std::vector<Elem>> seen;
    std::vector<std::vector<Elem>> frontier;
    std::vector<Elem> bottom = substructure_closure(x, {});
    seen.insert(bottom);
    frontier.push_back(bottom);
    while (!frontier.empty()) {
        std::vector<std::vector<Elem>> next;
        for (const auto& sub : frontier) {
            for (std::size_t e = 0; e < x.size(); ++e) {
                if (std::binary_search(sub.begin(), sub.end(), static_cast<Elem>(e))) continue;
                std::vector<Elem> gens = sub;
                gens.push_back(static_cast<Elem>(e));
                std::vector<Elem> closed = substructure_closure(x, std::move(gens));
                if (seen.insert(closed).second) next.push_back(std::move(closed));
            }
        }
        frontier = std::move(next);
    }
    std::vector<std::vector<Elem>> out(seen.begin(), seen.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

}  // namespace dualize

#pragma once

#include "dualize/uhlogic.hpp"

namespace dualize {

// Built-in fixtures: the three-element bounded lattice with its alter egos
// f/g/sigma/h, the four-element discriminator algebra Q with its alter egos,
// and the universal Horn bases used by the transfer machinery. Payloads are
// validated on load.

struct Fixture {
    std::string name;
    std::string notes;
    std::optional<FiniteAlgebra> algebra;
    std::optional<AlterEgo> ego;
    std::vector<SentenceGroup> sentences;
};

namespace catalog {

inline FiniteAlgebra three() {
    FiniteAlgebra alg;
    alg.name = "three";
    alg.carrier = make_carrier({"0", "a", "1"});
    const std::size_t n = 3;
    Operation join{"join", 2, {}}, meet{"meet", 2, {}};
    for_each_tuple(n, 2, [&](const Tuple& t) {
        join.table.push_back(std::max(t[0], t[1]));
        meet.table.push_back(std::min(t[0], t[1]));
    });
    alg.ops = {join, meet, Operation{"zero", 0, {0}}, Operation{"one", 0, {2}}};
    alg.validate();
    return alg;
}

inline FiniteAlgebra big_q() {
    FiniteAlgebra alg;
    alg.name = "Q";
    alg.carrier = make_carrier({"0", "a", "b", "1"});
    const std::size_t n = 4;
    Operation t{"t", 3, {}}, join{"join", 2, {}}, meet{"meet", 2, {}};
    for_each_tuple(n, 3, [&](const Tuple& tu) {
        t.table.push_back(tu[0] != tu[1] ? tu[0] : tu[2]);
    });
    for_each_tuple(n, 2, [&](const Tuple& tu) {
        join.table.push_back(std::max(tu[0], tu[1]));
        meet.table.push_back(std::min(tu[0], tu[1]));
    });
    alg.ops = {t, join, meet, Operation{"zero", 0, {0}}, Operation{"one", 0, {3}}};
    alg.validate();
    return alg;
}

inline PartialOperation pop_from_pairs(const FiniteAlgebra& alg, std::string name, int arity,
                                       std::vector<std::pair<Tuple, Elem>> entries) {
    PartialOperation h;
    h.name = std::move(name);
    h.carrier = alg.carrier;
    h.arity = arity;
    h.domain.carrier = alg.carrier;
    h.domain.arity = arity;
    std::sort(entries.begin(), entries.end());
    for (auto& [t, v] : entries) {
        h.domain.tuples.push_back(t);
        h.values.push_back(v);
    }
    return h;
}

// f and g: the retractions of the three-element chain onto {0,1}.
inline PartialOperation three_f(const FiniteAlgebra& alg) {
    return pop_from_pairs(alg, "f", 1, {{{0}, 0}, {{1}, 0}, {{2}, 2}});
}
inline PartialOperation three_g(const FiniteAlgebra& alg) {
    return pop_from_pairs(alg, "g", 1, {{{0}, 0}, {{1}, 2}, {{2}, 2}});
}
// sigma: the partial binary operation on dom {00, 01, 11} hitting a at (0,1).
inline PartialOperation three_sigma_op(const FiniteAlgebra& alg) {
    return pop_from_pairs(alg, "sigma", 2, {{{0, 0}, 0}, {{0, 2}, 1}, {{2, 2}, 2}});
}
// h: the partial binary operation on the four-chain dom {00, 0a, a1, 11}.
inline PartialOperation three_h_op(const FiniteAlgebra& alg) {
    return pop_from_pairs(alg, "h", 2, {{{0, 0}, 0}, {{0, 1}, 1}, {{1, 2}, 1}, {{2, 2}, 2}});
}

// The partial automorphisms of Q: f sends a to b on {0,a,1}; g sends b to a
// on {0,b,1}.
inline PartialOperation q_f(const FiniteAlgebra& alg) {
    return pop_from_pairs(alg, "f", 1, {{{0}, 0}, {{1}, 2}, {{3}, 3}});
}
inline PartialOperation q_g(const FiniteAlgebra& alg) {
    return pop_from_pairs(alg, "g", 1, {{{0}, 0}, {{2}, 1}, {{3}, 3}});
}

inline AlterEgo three0() {
    AlterEgo e;
    e.name = "three0";
    e.base = three();
    e.h = {three_f(e.base), three_g(e.base)};
    e.validate();
    return e;
}

inline AlterEgo three_sigma() {
    AlterEgo e;
    e.name = "three_sigma";
    e.base = three();
    e.h = {three_f(e.base), three_g(e.base), three_sigma_op(e.base)};
    e.validate();
    return e;
}

inline AlterEgo three_h() {
    AlterEgo e;
    e.name = "three_h";
    e.base = three();
    e.h = {three_f(e.base), three_g(e.base), three_h_op(e.base)};
    e.validate();
    return e;
}

inline AlterEgo q0() {
    AlterEgo e;
    e.name = "Q0";
    e.base = big_q();
    Relation graph_f = q_f(e.base).graph();
    graph_f.name = "graph_f";
    e.r = {graph_f};
    e.validate();
    return e;
}

inline AlterEgo q1() {
    AlterEgo e;
    e.name = "Q1";
    e.base = big_q();
    e.h = {q_f(e.base), q_g(e.base)};
    e.validate();
    return e;
}

inline std::vector<SentenceGroup> sigma_basis_three() {
    Signature sig = three_sigma().signature();
    std::vector<std::pair<std::string, std::string>> lines = {
        {"1", "! v : -> f(v) = f(f(v)) = g(f(v)) & g(v) = f(g(v)) = g(g(v))"},
        {"2", "! u v w : f(w)=u & g(w)=v <-> sigma(u,v)=w"},
        {"3", "! u v : def sigma(u,v) & def sigma(v,u) -> u=v"},
        {"4", "! u v w x y : f(x)=u & g(x)=v & f(y)=v & g(y)=w -> def sigma(u,w)"},
    };
    std::vector<SentenceGroup> out;
    for (const auto& [name, text] : lines) out.push_back(parse_sentence_group(text, sig, name));
    return out;
}

inline std::vector<SentenceGroup> basis_q1() {
    Signature sig = q1().signature();
    std::vector<std::pair<std::string, std::string>> lines = {
        {"1", "! u v : f(u)=v -> g(v)=u"},
        {"2", "! u v : g(u)=v -> f(v)=u"},
        {"3", "! u v w : f(u)=v & f(v)=w -> u=v"},
    };
    std::vector<SentenceGroup> out;
    for (const auto& [name, text] : lines) out.push_back(parse_sentence_group(text, sig, name));
    return out;
}

}  // namespace catalog

inline std::vector<std::string> fixture_names() {
    return {"three",  "three0", "three_sigma",       "three_h", "Q",
            "Q0",     "Q1",     "sigma_basis_three", "basis_Q1"};
}

inline Fixture load_fixture(const std::string& name) {
    Fixture f;
    f.name = name;
    if (name == "three") {
        f.algebra = catalog::three();
        f.notes = "the three-element bounded lattice 0 < a < 1";
    } else if (name == "Q") {
        f.algebra = catalog::big_q();
        f.notes = "the four-element bounded chain 0 < a < b < 1 with the ternary discriminator";
    } else if (name == "three0") {
        f.ego = catalog::three0();
        f.notes = "alter ego of three with the endomorphisms f and g";
    } else if (name == "three_sigma") {
        f.ego = catalog::three_sigma();
        f.notes = "alter ego of three with f, g and the partial operation sigma";
    } else if (name == "three_h") {
        f.ego = catalog::three_h();
        f.notes = "alter ego of three with f, g and the partial operation h";
    } else if (name == "Q0") {
        f.ego = catalog::q0();
        f.notes = "alter ego of Q with the single relation graph_f";
    } else if (name == "Q1") {
        f.ego = catalog::q1();
        f.notes = "alter ego of Q with the partial automorphisms f and g";
    } else if (name == "sigma_basis_three") {
        f.sentences = catalog::sigma_basis_three();
        f.notes = "universal Horn basis for the dual class of three_sigma";
    } else if (name == "basis_Q1") {
        f.sentences = catalog::basis_q1();
        f.notes = "universal Horn basis for the dual class of Q1";
    } else {
        throw InputError("unknown fixture '" + name + "'");
    }
    return f;
}

// The structure on M interpreting the given compatible partial operations
// and relations as themselves (a bounded fragment of the top alter ego).
inline FiniteStructure omega_fragment(const FiniteAlgebra& alg,
                                      std::vector<PartialOperation> ops,
                                      std::vector<Relation> rels = {}) {
    FiniteStructure x;
    x.name = alg.name + "_omega";
    x.carrier = alg.carrier;
    x.ops = std::move(ops);
    x.rels = std::move(rels);
    x.validate();
    return x;
}

}  // namespace dualize

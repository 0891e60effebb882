#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "dualize/catalog.hpp"

namespace dualize::testing {

// Tuples written as strings of single-character element names, e.g. "0010a".
inline Tuple tup(const CarrierPtr& carrier, const std::string& s) {
    Tuple t;
    for (char c : s) {
        int idx = carrier->index_of(std::string(1, c));
        REQUIRE(idx >= 0);
        t.push_back(static_cast<Elem>(idx));
    }
    return t;
}

inline Relation rel(const CarrierPtr& carrier, int arity, std::vector<std::string> rows,
                    std::string name = "") {
    std::vector<Tuple> tuples;
    for (const auto& row : rows) {
        Tuple t = tup(carrier, row);
        REQUIRE(static_cast<int>(t.size()) == arity);
        tuples.push_back(std::move(t));
    }
    return Relation::of(carrier, arity, std::move(tuples), std::move(name));
}

inline std::string show(const CarrierPtr& carrier, const Tuple& t) {
    std::string s;
    for (Elem e : t) s += carrier->name(e);
    return s;
}

// The five-ary premise relation of the fourth basis sentence, used across
// the duality pipeline tests.
inline Relation r5(const FiniteAlgebra& three) {
    return rel(three.carrier, 5, {"00000", "0010a", "011a1", "11111"}, "r5");
}

}  // namespace dualize::testing

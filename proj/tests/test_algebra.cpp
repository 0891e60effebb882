#include "test_helpers.hpp"

using namespace dualize;
using namespace dualize::testing;

TEST_CASE("is_subuniverse on the three-element lattice") {
    FiniteAlgebra three = catalog::three();
    auto C = three.carrier;

    SECTION("the graph of sigma is compatible") {
        Relation graph_sigma = catalog::three_sigma_op(three).graph();
        REQUIRE(is_subuniverse(three, graph_sigma));
    }
    SECTION("{0,1} is a subuniverse") {
        REQUIRE(is_subuniverse(three, rel(C, 1, {"0", "1"})));
    }
    SECTION("{(0,1),(1,0)} is not closed under meet") {
        REQUIRE_FALSE(is_subuniverse(three, rel(C, 2, {"01", "10"})));
    }
    SECTION("empty relation fails closure because of the nullary constants") {
        REQUIRE_FALSE(is_subuniverse(three, rel(C, 2, {})));
    }
    SECTION("carrier mismatch is an input error") {
        FiniteAlgebra q = catalog::big_q();
        REQUIRE_THROWS_AS(is_subuniverse(three, rel(q.carrier, 1, {"b"})), InputError);
    }
}

TEST_CASE("subuniverse_closure") {
    FiniteAlgebra three = catalog::three();
    auto C = three.carrier;

    SECTION("closure of {a} adds the bounds") {
        Relation r = subuniverse_closure(three, 1, {tup(C, "a")});
        REQUIRE(r == rel(C, 1, {"0", "a", "1"}));
    }
    SECTION("closure of nothing is the constants") {
        Relation r = subuniverse_closure(three, 1, {});
        REQUIRE(r == rel(C, 1, {"0", "1"}));
    }
    SECTION("the full power is already closed") {
        Relation full = Relation::full(C, 2);
        REQUIRE(subuniverse_closure(three, 2, full.tuples) == full);
    }
    SECTION("every closure is a subuniverse") {
        for (std::size_t code = 0; code < 64; code += 7) {
            std::vector<Tuple> gens;
            for_each_tuple(3, 2, [&](const Tuple& t) {
                if ((encode_tuple(t, 3) * 31 + code) % 3 == 0) gens.push_back(t);
            });
            REQUIRE(is_subuniverse(three, subuniverse_closure(three, 2, gens)));
        }
    }
}

TEST_CASE("hom_set enumeration") {
    FiniteAlgebra three = catalog::three();
    auto C = three.carrier;

    SECTION("the five-ary four-chain has six homomorphisms") {
        REQUIRE(hom_set(three, r5(three)).size() == 6);
    }
    SECTION("endomorphisms of the chain come out as f, id, g") {
        auto homs = hom_set(three, rel(C, 1, {"0", "a", "1"}));
        REQUIRE(homs.size() == 3);
        REQUIRE(homs[0].values == tup(C, "001"));  // f
        REQUIRE(homs[1].values == tup(C, "0a1"));  // id
        REQUIRE(homs[2].values == tup(C, "011"));  // g
    }
    SECTION("{0,1} admits only the inclusion") {
        auto homs = hom_set(three, rel(C, 1, {"0", "1"}));
        REQUIRE(homs.size() == 1);
        REQUIRE(homs[0].values == tup(C, "01"));
    }
    SECTION("non-subuniverse input is rejected") {
        REQUIRE_THROWS_AS(hom_set(three, rel(C, 2, {"01", "10"})), InputError);
    }
}

TEST_CASE("hom_set agrees with the filter-all-maps oracle") {
    for (const auto& alg : {catalog::three(), catalog::big_q()}) {
        for (int arity = 1; arity <= 2; ++arity) {
            for (const auto& sub : all_subuniverses(alg, arity)) {
                if (sub.empty() || sub.size() > 8) continue;
                auto fast = hom_set(alg, sub);
                auto slow = hom_set_bruteforce(alg, sub);
                REQUIRE(fast.size() == slow.size());
                for (std::size_t i = 0; i < fast.size(); ++i)
                    REQUIRE(fast[i].values == slow[i].values);
            }
        }
    }
}

TEST_CASE("every hom from a full power is a compatible total operation") {
    FiniteAlgebra three = catalog::three();
    Relation full = Relation::full(three.carrier, 2);
    for (const auto& h : hom_set(three, full)) {
        REQUIRE(h.is_total());
        REQUIRE(is_subuniverse(three, h.graph()));
    }
}

TEST_CASE("build_power") {
    AlterEgo th = catalog::three_h();
    FiniteStructure x = th.as_structure();

    SECTION("first power is the structure itself") {
        FiniteStructure p = build_power(x, 1);
        REQUIRE(p.size() == x.size());
        REQUIRE(p.ops[0].domain == x.ops[0].domain);
    }
    SECTION("square has nine elements") {
        REQUIRE(build_power(x, 2).size() == 9);
    }
    SECTION("dom h in the square is the square of dom h") {
        FiniteStructure p = build_power(x, 2);
        const PartialOperation* h = p.find_op("h");
        REQUIRE(h != nullptr);
        REQUIRE(h->domain.size() == 16);
    }
    SECTION("zeroth power is rejected") {
        REQUIRE_THROWS_AS(build_power(x, 0), InputError);
    }
    SECTION("a square is the product of two copies under the index bijection") {
        FiniteStructure p2 = build_power(x, 2);
        // Check the h-domain matches the coordinatewise product directly.
        const PartialOperation* h2 = p2.find_op("h");
        const PartialOperation* h = x.find_op("h");
        const std::size_t n = x.size();
        for_each_tuple(n * n, 2, [&](const Tuple& t) {
            Tuple a = decode_tuple(t[0], n, 2), b = decode_tuple(t[1], n, 2);
            bool coord = h->defined_on({a[0], b[0]}) && h->defined_on({a[1], b[1]});
            REQUIRE(h2->defined_on(t) == coord);
        });
    }
}

TEST_CASE("structure_homs") {
    SECTION("a free point of Q0 admits all four maps") {
        AlterEgo q0 = catalog::q0();
        FiniteStructure m = q0.as_structure();
        int a = m.carrier->index_of("a");
        FiniteStructure x = induced_substructure(m, {static_cast<Elem>(a)});
        REQUIRE(structure_homs(x, m).size() == 4);
    }
    SECTION("identity is always a morphism") {
        for (const auto& name : {"three0", "three_h", "Q0", "Q1"}) {
            FiniteStructure m = load_fixture(name).ego->as_structure();
            std::vector<Elem> id;
            for (std::size_t i = 0; i < m.size(); ++i) id.push_back(static_cast<Elem>(i));
            auto homs = structure_homs(m, m);
            REQUIRE(std::find(homs.begin(), homs.end(), id) != homs.end());
        }
    }
    SECTION("endomorphisms of three_h agree with the 27-map brute force") {
        FiniteStructure m = catalog::three_h().as_structure();
        auto homs = structure_homs(m, m);
        std::vector<std::vector<Elem>> expected;
        for_each_tuple(3, 3, [&](const Tuple& candidate) {
            std::vector<Elem> mu(candidate.begin(), candidate.end());
            for (const auto& h : m.ops) {
                for (std::size_t d = 0; d < h.domain.tuples.size(); ++d) {
                    Tuple image;
                    for (Elem e : h.domain.tuples[d]) image.push_back(mu[e]);
                    auto v = h.apply(image);
                    if (!v || *v != mu[h.values[d]]) return;
                }
            }
            expected.push_back(std::move(mu));
        });
        REQUIRE(homs == expected);
    }
    SECTION("morphisms compose contravariantly into hom computations") {
        AlterEgo th = catalog::three_h();
        FiniteStructure m = th.as_structure();
        FiniteStructure p = build_power(m, 2);
        auto subs = all_substructure_carriers(p);
        // Pick a mid-sized substructure and check composition stability.
        for (const auto& carrier : subs) {
            if (carrier.size() < 2 || carrier.size() > 4) continue;
            FiniteStructure x = induced_substructure(p, carrier);
            auto into_m = structure_homs(x, m);
            for (const auto& mu : structure_homs(x, x)) {
                for (const auto& u : into_m) {
                    std::vector<Elem> composed;
                    for (std::size_t i = 0; i < x.size(); ++i) composed.push_back(u[mu[i]]);
                    // u o mu must again be a morphism x -> m.
                    REQUIRE(std::find(into_m.begin(), into_m.end(), composed) != into_m.end());
                }
            }
            break;
        }
    }
    SECTION("signature mismatch is rejected") {
        FiniteStructure a = catalog::three0().as_structure();
        FiniteStructure b = catalog::q0().as_structure();
        REQUIRE_THROWS_AS(structure_homs(a, b), InputError);
    }
}

TEST_CASE("all_subuniverses finds the classical counts") {
    FiniteAlgebra three = catalog::three();
    auto unary = all_subuniverses(three, 1);
    // Subuniverses of the chain containing 0 and 1: {0,1} and {0,a,1}.
    REQUIRE(unary.size() == 2);
    for (const auto& sub : all_subuniverses(three, 2)) REQUIRE(is_subuniverse(three, sub));
}

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualize {

// Elements are indices into a carrier's name list. Carriers are tiny
// (|M| <= 8 in practice), so everything is index-based and value-typed.
using Elem = std::uint8_t;
using Tuple = std::vector<Elem>;

struct Carrier {
    std::vector<std::string> names;

    std::size_t size() const { return names.size(); }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    const std::string& name(Elem e) const { return names.at(e); }

    bool operator==(const Carrier& other) const { return names == other.names; }
};

using CarrierPtr = std::shared_ptr<const Carrier>;

inline CarrierPtr make_carrier(std::vector<std::string> names) {
    return std::make_shared<const Carrier>(Carrier{std::move(names)});
}

inline bool same_carrier(const CarrierPtr& a, const CarrierPtr& b) {
    return a == b || (a && b && *a == *b);
}

// User-input violations: malformed files, arity mismatches, bad preconditions.
// The CLI maps these to exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A bounded search (clone materialisation, dual-size guard) ran out of room.
// Distinct from `false`: the CLI maps these to exit code 3.
struct BoundExceeded : std::runtime_error {
    explicit BoundExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Row-major mixed-radix encoding of tuples over a carrier of size m.
inline std::size_t pow_size(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

inline std::size_t encode_tuple(const Tuple& t, std::size_t base) {
    std::size_t code = 0;
    for (Elem e : t) code = code * base + e;
    return code;
}

inline Tuple decode_tuple(std::size_t code, std::size_t base, int arity) {
    Tuple t(static_cast<std::size_t>(arity));
    for (int i = arity - 1; i >= 0; --i) {
        t[static_cast<std::size_t>(i)] = static_cast<Elem>(code % base);
        code /= base;
    }
    return t;
}

// Enumerates all tuples of the given arity over {0..base-1} in lexicographic
// order, invoking f on each.
template <class F>
void for_each_tuple(std::size_t base, int arity, F&& f) {
    Tuple t(static_cast<std::size_t>(arity), 0);
    if (arity == 0) {
        f(t);
        return;
    }
    if (base == 0) return;
    while (true) {
        f(t);
        int pos = arity - 1;
        while (pos >= 0 && t[static_cast<std::size_t>(pos)] + 1u == base) {
            t[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++t[static_cast<std::size_t>(pos)];
    }
}

}  // namespace dualize

// Shared constructions for the test suites: the example involution families,
// written out directly so the spec files are cross-checked against an
// independent transcription.
#pragma once

#include <random>
#include <vector>

#include "fstruct/torus.hpp"

namespace testutil {

using fstruct::AffineMap;
using fstruct::Rational;
using fstruct::TorusPoint;

inline AffineMap make_map(const std::vector<int>& signs, const std::vector<Rational>& shift) {
    AffineMap m;
    m.signs = signs;
    m.shift = TorusPoint(shift);
    return m;
}

inline Rational half() { return Rational(1, 2); }

// x -> -x on T^4
inline std::vector<AffineMap> k3_gens() {
    return {make_map({-1, -1, -1, -1}, {0, 0, 0, 0})};
}

// the four commuting involutions of T^8
inline std::vector<AffineMap> j8_gens() {
    Rational h = half();
    return {
        make_map({-1, -1, -1, -1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0, 0}),
        make_map({1, 1, 1, 1, -1, -1, -1, -1}, {0, 0, 0, 0, 0, 0, 0, 0}),
        make_map({-1, -1, 1, 1, -1, -1, 1, 1}, {h, h, 0, 0, h, h, 0, 0}),
        make_map({-1, 1, -1, 1, -1, 1, -1, 1}, {0, 0, h, 0, h, 0, h, 0}),
    };
}

// the three commuting involutions of T^7
inline std::vector<AffineMap> g2_gens() {
    Rational h = half();
    return {
        make_map({-1, -1, -1, -1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0}),
        make_map({-1, -1, 1, 1, -1, -1, 1}, {0, h, 0, 0, 0, 0, 0}),
        make_map({-1, 1, -1, 1, -1, 1, -1}, {h, 0, h, 0, 0, 0, 0}),
    };
}

// the two commuting involutions of T^6
inline std::vector<AffineMap> cy3_gens() {
    Rational h = half();
    return {
        make_map({-1, -1, -1, -1, 1, 1}, {0, 0, 0, 0, 0, 0}),
        make_map({-1, -1, 1, 1, -1, -1}, {h, 0, 0, 0, 0, 0}),
    };
}

struct RatRng {
    std::mt19937_64 g;
    explicit RatRng(unsigned long seed = 12345) : g(seed) {}
    Rational rat() { return Rational(static_cast<long>(g() % 509), 509); }
    TorusPoint point(int dim) {
        std::vector<Rational> c(dim);
        for (auto& q : c) q = rat();
        return TorusPoint(std::move(c));
    }
};

}  // namespace testutil

// Exact arithmetic on flat tori: points, sign-diagonal affine isometries,
// finite group closure, fixed-locus stratification and slab algebra.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fstruct/rational.hpp"

namespace fstruct {

// Point of T^n = R^n/Z^n, coordinates canonicalized into [0, 1).
struct TorusPoint {
    std::vector<Rational> coords;

    TorusPoint() = default;
    explicit TorusPoint(std::vector<Rational> c);

    int dim() const { return static_cast<int>(coords.size()); }
    bool operator==(const TorusPoint& o) const { return coords == o.coords; }
    bool operator<(const TorusPoint& o) const;
    std::string str() const;
};

// x |-> signs (.) x + shift (mod 1), with signs in {+1, -1}^n.
struct AffineMap {
    std::vector<int> signs;
    TorusPoint shift;

    int dim() const { return static_cast<int>(signs.size()); }
    TorusPoint apply(const TorusPoint& x) const;
    bool is_identity() const;
    bool operator==(const AffineMap& o) const { return signs == o.signs && shift == o.shift; }
    bool operator<(const AffineMap& o) const;

    static AffineMap identity(int n);
};

// f o g, so (f*g)(x) = f(g(x)).
AffineMap compose(const AffineMap& f, const AffineMap& g);
AffineMap inverse(const AffineMap& f);
bool is_involution(const AffineMap& f);

// Coordinate subtorus { x : x_i = fixed.at(i) for i in keys(fixed) }, 0-based coords.
struct Slab {
    int dim = 0;
    std::map<int, Rational> fixed;

    int free_dim() const { return dim - static_cast<int>(fixed.size()); }
    std::vector<int> free_coords() const;
    bool operator==(const Slab& o) const { return dim == o.dim && fixed == o.fixed; }
    bool operator<(const Slab& o) const;
    // Point with the fixed values and `filler` on every free coordinate.
    TorusPoint sample_point(const Rational& filler = Rational(0)) const;
    bool contains(const TorusPoint& x) const;
    std::string str() const;
};

struct FixedLocus {
    std::vector<Slab> components;  // sorted, pairwise disjoint, equal free sets
    bool empty() const { return components.empty(); }
};

// Components of Fix(f): per coordinate, sign +1 needs shift 0 (free coordinate),
// sign -1 contributes the two solutions shift/2 and shift/2 + 1/2.
FixedLocus fixed_locus(const AffineMap& f);

// Image of a slab under a sign-diagonal map (free set is preserved).
Slab map_slab(const AffineMap& f, const Slab& s);

struct FiniteGroup {
    std::vector<AffineMap> elements;              // identity first
    std::vector<std::vector<int>> table;          // table[i][j] = index of elements[i] o elements[j]
    std::vector<int> generator_indices;
    std::vector<std::vector<int>> words;          // factorization of each element over generator_indices

    int order() const { return static_cast<int>(elements.size()); }
    int index_of(const AffineMap& g) const;       // -1 if absent
    int mul(int i, int j) const { return table[i][j]; }
    int inv(int i) const;
    bool is_abelian() const;
    // (Z_2)^k detection: abelian with every non-identity element an involution.
    std::optional<int> elementary_abelian_rank() const;
    // Indices of the subgroup generated by the given element indices.
    std::vector<int> subgroup(const std::vector<int>& gens) const;
};

// Closure under composition; throws spec_error when the bound is exceeded.
FiniteGroup group_closure(const std::vector<AffineMap>& generators, int element_bound = 4096);

// Orbit partition of the index set {0..components-1}; throws spec_error naming the
// offending element and component when the list is not stable under the action.
std::vector<std::vector<int>> component_orbits(const FiniteGroup& group,
                                               const std::vector<Slab>& components,
                                               const std::vector<int>& element_indices = {});

std::optional<Slab> intersect_slabs(const Slab& a, const Slab& b);

// Sum over `coords` (0-based) of squared circle distances; exact.
Rational toroidal_distance_sq(const TorusPoint& a, const TorusPoint& b,
                              const std::vector<int>& coords);

}  // namespace fstruct

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "fstruct/torus.hpp"
#include "helpers.hpp"

using namespace fstruct;
using namespace testutil;

TEST_CASE("compose: alpha beta of the 8-torus family is the point reflection") {
    auto g = j8_gens();
    AffineMap ab = compose(g[0], g[1]);
    for (int s : ab.signs) CHECK(s == -1);
    for (const auto& q : ab.shift.coords) CHECK(q == 0);
    // its fixed set is exactly the pairwise intersection of the two fixed sets
    auto fab = fixed_locus(ab);
    std::set<Slab> inter;
    for (const auto& a : fixed_locus(g[0]).components)
        for (const auto& b : fixed_locus(g[1]).components)
            if (auto s = intersect_slabs(a, b)) inter.insert(*s);
    CHECK(fab.components.size() == 256);
    CHECK(inter == std::set<Slab>(fab.components.begin(), fab.components.end()));
}

TEST_CASE("compose: an involution composed with itself is the identity") {
    for (const auto& g : g2_gens()) {
        CHECK(is_involution(g));
        CHECK(compose(g, g).is_identity());
    }
}

TEST_CASE("compose: beta gamma = gamma beta on the 7-torus, pointwise oracle") {
    auto g = g2_gens();
    AffineMap bg = compose(g[1], g[2]);
    AffineMap gb = compose(g[2], g[1]);
    RatRng rng(99);
    for (int i = 0; i < 100; ++i) {
        TorusPoint x = rng.point(7);
        CHECK(bg.apply(x) == g[1].apply(g[2].apply(x)));
        CHECK(bg.apply(x) == gb.apply(x));
    }
}

TEST_CASE("compose: dimension mismatch is an error") {
    CHECK_THROWS_AS(compose(k3_gens()[0], g2_gens()[0]), spec_error);
}

TEST_CASE("fixed_locus: the point reflection of T^4 has 16 half-lattice points") {
    auto locus = fixed_locus(k3_gens()[0]);
    REQUIRE(locus.components.size() == 16);
    for (const auto& s : locus.components) {
        CHECK(s.free_dim() == 0);
        for (const auto& [i, v] : s.fixed) CHECK((v == 0 || v == Rational(1, 2)));
    }
}

TEST_CASE("fixed_locus: identity fixes the whole torus") {
    auto locus = fixed_locus(AffineMap::identity(5));
    REQUIRE(locus.components.size() == 1);
    CHECK(locus.components[0].free_dim() == 5);
}

TEST_CASE("fixed_locus: alpha beta of the 6-torus family is free, grid oracle") {
    auto g = cy3_gens();
    AffineMap ab = compose(g[0], g[1]);
    CHECK(ab.signs[0] == 1);
    CHECK(ab.shift.coords[0] == Rational(1, 2));
    CHECK(fixed_locus(ab).empty());
    // brute force on the grid (k/8)^6; the last four coordinates of a fixed
    // point would have to solve their rows independently, so scanning the
    // first two suffices to visit a representative of every candidate
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
            for (int c = 0; c < 8; ++c) {
                TorusPoint x({Rational(a, 8), Rational(b, 8), Rational(c, 8), Rational(c, 8),
                              Rational(b, 8), Rational(a, 8)});
                CHECK(!(ab.apply(x) == x));
            }
}

TEST_CASE("fixed_locus: sample point of every component is genuinely fixed") {
    for (const auto& fam : {j8_gens(), g2_gens(), cy3_gens()}) {
        auto group = group_closure(fam);
        for (const auto& el : group.elements)
            for (const auto& comp : fixed_locus(el).components) {
                TorusPoint x = comp.sample_point(Rational(3, 7));
                CHECK(el.apply(x) == x);
            }
    }
}

TEST_CASE("group_closure: the 8-torus family closes to an elementary abelian group of rank 4") {
    auto group = group_closure(j8_gens());
    CHECK(group.order() == 16);
    auto rank = group.elementary_abelian_rank();
    REQUIRE(rank.has_value());
    CHECK(*rank == 4);
}

TEST_CASE("group_closure: single involution gives order 2") {
    CHECK(group_closure(k3_gens()).order() == 2);
}

TEST_CASE("group_closure: two commuting involutions close to order 4, not 16") {
    auto group = group_closure(cy3_gens());
    CHECK(group.order() == 4);
    CHECK(*group.elementary_abelian_rank() == 2);
}

TEST_CASE("group_closure: idempotent on its own element list") {
    auto group = group_closure(g2_gens());
    auto closed = group_closure(group.elements, 4096);
    CHECK(closed.order() == group.order());
    std::set<AffineMap> a(group.elements.begin(), group.elements.end());
    std::set<AffineMap> b(closed.elements.begin(), closed.elements.end());
    CHECK(a == b);
}

TEST_CASE("group_closure: the element bound aborts runaway closures") {
    // x -> x + 1/4 generates Z_4; with bound 3 the closure must abort
    auto gen = make_map({1, 1}, {Rational(1, 4), Rational(0)});
    CHECK_THROWS_AS(group_closure({gen}, 3), spec_error);
    CHECK(group_closure({gen}, 16).order() == 4);
}

TEST_CASE("map_slab: the 6-torus beta moves a fixed component of alpha") {
    auto g = cy3_gens();
    Slab s;
    s.dim = 6;
    for (int i = 0; i < 4; ++i) s.fixed[i] = Rational(0);
    Slab img = map_slab(g[1], s);
    CHECK(img.fixed.at(0) == Rational(1, 2));
    CHECK(img.fixed.at(1) == Rational(0));
    CHECK(img.fixed.at(2) == Rational(0));
    CHECK(img.fixed.at(3) == Rational(0));
    // cross-check by evaluating beta on a sample point of the slab
    TorusPoint x = s.sample_point(Rational(2, 9));
    CHECK(img.contains(g[1].apply(x)));
}

TEST_CASE("map_slab: identity leaves slabs unchanged") {
    Slab s;
    s.dim = 4;
    s.fixed[1] = Rational(1, 4);
    CHECK(map_slab(AffineMap::identity(4), s) == s);
}

TEST_CASE("map_slab: alpha swaps the quarter values of the gamma components") {
    auto g = j8_gens();
    for (const auto& comp : fixed_locus(g[2]).components) {
        Slab img = map_slab(g[0], comp);
        // -1/4 = 3/4 mod 1 in the first two coordinates
        CHECK(img.fixed.at(0) == mod1(-comp.fixed.at(0)));
        CHECK(img.fixed.at(1) == mod1(-comp.fixed.at(1)));
        TorusPoint x = comp.sample_point(Rational(5, 11));
        CHECK(img.contains(g[0].apply(x)));
    }
}

TEST_CASE("component_orbits: gamma components split into 2 orbits of 8") {
    auto group = group_closure(j8_gens());
    auto comps = fixed_locus(j8_gens()[2]).components;
    auto orbits = component_orbits(group, comps);
    REQUIRE(orbits.size() == 2);
    size_t total = 0;
    for (const auto& o : orbits) {
        CHECK(o.size() == 8);
        total += o.size();
    }
    CHECK(total == comps.size());
}

TEST_CASE("component_orbits: alpha components split 4x4 under the gamma-delta subgroup") {
    auto group = group_closure(j8_gens());
    auto comps = fixed_locus(j8_gens()[0]).components;
    auto sub = group.subgroup({group.generator_indices[2], group.generator_indices[3]});
    auto orbits = component_orbits(group, comps, sub);
    REQUIRE(orbits.size() == 4);
    for (const auto& o : orbits) CHECK(o.size() == 4);
}

TEST_CASE("component_orbits: the 48 fixed tori of the 7-torus family form 12 orbits of 4") {
    auto gens = g2_gens();
    auto group = group_closure(gens);
    std::vector<Slab> all;
    for (const auto& g : gens)
        for (const auto& c : fixed_locus(g).components) all.push_back(c);
    REQUIRE(all.size() == 48);
    auto orbits = component_orbits(group, all);
    REQUIRE(orbits.size() == 12);
    for (const auto& o : orbits) CHECK(o.size() == 4);
}

TEST_CASE("component_orbits: a non-stable component list is rejected") {
    auto group = group_closure(cy3_gens());
    auto comps = fixed_locus(cy3_gens()[0]).components;
    comps.pop_back();  // break stability
    CHECK_THROWS_AS(component_orbits(group, comps), spec_error);
}

TEST_CASE("intersect_slabs: the alpha and beta fixed sets meet in 256 points") {
    auto g = j8_gens();
    auto a = fixed_locus(g[0]).components;
    auto b = fixed_locus(g[1]).components;
    int count = 0;
    for (const auto& sa : a)
        for (const auto& sb : b)
            if (auto s = intersect_slabs(sa, sb)) {
                CHECK(s->free_dim() == 0);
                ++count;
            }
    CHECK(count == 256);
}

TEST_CASE("intersect_slabs: trivial and disagreeing cases") {
    Slab s;
    s.dim = 2;
    s.fixed[0] = Rational(0);
    CHECK(*intersect_slabs(s, s) == s);
    Slab t = s;
    t.fixed[0] = Rational(1, 2);
    CHECK(!intersect_slabs(s, t).has_value());
}

TEST_CASE("toroidal_distance_sq: direct values") {
    TorusPoint a({Rational(1, 4), Rational(1, 4)});
    TorusPoint b({Rational(0), Rational(0)});
    CHECK(toroidal_distance_sq(a, b, {0, 1}) == Rational(1, 8));
    TorusPoint c({Rational(7, 8), Rational(0)});
    CHECK(toroidal_distance_sq(c, b, {0}) == Rational(1, 64));  // wrap-around branch
}

TEST_CASE("toroidal_distance_sq: invariance under the deck isometries") {
    auto group = group_closure(j8_gens());
    RatRng rng(4242);
    std::vector<int> coords = {0, 1, 2, 3, 4, 5, 6, 7};
    for (int i = 0; i < 100; ++i) {
        TorusPoint x = rng.point(8), y = rng.point(8);
        Rational d = toroidal_distance_sq(x, y, coords);
        for (const auto& g : group.elements)
            CHECK(toroidal_distance_sq(g.apply(x), g.apply(y), coords) == d);
    }
}

TEST_CASE("toroidal_distance_sq: symmetry and the triangle inequality, exactly") {
    RatRng rng(7);
    std::vector<int> coords = {0, 1, 2};
    for (int i = 0; i < 200; ++i) {
        TorusPoint x = rng.point(3), y = rng.point(3), z = rng.point(3);
        Rational ab = toroidal_distance_sq(x, y, coords);
        CHECK(toroidal_distance_sq(y, x, coords) == ab);
        Rational bc = toroidal_distance_sq(y, z, coords);
        Rational ac = toroidal_distance_sq(x, z, coords);
        // sqrt(ac) <= sqrt(ab) + sqrt(bc), compared via squares
        Rational gap = ac - ab - bc;
        bool ok = gap <= 0 || gap * gap <= 4 * ab * bc;
        CHECK(ok);
    }
}

TEST_CASE("composition is associative and the identity is neutral") {
    auto group = group_closure(j8_gens());
    RatRng rng(11);
    auto id = AffineMap::identity(8);
    for (int i = 0; i < 50; ++i) {
        const auto& a = group.elements[rng.g() % group.order()];
        const auto& b = group.elements[rng.g() % group.order()];
        const auto& c = group.elements[rng.g() % group.order()];
        CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
        CHECK(compose(a, id) == a);
        CHECK(compose(id, a) == a);
    }
}

TEST_CASE("conjugation equivariance of fixed loci across all example families") {
    for (const auto& fam : {k3_gens(), j8_gens(), g2_gens(), cy3_gens()}) {
        auto group = group_closure(fam);
        for (const auto& f : group.elements) {
            auto locus = fixed_locus(f);
            for (const auto& g : group.elements) {
                AffineMap conj = compose(compose(g, f), inverse(g));
                auto target = fixed_locus(conj);
                for (const auto& comp : locus.components) {
                    Slab img = map_slab(g, comp);
                    bool found = false;
                    for (const auto& t : target.components)
                        if (t == img) found = true;
                    CHECK(found);
                }
            }
        }
    }
}

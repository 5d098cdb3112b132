#include <doctest.h>

#include "fstruct/regions.hpp"
#include "helpers.hpp"

using namespace fstruct;
using namespace testutil;

namespace {

const Rational eps(1, 16);

// the 4-torus tube family: complement of the half-lattice tubes in (x2, x3)
Region k3_U() {
    Region r;
    r.dim = 4;
    TubeConstraint c;
    c.sense = Sense::Outside;
    c.coords = {1, 2};
    c.radius = eps / 2;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            c.centers.push_back({Rational(a, 2), Rational(b, 2)});
    c.normalize();
    r.constraints.push_back(c);
    return r;
}

Region k3_V(int a, int b, const Rational& radius) {
    Region r;
    r.dim = 4;
    TubeConstraint c;
    c.coords = {1, 2};
    c.radius = radius;
    c.centers = {{Rational(a, 2), Rational(b, 2)}};
    r.constraints.push_back(c);
    return r;
}

Region k3_ball(const std::vector<Rational>& center, const Rational& radius) {
    Region r;
    r.dim = 4;
    TubeConstraint c;
    c.coords = {0, 1, 2, 3};
    c.radius = radius;
    c.centers = {center};
    r.constraints.push_back(c);
    return r;
}

std::vector<Region> k3_cover_family(bool with_v4) {
    std::vector<Region> fam = {k3_U()};
    fam.push_back(k3_V(0, 0, eps));
    fam.push_back(k3_V(0, 1, eps));
    fam.push_back(k3_V(1, 0, eps));
    if (with_v4) fam.push_back(k3_V(1, 1, eps));
    for (int a = 0; a < 16; ++a)
        fam.push_back(k3_ball({Rational(a & 1, 2), Rational((a >> 1) & 1, 2),
                               Rational((a >> 2) & 1, 2), Rational((a >> 3) & 1, 2)},
                              eps));
    return fam;
}

Region g2_W(char kind, const Rational& radius) {
    Region r;
    r.dim = 7;
    TubeConstraint c;
    c.radius = radius;
    auto both = [](std::initializer_list<Rational> vals) {
        return std::vector<Rational>(vals);
    };
    (void)both;
    if (kind == 'a') {
        c.coords = {0, 1, 2};
        for (int i = 0; i < 8; ++i)
            c.centers.push_back({Rational(i & 1, 2), Rational((i >> 1) & 1, 2),
                                 Rational((i >> 2) & 1, 2)});
    } else if (kind == 'b') {
        c.coords = {0, 1, 4, 5};
        for (int i = 0; i < 16; ++i)
            c.centers.push_back({Rational(i & 1, 2), Rational(1 + 2 * ((i >> 1) & 1), 4),
                                 Rational((i >> 2) & 1, 2), Rational((i >> 3) & 1, 2)});
    } else {
        c.coords = {0, 2, 4};
        for (int i = 0; i < 8; ++i)
            c.centers.push_back({Rational(1 + 2 * (i & 1), 4), Rational(1 + 2 * ((i >> 1) & 1), 4),
                                 Rational((i >> 2) & 1, 2)});
    }
    c.normalize();
    r.constraints.push_back(c);
    return r;
}

}  // namespace

TEST_CASE("contains: exact membership in the outside-tube chart") {
    Region U = k3_U();
    // distance^2 to every half-lattice center is 1/8 > (1/32)^2
    CHECK(U.contains(TorusPoint({Rational(0), Rational(1, 4), Rational(1, 4), Rational(0)})));
    CHECK(!U.contains(TorusPoint({Rational(0), Rational(0), Rational(0), Rational(0)})));
    // a point at exactly the tube radius is outside an open inside-tube
    Region V = k3_V(0, 0, eps);
    CHECK(V.contains(TorusPoint({Rational(0), Rational(0), Rational(0), Rational(0)})));
    CHECK(!V.contains(TorusPoint({Rational(0), eps, Rational(0), Rational(0)})));
    // and a point at exactly eps/2 fails the strict outside condition too
    CHECK(!U.contains(TorusPoint({Rational(0), eps / 2, Rational(0), Rational(0)})));
}

TEST_CASE("image_region: invariance of the 8-torus chart under all four involutions") {
    Region r;
    r.dim = 8;
    TubeConstraint c1;
    c1.sense = Sense::Outside;
    c1.coords = {0, 1, 4, 5};
    c1.radius = eps / 2;
    for (int i = 0; i < 16; ++i)
        c1.centers.push_back({Rational(1 + 2 * (i & 1), 4), Rational(1 + 2 * ((i >> 1) & 1), 4),
                              Rational(1 + 2 * ((i >> 2) & 1), 4),
                              Rational(1 + 2 * ((i >> 3) & 1), 4)});
    c1.normalize();
    r.constraints.push_back(c1);
    for (const auto& g : j8_gens()) CHECK(region_invariant_under(g, r));
    CHECK(image_region(AffineMap::identity(8), r).constraints[0].centers ==
          r.constraints[0].centers);
}

TEST_CASE("image_region: beta permutes the centers of the alpha tube family") {
    Region w = g2_W('a', eps);
    auto beta = g2_gens()[1];
    CHECK(region_invariant_under(beta, w));
}

TEST_CASE("pairwise_disjoint: the three 7-torus tube families separate at eps = 1/16") {
    std::vector<Region> tubes = {g2_W('a', eps), g2_W('b', eps), g2_W('c', eps)};
    auto res = pairwise_disjoint(tubes);
    CHECK(res.disjoint);
}

TEST_CASE("pairwise_disjoint: the same tubes collide at eps = 1/4") {
    Rational big(1, 4);
    std::vector<Region> tubes = {g2_W('a', big), g2_W('b', big), g2_W('c', big)};
    auto res = pairwise_disjoint(tubes);
    REQUIRE(!res.disjoint);
    REQUIRE(res.witness.has_value());
    CHECK(tubes[res.pair_a].contains(*res.witness));
    CHECK(tubes[res.pair_b].contains(*res.witness));
}

TEST_CASE("pairwise_disjoint: a region against itself") {
    std::vector<Region> tubes = {g2_W('a', eps), g2_W('a', eps)};
    CHECK(!pairwise_disjoint(tubes).disjoint);
}

TEST_CASE("check_cover: the 4-torus family covers at min_cell 1/256") {
    auto res = check_cover(k3_cover_family(true), Rational(1, 256), 4);
    CHECK(res.status == CoverResult::Status::Covered);
}

TEST_CASE("check_cover: dropping one tube leaves a hole with a verified witness") {
    auto fam = k3_cover_family(false);
    auto res = check_cover(fam, Rational(1, 256), 4);
    REQUIRE(res.status == CoverResult::Status::Uncovered);
    REQUIRE(res.witness.has_value());
    for (const auto& r : fam) CHECK(!r.contains(*res.witness));
    // the hole sits over the removed (1/2, 1/2) tube in coordinates (x2, x3)
    Rational d = toroidal_distance_sq(*res.witness,
                                      TorusPoint({Rational(0), Rational(1, 2), Rational(1, 2),
                                                  Rational(0)}),
                                      {1, 2});
    CHECK(d < Rational(1, 64));
}

TEST_CASE("check_cover: the unconstrained region covers immediately") {
    Region whole;
    whole.dim = 3;
    auto res = check_cover({whole}, Rational(1, 256), 3);
    CHECK(res.status == CoverResult::Status::Covered);
    CHECK(res.boxes_processed == 0);
}

TEST_CASE("check_cover: covered at a cell size stays covered at a finer one") {
    auto fam = k3_cover_family(true);
    auto coarse = check_cover(fam, Rational(1, 256), 4);
    auto fine = check_cover(fam, Rational(1, 512), 4);
    CHECK(coarse.status == CoverResult::Status::Covered);
    CHECK(fine.status == CoverResult::Status::Covered);
}

TEST_CASE("box distance bounds enclose the true distance for sampled points") {
    RatRng rng(314);
    for (int trial = 0; trial < 50; ++trial) {
        Box box;
        box.coords = {0, 1};
        for (int k = 0; k < 2; ++k) {
            Rational a = rng.rat(), b = rng.rat();
            if (b < a) std::swap(a, b);
            box.iv.push_back({a, b});
        }
        std::vector<Rational> center = {rng.rat(), rng.rat()};
        auto [lo, hi] = box_center_dist_sq_bounds(box, {0, 1}, center);
        for (int s = 0; s < 20; ++s) {
            // random point inside the box
            std::vector<Rational> x(2);
            for (int k = 0; k < 2; ++k) {
                Rational t = rng.rat();
                x[k] = box.iv[k].first + t * (box.iv[k].second - box.iv[k].first);
            }
            TorusPoint p({x[0], x[1]});
            TorusPoint c({center[0], center[1]});
            Rational d = toroidal_distance_sq(p, c, {0, 1});
            CHECK(d >= lo);
            CHECK(d <= hi);
        }
    }
}

TEST_CASE("box discharge soundness: random points of a contained box are members") {
    // a box certified inside the (0,0) tube of the 4-torus family
    Region V = k3_V(0, 0, eps);
    Box box;
    box.coords = {1, 2};
    box.iv = {{Rational(0), Rational(1, 64)}, {Rational(0), Rational(1, 64)}};
    auto [lo, hi] = box_center_dist_sq_bounds(box, {1, 2}, V.constraints[0].centers[0]);
    REQUIRE(hi < eps * eps);  // the discharge certificate
    RatRng rng(2718);
    for (int s = 0; s < 1000; ++s) {
        Rational t1 = rng.rat() / 64, t2 = rng.rat() / 64;
        CHECK(V.contains(TorusPoint({Rational(0), t1, t2, rng.rat()})));
    }
}

TEST_CASE("region_overlap: tube against quotient chart, ball against both") {
    Region U = k3_U();
    Region V = k3_V(0, 0, eps);
    auto ov = region_overlap(U, V, Rational(1, 256));
    REQUIRE(ov.status == OverlapStatus::Overlap);
    CHECK(U.contains(*ov.witness));
    CHECK(V.contains(*ov.witness));
    // the resolution ball is disjoint from the outside chart
    Region ball = k3_ball({Rational(0), Rational(0), Rational(0), Rational(0)}, eps / 2);
    CHECK(region_overlap(U, ball, Rational(1, 256)).status == OverlapStatus::Disjoint);
    // separated tubes are disjoint
    CHECK(region_overlap(V, k3_V(1, 1, eps), Rational(1, 256)).status ==
          OverlapStatus::Disjoint);
}

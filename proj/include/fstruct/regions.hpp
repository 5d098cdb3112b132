// Tube-type open sets on tori: exact membership, images under isometries,
// pairwise disjointness, and an adaptive box-subdivision cover checker.
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "fstruct/torus.hpp"

namespace fstruct {

enum class Sense { Inside, Outside };

// Distance condition on a coordinate subset: Inside means d(x|coords, c) < radius
// for some center c, Outside means d(x|coords, c) > radius for every center.
struct TubeConstraint {
    std::vector<int> coords;                     // 0-based, ascending
    std::vector<std::vector<Rational>> centers;  // each of size coords.size(), sorted
    Rational radius;
    Sense sense = Sense::Inside;

    void normalize();  // sorts and dedups centers
    bool holds_at(const TorusPoint& x) const;
};

// Conjunction of tube constraints; empty constraint list = the whole torus.
struct Region {
    int dim = 0;
    std::vector<TubeConstraint> constraints;

    bool contains(const TorusPoint& x) const;
    std::vector<int> constrained_coords() const;
};

Region image_region(const AffineMap& f, const Region& r);
bool region_invariant_under(const AffineMap& f, const Region& r);

struct DisjointResult {
    bool disjoint = false;
    int pair_a = -1, pair_b = -1;          // witnessing region pair when not disjoint
    std::optional<TorusPoint> witness;     // point in both regions
};

// All regions must be single Inside-constraint tubes. Exact decision: two tubes
// meet iff some center pair is at shared-coordinate distance < r1 + r2, and in
// that case an explicit rational witness along the connecting segment is built.
DisjointResult pairwise_disjoint(const std::vector<Region>& tubes);

struct Box {
    // Intervals over the active coordinates only; inactive coordinates are free.
    std::vector<int> coords;  // global coordinate index per slot
    std::vector<std::pair<Rational, Rational>> iv;

    Rational width(size_t slot) const { return iv[slot].second - iv[slot].first; }
};

struct CoverResult {
    enum class Status { Covered, Uncovered, Undecided } status = Status::Covered;
    std::optional<TorusPoint> witness;  // for Uncovered: in no region (re-verified)
    std::vector<Box> undecided;
    long boxes_processed = 0;
};

// Adaptive subdivision over the coordinates actually constrained by some region;
// a box is discharged when certified inside a single region.
CoverResult check_cover(const std::vector<Region>& regions, const Rational& min_cell,
                        int dim);

enum class OverlapStatus { Disjoint, Overlap, Undecided };

struct OverlapResult {
    OverlapStatus status = OverlapStatus::Undecided;
    std::optional<TorusPoint> witness;  // for Overlap: in both regions
};

// Decides whether two regions intersect, by cheap exact certificates first and
// box search down to min_cell otherwise.
OverlapResult region_overlap(const Region& a, const Region& b, const Rational& min_cell);

// Exact bounds of the squared toroidal distance between box points and a center,
// over the given constraint coordinates.
std::pair<Rational, Rational> box_center_dist_sq_bounds(
    const Box& box, const std::vector<int>& coords, const std::vector<Rational>& center);

}  // namespace fstruct

#include "fstruct/regions.hpp"

#include <algorithm>
#include <set>

namespace fstruct {

void TubeConstraint::normalize() {
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
}

bool TubeConstraint::holds_at(const TorusPoint& x) const {
    const Rational r2 = radius * radius;
    for (const auto& c : centers) {
        Rational d2(0);
        for (size_t k = 0; k < coords.size(); ++k) {
            Rational d = circle_dist(x.coords[coords[k]], c[k]);
            d2 += d * d;
        }
        if (sense == Sense::Inside) {
            if (d2 < r2) return true;
        } else {
            if (!(d2 > r2)) return false;
        }
    }
    return sense == Sense::Outside;
}

bool Region::contains(const TorusPoint& x) const {
    if (x.dim() != dim) throw spec_error("Region::contains: dimension mismatch");
    for (const auto& c : constraints)
        if (!c.holds_at(x)) return false;
    return true;
}

std::vector<int> Region::constrained_coords() const {
    std::set<int> s;
    for (const auto& c : constraints) s.insert(c.coords.begin(), c.coords.end());
    return {s.begin(), s.end()};
}

Region image_region(const AffineMap& f, const Region& r) {
    if (f.dim() != r.dim) throw spec_error("image_region: dimension mismatch");
    Region out;
    out.dim = r.dim;
    for (const auto& c : r.constraints) {
        TubeConstraint ic = c;
        for (auto& center : ic.centers)
            for (size_t k = 0; k < c.coords.size(); ++k) {
                int i = c.coords[k];
                center[k] = mod1(Rational(f.signs[i]) * center[k] + f.shift.coords[i]);
            }
        ic.normalize();
        out.constraints.push_back(std::move(ic));
    }
    return out;
}

bool region_invariant_under(const AffineMap& f, const Region& r) {
    Region img = image_region(f, r);
    for (size_t i = 0; i < r.constraints.size(); ++i)
        if (img.constraints[i].centers != r.constraints[i].centers) return false;
    return true;
}

namespace {

std::vector<int> shared_coords(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Rational proj_dist_sq(const std::vector<int>& coords_a, const std::vector<Rational>& ca,
                      const std::vector<int>& coords_b, const std::vector<Rational>& cb,
                      const std::vector<int>& shared) {
    Rational d2(0);
    for (int i : shared) {
        size_t ka = std::lower_bound(coords_a.begin(), coords_a.end(), i) - coords_a.begin();
        size_t kb = std::lower_bound(coords_b.begin(), coords_b.end(), i) - coords_b.begin();
        Rational d = circle_dist(ca[ka], cb[kb]);
        d2 += d * d;
    }
    return d2;
}

// Point meeting both tubes when their shared-coordinate center distance is
// below r_a + r_b: interpolate on shared coordinates, copy center values on the
// private ones. All arithmetic stays rational.
TorusPoint tube_meet_point(int dim, const TubeConstraint& a, const std::vector<Rational>& ca,
                           const TubeConstraint& b, const std::vector<Rational>& cb,
                           const std::vector<int>& shared) {
    std::vector<Rational> x(dim, Rational(0));
    for (size_t k = 0; k < b.coords.size(); ++k) x[b.coords[k]] = cb[k];
    for (size_t k = 0; k < a.coords.size(); ++k) x[a.coords[k]] = ca[k];
    Rational lambda = a.radius / (a.radius + b.radius);
    for (int i : shared) {
        size_t ka = std::lower_bound(a.coords.begin(), a.coords.end(), i) - a.coords.begin();
        size_t kb = std::lower_bound(b.coords.begin(), b.coords.end(), i) - b.coords.begin();
        Rational delta = centered_mod1(cb[kb] - ca[ka]);
        x[i] = ca[ka] + lambda * delta;
    }
    return TorusPoint(std::move(x));
}

}  // namespace

DisjointResult pairwise_disjoint(const std::vector<Region>& tubes) {
    for (const auto& r : tubes)
        if (r.constraints.size() != 1 || r.constraints[0].sense != Sense::Inside)
            throw spec_error("pairwise_disjoint: expects single Inside-constraint regions");
    DisjointResult res;
    for (size_t i = 0; i < tubes.size(); ++i)
        for (size_t j = i + 1; j < tubes.size(); ++j) {
            const auto& a = tubes[i].constraints[0];
            const auto& b = tubes[j].constraints[0];
            auto shared = shared_coords(a.coords, b.coords);
            Rational rsum = a.radius + b.radius;
            for (const auto& ca : a.centers)
                for (const auto& cb : b.centers) {
                    Rational d2 = proj_dist_sq(a.coords, ca, b.coords, cb, shared);
                    if (d2 < rsum * rsum) {
                        res.disjoint = false;
                        res.pair_a = static_cast<int>(i);
                        res.pair_b = static_cast<int>(j);
                        TorusPoint w = tube_meet_point(tubes[i].dim, a, ca, b, cb, shared);
                        if (!tubes[i].contains(w) || !tubes[j].contains(w))
                            throw spec_error("pairwise_disjoint: internal witness check failed");
                        res.witness = std::move(w);
                        return res;
                    }
                }
        }
    res.disjoint = true;
    return res;
}

std::pair<Rational, Rational> box_center_dist_sq_bounds(
    const Box& box, const std::vector<int>& coords, const std::vector<Rational>& center) {
    Rational lo_sq(0), hi_sq(0);
    for (size_t k = 0; k < coords.size(); ++k) {
        size_t slot = std::lower_bound(box.coords.begin(), box.coords.end(), coords[k]) -
                      box.coords.begin();
        if (slot >= box.coords.size() || box.coords[slot] != coords[k])
            throw spec_error("box_center_dist_sq_bounds: coordinate not tracked by box");
        const Rational& lo = box.iv[slot].first;
        const Rational& hi = box.iv[slot].second;
        const Rational& c = center[k];
        auto in_iv = [&](const Rational& y) {
            return (y >= lo && y <= hi) || (y + 1 >= lo && y + 1 <= hi) ||
                   (y - 1 >= lo && y - 1 <= hi);
        };
        Rational dmin, dmax;
        Rational dl = circle_dist(lo, c), dh = circle_dist(hi, c);
        dmin = in_iv(c) ? Rational(0) : std::min(dl, dh);
        dmax = std::max(dl, dh);
        if (in_iv(mod1(c + Rational(1, 2)))) dmax = Rational(1, 2);
        lo_sq += dmin * dmin;
        hi_sq += dmax * dmax;
    }
    return {lo_sq, hi_sq};
}

namespace {

enum class BoxRel { Contains, Excluded, Partial };

struct ConstraintState {
    bool decided = false;  // certainly holds on the whole box
    bool empty = false;    // certainly fails on the whole box
};

ConstraintState classify_constraint(const Box& box, const TubeConstraint& c) {
    ConstraintState st;
    const Rational r2 = c.radius * c.radius;
    if (c.sense == Sense::Inside) {
        bool all_out = true;
        for (const auto& center : c.centers) {
            auto [lo, hi] = box_center_dist_sq_bounds(box, c.coords, center);
            if (hi < r2) {
                st.decided = true;
                return st;
            }
            if (lo < r2) all_out = false;
        }
        st.empty = all_out;
    } else {
        bool all_far = true;
        for (const auto& center : c.centers) {
            auto [lo, hi] = box_center_dist_sq_bounds(box, c.coords, center);
            if (hi <= r2) {
                st.empty = true;
                return st;
            }
            if (!(lo > r2)) all_far = false;
        }
        st.decided = all_far;
    }
    return st;
}

struct RegionState {
    BoxRel rel = BoxRel::Partial;
    std::vector<int> blocked;  // constrained coords of undecided constraints
};

RegionState classify_region(const Box& box, const Region& r) {
    RegionState st;
    bool all = true;
    std::set<int> blocked;
    for (const auto& c : r.constraints) {
        ConstraintState cs = classify_constraint(box, c);
        if (cs.empty) {
            st.rel = BoxRel::Excluded;
            return st;
        }
        if (!cs.decided) {
            all = false;
            blocked.insert(c.coords.begin(), c.coords.end());
        }
    }
    st.rel = all ? BoxRel::Contains : BoxRel::Partial;
    st.blocked.assign(blocked.begin(), blocked.end());
    return st;
}

TorusPoint box_center_point(const Box& box, int dim) {
    std::vector<Rational> c(dim, Rational(0));
    for (size_t k = 0; k < box.coords.size(); ++k)
        c[box.coords[k]] = (box.iv[k].first + box.iv[k].second) / 2;
    return TorusPoint(std::move(c));
}

}  // namespace

namespace {

// Subdivision engine. Candidate regions are inherited from the parent box
// (exclusion and containment are monotone under shrinking), and per-coordinate
// circle-distance bounds are memoized over the distinct center values so that
// constraints sharing a lattice of centers are classified cheaply.
class CoverEngine {
public:
    CoverEngine(const std::vector<Region>& regions, std::vector<int> active)
        : regions_(regions), active_(std::move(active)) {
        slot_values_.resize(active_.size());
        per_region_.resize(regions.size());
        for (size_t ri = 0; ri < regions.size(); ++ri) {
            for (const auto& c : regions[ri].constraints) {
                CompiledConstraint cc;
                cc.sense = c.sense;
                cc.r2 = c.radius * c.radius;
                for (int coord : c.coords) cc.slots.push_back(slot_of(coord));
                for (const auto& center : c.centers) {
                    std::vector<int> vids(center.size());
                    for (size_t k = 0; k < center.size(); ++k)
                        vids[k] = value_id(cc.slots[k], center[k]);
                    cc.center_vids.push_back(std::move(vids));
                }
                per_region_[ri].push_back(std::move(cc));
            }
        }
        cache_.resize(active_.size());
        for (size_t s = 0; s < active_.size(); ++s) cache_[s].resize(slot_values_[s].size());
    }

    size_t slot_of(int coord) const {
        return std::lower_bound(active_.begin(), active_.end(), coord) - active_.begin();
    }

    void begin_box(const Box& box) {
        box_ = &box;
        for (auto& col : cache_)
            for (auto& e : col) e.fresh = false;
    }

    // Classification of one region on the current box.
    RegionState classify(size_t ri) {
        RegionState st;
        bool all = true;
        std::set<int> blocked;
        const auto& ccs = per_region_[ri];
        const auto& constraints = regions_[ri].constraints;
        for (size_t ci = 0; ci < ccs.size(); ++ci) {
            const auto& cc = ccs[ci];
            bool decided = false, empty = false;
            if (cc.sense == Sense::Inside) {
                bool all_out = true;
                for (const auto& vids : cc.center_vids) {
                    Rational hi2(0), lo2(0);
                    bool hi_ok = true;
                    for (size_t k = 0; k < vids.size(); ++k) {
                        const Entry& e = entry(cc.slots[k], vids[k]);
                        if (hi_ok) {
                            hi2 += e.dmax2;
                            if (hi2 >= cc.r2) hi_ok = false;
                        }
                        lo2 += e.dmin2;
                    }
                    if (hi_ok) {
                        decided = true;
                        break;
                    }
                    if (lo2 < cc.r2) all_out = false;
                }
                if (!decided) empty = all_out;
            } else {
                bool all_far = true;
                for (const auto& vids : cc.center_vids) {
                    Rational hi2(0), lo2(0);
                    bool lo_over = false;
                    for (size_t k = 0; k < vids.size(); ++k) {
                        const Entry& e = entry(cc.slots[k], vids[k]);
                        hi2 += e.dmax2;
                        if (!lo_over) {
                            lo2 += e.dmin2;
                            if (lo2 > cc.r2) lo_over = true;
                        }
                    }
                    if (hi2 <= cc.r2) {
                        empty = true;
                        break;
                    }
                    if (!lo_over) all_far = false;
                }
                if (!empty) decided = all_far;
            }
            if (empty) {
                st.rel = BoxRel::Excluded;
                return st;
            }
            if (!decided) {
                all = false;
                blocked.insert(constraints[ci].coords.begin(), constraints[ci].coords.end());
            }
        }
        st.rel = all ? BoxRel::Contains : BoxRel::Partial;
        st.blocked.assign(blocked.begin(), blocked.end());
        return st;
    }

private:
    struct Entry {
        bool fresh = false;
        Rational dmin2, dmax2;
    };
    struct CompiledConstraint {
        Sense sense;
        Rational r2;
        std::vector<size_t> slots;
        std::vector<std::vector<int>> center_vids;
    };

    int value_id(size_t slot, const Rational& v) {
        auto& vals = slot_values_[slot];
        for (size_t i = 0; i < vals.size(); ++i)
            if (vals[i] == v) return static_cast<int>(i);
        vals.push_back(v);
        return static_cast<int>(vals.size() - 1);
    }

    const Entry& entry(size_t slot, int vid) {
        Entry& e = cache_[slot][vid];
        if (!e.fresh) {
            const Rational& lo = box_->iv[slot].first;
            const Rational& hi = box_->iv[slot].second;
            const Rational& c = slot_values_[slot][vid];
            auto in_iv = [&](const Rational& y) {
                return (y >= lo && y <= hi) || (y + 1 >= lo && y + 1 <= hi) ||
                       (y - 1 >= lo && y - 1 <= hi);
            };
            Rational dl = circle_dist(lo, c), dh = circle_dist(hi, c);
            Rational dmin = in_iv(c) ? Rational(0) : std::min(dl, dh);
            Rational dmax = std::max(dl, dh);
            if (in_iv(mod1(c + Rational(1, 2)))) dmax = Rational(1, 2);
            e.dmin2 = dmin * dmin;
            e.dmax2 = dmax * dmax;
            e.fresh = true;
        }
        return e;
    }

    const std::vector<Region>& regions_;
    std::vector<int> active_;
    std::vector<std::vector<Rational>> slot_values_;
    std::vector<std::vector<CompiledConstraint>> per_region_;
    std::vector<std::vector<Entry>> cache_;
    const Box* box_ = nullptr;
};

}  // namespace

CoverResult check_cover(const std::vector<Region>& regions, const Rational& min_cell, int dim) {
    CoverResult res;
    if (min_cell <= 0) throw spec_error("check_cover: min_cell must be positive");
    for (const auto& r : regions)
        if (r.constraints.empty()) return res;  // whole torus, covered

    std::set<int> active_set;
    for (const auto& r : regions)
        for (int i : r.constrained_coords()) active_set.insert(i);
    std::vector<int> active(active_set.begin(), active_set.end());

    CoverEngine engine(regions, active);

    Box root;
    root.coords = active;
    root.iv.assign(active.size(), {Rational(0), Rational(1)});
    std::vector<size_t> all_regions(regions.size());
    for (size_t i = 0; i < regions.size(); ++i) all_regions[i] = i;

    struct Item {
        Box box;
        std::vector<size_t> live;  // candidate regions inherited from the parent
    };
    std::vector<Item> stack;
    stack.push_back({std::move(root), std::move(all_regions)});

    while (!stack.empty()) {
        Item item = std::move(stack.back());
        stack.pop_back();
        const Box& box = item.box;
        ++res.boxes_processed;
        engine.begin_box(box);

        bool discharged = false;
        std::vector<std::pair<size_t, RegionState>> candidates;
        for (size_t ri : item.live) {
            RegionState st = engine.classify(ri);
            if (st.rel == BoxRel::Contains) {
                discharged = true;
                break;
            }
            if (st.rel == BoxRel::Partial) candidates.emplace_back(ri, std::move(st));
        }
        if (discharged) continue;

        if (candidates.empty()) {
            TorusPoint w = box_center_point(box, dim);
            for (const auto& r : regions)
                if (r.contains(w)) throw spec_error("check_cover: witness re-verification failed");
            res.status = CoverResult::Status::Uncovered;
            res.witness = std::move(w);
            return res;
        }

        // Split for the candidate closest to discharging; only coordinates that
        // block one of its constraints are worth splitting.
        size_t best = 0;
        for (size_t k = 1; k < candidates.size(); ++k)
            if (candidates[k].second.blocked.size() < candidates[best].second.blocked.size())
                best = k;
        int split_slot = -1;
        Rational split_width(0);
        for (size_t attempt = 0; attempt < candidates.size() && split_slot < 0; ++attempt) {
            size_t k = (best + attempt) % candidates.size();
            for (int coord : candidates[k].second.blocked) {
                size_t slot = engine.slot_of(coord);
                Rational w = box.width(slot);
                if (w > min_cell && w > split_width) {
                    split_width = w;
                    split_slot = static_cast<int>(slot);
                }
            }
        }
        if (split_slot < 0) {
            TorusPoint w = box_center_point(box, dim);
            bool in_any = false;
            for (const auto& r : regions)
                if (r.contains(w)) {
                    in_any = true;
                    break;
                }
            if (!in_any) {
                res.status = CoverResult::Status::Uncovered;
                res.witness = std::move(w);
                return res;
            }
            res.status = CoverResult::Status::Undecided;
            res.undecided.push_back(box);
            continue;
        }
        std::vector<size_t> live;
        live.reserve(candidates.size());
        for (const auto& [ri, st] : candidates) live.push_back(ri);
        Rational mid = (box.iv[split_slot].first + box.iv[split_slot].second) / 2;
        Item left{box, live}, right{std::move(item.box), std::move(live)};
        left.box.iv[split_slot].second = mid;
        right.box.iv[split_slot].first = mid;
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    if (res.status == CoverResult::Status::Covered && !res.undecided.empty())
        res.status = CoverResult::Status::Undecided;
    return res;
}

namespace {

// Deterministic witness candidates for region overlap: tube centers with a few
// generic fillers, single-coordinate bumps, and segment points between center
// pairs of Inside constraints.
std::vector<TorusPoint> overlap_candidates(const Region& a, const Region& b) {
    static const std::vector<Rational> fillers = {Rational(1, 3), Rational(1, 8), Rational(0),
                                                  Rational(3, 16)};
    std::vector<TorusPoint> out;
    auto emit_center_points = [&](const Region& src) {
        for (const auto& c : src.constraints) {
            if (c.sense != Sense::Inside) continue;
            for (const auto& center : c.centers)
                for (const auto& fill : fillers) {
                    std::vector<Rational> x(src.dim, fill);
                    for (size_t k = 0; k < c.coords.size(); ++k) x[c.coords[k]] = center[k];
                    out.emplace_back(x);
                    for (size_t k = 0; k < c.coords.size(); ++k)
                        for (const Rational& frac :
                             {Rational(3, 4), Rational(1, 2), Rational(-3, 4)}) {
                            auto y = x;
                            y[c.coords[k]] = center[k] + frac * c.radius;
                            out.emplace_back(std::move(y));
                        }
                }
        }
    };
    emit_center_points(a);
    emit_center_points(b);
    for (const auto& ca : a.constraints) {
        if (ca.sense != Sense::Inside) continue;
        for (const auto& cb : b.constraints) {
            if (cb.sense != Sense::Inside) continue;
            auto shared = shared_coords(ca.coords, cb.coords);
            for (const auto& c1 : ca.centers)
                for (const auto& c2 : cb.centers)
                    out.push_back(tube_meet_point(a.dim, ca, c1, cb, c2, shared));
        }
    }
    return out;
}

// Disjointness certificates between one constraint of each region.
bool cheap_disjoint(const Region& a, const Region& b) {
    for (const auto& ca : a.constraints) {
        if (ca.sense != Sense::Inside) continue;
        for (const auto& cb : b.constraints) {
            if (cb.sense == Sense::Inside) {
                auto shared = shared_coords(ca.coords, cb.coords);
                if (shared.empty()) continue;
                Rational rsum = ca.radius + cb.radius;
                bool separated = true;
                for (const auto& c1 : ca.centers) {
                    for (const auto& c2 : cb.centers)
                        if (proj_dist_sq(ca.coords, c1, cb.coords, c2, shared) < rsum * rsum) {
                            separated = false;
                            break;
                        }
                    if (!separated) break;
                }
                if (separated) return true;
            } else {
                // Tube entirely within distance r_b of some forbidden center.
                if (!std::includes(ca.coords.begin(), ca.coords.end(), cb.coords.begin(),
                                   cb.coords.end()))
                    continue;
                if (cb.radius < ca.radius) continue;
                Rational gap = cb.radius - ca.radius;
                auto shared = cb.coords;
                bool all_caught = true;
                for (const auto& c1 : ca.centers) {
                    bool caught = false;
                    for (const auto& c2 : cb.centers)
                        if (proj_dist_sq(ca.coords, c1, cb.coords, c2, shared) <= gap * gap) {
                            caught = true;
                            break;
                        }
                    if (!caught) {
                        all_caught = false;
                        break;
                    }
                }
                if (all_caught) return true;
            }
        }
    }
    return false;
}

}  // namespace

OverlapResult region_overlap(const Region& a, const Region& b, const Rational& min_cell) {
    OverlapResult res;
    if (a.dim != b.dim) throw spec_error("region_overlap: dimension mismatch");
    if (cheap_disjoint(a, b) || cheap_disjoint(b, a)) {
        res.status = OverlapStatus::Disjoint;
        return res;
    }
    for (auto& w : overlap_candidates(a, b))
        if (a.contains(w) && b.contains(w)) {
            res.status = OverlapStatus::Overlap;
            res.witness = std::move(w);
            return res;
        }

    // Box search on the conjunction: prune boxes excluded from either region,
    // accept a box certified inside both.
    std::set<int> active_set;
    for (int i : a.constrained_coords()) active_set.insert(i);
    for (int i : b.constrained_coords()) active_set.insert(i);
    if (active_set.empty()) {
        // Both regions are the whole torus.
        res.status = OverlapStatus::Overlap;
        res.witness = TorusPoint(std::vector<Rational>(a.dim, Rational(0)));
        return res;
    }
    Box root;
    root.coords.assign(active_set.begin(), active_set.end());
    root.iv.assign(root.coords.size(), {Rational(0), Rational(1)});
    std::vector<Box> stack = {root};
    bool undecided = false;
    while (!stack.empty()) {
        Box box = std::move(stack.back());
        stack.pop_back();
        RegionState sa = classify_region(box, a);
        if (sa.rel == BoxRel::Excluded) continue;
        RegionState sb = classify_region(box, b);
        if (sb.rel == BoxRel::Excluded) continue;
        if (sa.rel == BoxRel::Contains && sb.rel == BoxRel::Contains) {
            TorusPoint w = box_center_point(box, a.dim);
            if (!a.contains(w) || !b.contains(w))
                throw spec_error("region_overlap: witness re-verification failed");
            res.status = OverlapStatus::Overlap;
            res.witness = std::move(w);
            return res;
        }
        std::set<int> blocked(sa.blocked.begin(), sa.blocked.end());
        blocked.insert(sb.blocked.begin(), sb.blocked.end());
        int split_slot = -1;
        Rational split_width(0);
        for (int coord : blocked) {
            size_t slot =
                std::lower_bound(box.coords.begin(), box.coords.end(), coord) - box.coords.begin();
            Rational w = box.width(slot);
            if (w > min_cell && w > split_width) {
                split_width = w;
                split_slot = static_cast<int>(slot);
            }
        }
        if (split_slot < 0) {
            TorusPoint w = box_center_point(box, a.dim);
            if (a.contains(w) && b.contains(w)) {
                res.status = OverlapStatus::Overlap;
                res.witness = std::move(w);
                return res;
            }
            undecided = true;
            continue;
        }
        Rational mid = (box.iv[split_slot].first + box.iv[split_slot].second) / 2;
        Box left = box, right = box;
        left.iv[split_slot].second = mid;
        right.iv[split_slot].first = mid;
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    res.status = undecided ? OverlapStatus::Undecided : OverlapStatus::Disjoint;
    return res;
}

}  // namespace fstruct

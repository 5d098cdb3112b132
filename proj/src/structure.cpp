#include "fstruct/structure.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fstruct {

int Chart::components() const {
    if (region.constraints.size() == 1 && region.constraints[0].sense == Sense::Inside)
        return static_cast<int>(region.constraints[0].centers.size());
    return 1;
}

std::vector<std::vector<Rational>> Chart::component_centers() const {
    if (region.constraints.size() == 1 && region.constraints[0].sense == Sense::Inside)
        return region.constraints[0].centers;
    return {};
}

Region Chart::component_subregion(int comp) const {
    if (components() == 1) return region;
    Region out;
    out.dim = region.dim;
    TubeConstraint c = region.constraints[0];
    c.centers = {c.centers[comp]};
    out.constraints.push_back(std::move(c));
    return out;
}

bool Chart::has_evaluable_action() const {
    for (const auto& a : actions)
        if (!std::holds_alternative<LiftedCircle>(a)) return true;
    return false;
}

const AffineMap* StructureSpec::find_generator(const std::string& name) const {
    for (const auto& [n, g] : generators)
        if (n == name) return &g;
    return nullptr;
}

const Chart* StructureSpec::find_chart(const std::string& id) const {
    for (const auto& c : charts)
        if (c.id == id) return &c;
    return nullptr;
}

AffineMap StructureSpec::element(const std::string& expr) const {
    AffineMap acc = AffineMap::identity(dim);
    size_t pos = 0;
    bool any = false;
    while (pos <= expr.size()) {
        size_t star = expr.find('*', pos);
        std::string name = expr.substr(pos, star == std::string::npos ? star : star - pos);
        if (name == "id" && !any && star == std::string::npos) return acc;
        const AffineMap* g = find_generator(name);
        if (!g) throw spec_error("unknown generator '" + name + "' in element '" + expr + "'");
        acc = any ? compose(acc, *g) : *g;
        any = true;
        if (star == std::string::npos) break;
        pos = star + 1;
    }
    return acc;
}

namespace {

using Status = PassResult::Status;

std::string element_name(const StructureSpec& spec, const FiniteGroup& group, int idx) {
    if (idx == 0) return "id";
    const auto& w = group.words[idx];
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += "*";
        out += spec.generators[w[i]].first;
    }
    return out;
}

struct Ctx {
    const StructureSpec& spec;
    const RunConfig& config;
    FiniteGroup group;
    std::vector<std::string> names;                 // per element index
    std::vector<FixedLocus> loci;                   // per element index
    VerificationReport report;

    PassResult* pass = nullptr;

    void begin_pass(const std::string& id, const std::string& name) {
        report.passes.push_back({id, name, Status::Pass, {}, {}});
        pass = &report.passes.back();
    }
    void fail(const std::string& msg) {
        pass->status = Status::Fail;
        pass->failures.push_back(msg);
    }
    void note(const std::string& msg) { pass->notes.push_back(msg); }
    void claim_result(const std::string& text, const std::string& expected,
                      const std::string& computed) {
        bool ok = expected == computed;
        report.claims.push_back({pass->id, text, expected, computed, ok});
        if (!ok) fail("claim '" + text + "': expected " + expected + ", computed " + computed);
    }

    int element_index(const std::string& expr) const {
        int idx = group.index_of(spec.element(expr));
        if (idx < 0) throw spec_error("element '" + expr + "' not in the closed group");
        return idx;
    }
    std::vector<int> subgroup_of(const std::vector<std::string>& gens) const {
        std::vector<int> gi;
        for (const auto& n : gens) gi.push_back(element_index(n));
        return group.subgroup(gi);
    }
};

// --- P1: group pass ---------------------------------------------------------

void pass_group(Ctx& cx) {
    cx.begin_pass("P1", "group");
    const auto& group = cx.group;
    cx.note("order " + std::to_string(group.order()));
    auto rank = group.elementary_abelian_rank();
    if (rank) cx.note("elementary abelian of rank " + std::to_string(*rank));

    bool gens_commute = true;
    for (size_t i = 0; i < cx.spec.generators.size(); ++i)
        for (size_t j = i + 1; j < cx.spec.generators.size(); ++j) {
            const auto& a = cx.spec.generators[i].second;
            const auto& b = cx.spec.generators[j].second;
            if (!(compose(a, b) == compose(b, a))) gens_commute = false;
        }

    for (const auto& claim : cx.spec.claims) {
        if (const auto* c = std::get_if<ClaimGroupOrder>(&claim))
            cx.claim_result("group-order", std::to_string(c->order),
                            std::to_string(group.order()));
        else if (const auto* t = std::get_if<ClaimGroupType>(&claim))
            cx.claim_result("group-type", "Z2^" + std::to_string(t->rank),
                            rank ? "Z2^" + std::to_string(*rank) : "not elementary abelian");
        else if (std::get_if<ClaimGeneratorsCommute>(&claim))
            cx.claim_result("generators-commute", "true", gens_commute ? "true" : "false");
    }
}

// --- P2: stratification pass -------------------------------------------------

std::vector<Slab> nonempty_intersections(const FixedLocus& a, const FixedLocus& b) {
    std::vector<Slab> out;
    for (const auto& sa : a.components)
        for (const auto& sb : b.components)
            if (auto s = intersect_slabs(sa, sb)) out.push_back(*s);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Resolution tubes constrain only fixed coordinates of the slab, so membership
// of the whole slab reduces to membership of one sample point.
bool region_contains_slab(const Region& r, const Slab& s) {
    for (const auto& c : r.constraints)
        for (int i : c.coords)
            if (!s.fixed.count(i)) return false;
    return r.contains(s.sample_point(Rational(1, 3)));
}

void pass_stratification(Ctx& cx) {
    cx.begin_pass("P2", "stratification");
    const auto& group = cx.group;
    const auto& spec = cx.spec;

    cx.loci.resize(group.order());
    for (int i = 0; i < group.order(); ++i) cx.loci[i] = fixed_locus(group.elements[i]);

    std::set<int> mentioned;  // elements with an explicit fixed/fixed-empty claim
    for (const auto& claim : spec.claims) {
        if (const auto* c = std::get_if<ClaimFixed>(&claim))
            mentioned.insert(cx.element_index(c->elem));
        else if (const auto* c2 = std::get_if<ClaimFixedEmpty>(&claim))
            mentioned.insert(cx.element_index(c2->elem));
        else if (const auto* c3 = std::get_if<ClaimFixedEqualsIntersection>(&claim))
            mentioned.insert(cx.element_index(c3->elem));
    }

    for (const auto& claim : spec.claims) {
        if (const auto* c = std::get_if<ClaimFixed>(&claim)) {
            const auto& locus = cx.loci[cx.element_index(c->elem)];
            long count = static_cast<long>(locus.components.size());
            int dim = locus.empty() ? -1 : locus.components[0].free_dim();
            cx.claim_result("fixed " + c->elem + " count", std::to_string(c->count),
                            std::to_string(count));
            cx.claim_result("fixed " + c->elem + " dim", std::to_string(c->dim),
                            std::to_string(dim));
        } else if (const auto* ce = std::get_if<ClaimFixedEmpty>(&claim)) {
            const auto& locus = cx.loci[cx.element_index(ce->elem)];
            cx.claim_result("fixed-empty " + ce->elem, "empty",
                            locus.empty() ? "empty" : std::to_string(locus.components.size()) +
                                                          " components");
        } else if (std::get_if<ClaimFixedEmptyOthers>(&claim)) {
            std::vector<std::string> offenders;
            for (int i = 1; i < group.order(); ++i)
                if (!mentioned.count(i) && !cx.loci[i].empty()) offenders.push_back(cx.names[i]);
            std::string computed = offenders.empty() ? "none" : offenders.front();
            cx.claim_result("fixed-empty-others", "none", computed);
        } else if (const auto* ci = std::get_if<ClaimFixedEqualsIntersection>(&claim)) {
            auto inter = nonempty_intersections(cx.loci[cx.element_index(ci->a)],
                                                cx.loci[cx.element_index(ci->b)]);
            auto fix = cx.loci[cx.element_index(ci->elem)].components;
            cx.claim_result("fixed-equals-intersection " + ci->elem, "equal",
                            inter == fix ? "equal" : "different");
        } else if (const auto* co = std::get_if<ClaimOrbits>(&claim)) {
            const auto& locus = cx.loci[cx.element_index(co->elem)];
            std::vector<int> elems =
                co->under.empty() ? std::vector<int>{} : cx.subgroup_of(co->under);
            auto orbits = component_orbits(group, locus.components, elems);
            bool uniform = true;
            for (const auto& o : orbits)
                if (static_cast<long>(o.size()) != co->size) uniform = false;
            std::string under = "all";
            if (!co->under.empty()) {
                under.clear();
                for (const auto& u : co->under) under += (under.empty() ? "" : " ") + u;
            }
            cx.claim_result("orbits " + co->elem + " under " + under + " count",
                            std::to_string(co->count), std::to_string(orbits.size()));
            cx.claim_result("orbits " + co->elem + " under " + under + " size",
                            std::to_string(co->size),
                            uniform ? std::to_string(co->size) : "non-uniform");
        } else if (const auto* cs = std::get_if<ClaimSingularOrbits>(&claim)) {
            std::vector<Slab> all;
            for (int i = 1; i < group.order(); ++i)
                all.insert(all.end(), cx.loci[i].components.begin(), cx.loci[i].components.end());
            std::sort(all.begin(), all.end());
            all.erase(std::unique(all.begin(), all.end()), all.end());
            auto orbits = component_orbits(group, all, {});
            bool uniform = true;
            for (const auto& o : orbits)
                if (static_cast<long>(o.size()) != cs->size) uniform = false;
            cx.claim_result("singular-orbits count", std::to_string(cs->count),
                            std::to_string(orbits.size()));
            cx.claim_result("singular-orbits size", std::to_string(cs->size),
                            uniform ? std::to_string(cs->size) : "non-uniform");
        } else if (const auto* cn = std::get_if<ClaimIntersection>(&claim)) {
            auto inter = nonempty_intersections(cx.loci[cx.element_index(cn->a)],
                                                cx.loci[cx.element_index(cn->b)]);
            bool all_points = true;
            for (const auto& s : inter)
                if (s.free_dim() != 0) all_points = false;
            cx.claim_result("intersection " + cn->a + " " + cn->b + " points",
                            std::to_string(cn->points),
                            all_points ? std::to_string(inter.size()) : "non-point components");
            std::vector<int> elems =
                cn->under.empty() ? std::vector<int>{} : cx.subgroup_of(cn->under);
            auto orbits = component_orbits(group, inter, elems);
            bool uniform = true;
            for (const auto& o : orbits)
                if (static_cast<long>(o.size()) != cn->size) uniform = false;
            cx.claim_result("intersection " + cn->a + " " + cn->b + " orbits",
                            std::to_string(cn->orbits), std::to_string(orbits.size()));
            cx.claim_result("intersection " + cn->a + " " + cn->b + " orbit size",
                            std::to_string(cn->size),
                            uniform ? std::to_string(cn->size) : "non-uniform");
        } else if (const auto* cd = std::get_if<ClaimSlabDisjoint>(&claim)) {
            auto inter = nonempty_intersections(cx.loci[cx.element_index(cd->a)],
                                                cx.loci[cx.element_index(cd->b)]);
            cx.claim_result("slab-disjoint " + cd->a + " " + cd->b, "disjoint",
                            inter.empty() ? "disjoint" : "meets in " +
                                                             std::to_string(inter.size()) +
                                                             " slabs");
        } else if (const auto* cc = std::get_if<ClaimChartComponents>(&claim)) {
            const Chart* ch = spec.find_chart(cc->chart);
            if (!ch) throw spec_error("claim references unknown chart '" + cc->chart + "'");
            cx.claim_result("chart-components " + cc->chart, std::to_string(cc->count),
                            std::to_string(ch->components()));
        } else if (const auto* cq = std::get_if<ClaimQuotientComponents>(&claim)) {
            const Chart* ch = spec.find_chart(cq->chart);
            if (!ch) throw spec_error("claim references unknown chart '" + cq->chart + "'");
            long orbits = 1;
            if (ch->components() > 1) {
                auto centers = ch->component_centers();
                const auto& coords = ch->region.constraints[0].coords;
                std::vector<int> orbit(centers.size(), -1);
                long n_orbits = 0;
                for (size_t c0 = 0; c0 < centers.size(); ++c0) {
                    if (orbit[c0] >= 0) continue;
                    orbit[c0] = static_cast<int>(n_orbits++);
                    std::vector<size_t> frontier = {c0};
                    while (!frontier.empty()) {
                        size_t c = frontier.back();
                        frontier.pop_back();
                        for (const auto& g : group.elements) {
                            std::vector<Rational> img(coords.size());
                            for (size_t k = 0; k < coords.size(); ++k)
                                img[k] = mod1(Rational(g.signs[coords[k]]) * centers[c][k] +
                                              g.shift.coords[coords[k]]);
                            for (size_t c2 = 0; c2 < centers.size(); ++c2)
                                if (centers[c2] == img && orbit[c2] < 0) {
                                    orbit[c2] = orbit[c0];
                                    frontier.push_back(c2);
                                }
                        }
                    }
                }
                orbits = n_orbits;
            }
            cx.claim_result("quotient-components " + cq->chart, std::to_string(cq->count),
                            std::to_string(orbits));
        } else if (const auto* cj = std::get_if<ClaimChartsDisjoint>(&claim)) {
            std::vector<Region> tubes;
            std::string label = "charts-disjoint";
            for (const auto& id : cj->charts) {
                const Chart* ch = spec.find_chart(id);
                if (!ch) throw spec_error("claim references unknown chart '" + id + "'");
                tubes.push_back(ch->region);
                label += " " + id;
            }
            auto res = pairwise_disjoint(tubes);
            std::string computed = "disjoint";
            if (!res.disjoint)
                computed = cj->charts[res.pair_a] + " meets " + cj->charts[res.pair_b] + " at " +
                           res.witness->str();
            cx.claim_result(label, "disjoint", computed);
        }
    }

    // Resolution references and containment of the singular set in the
    // resolution tubes.
    for (const auto& rc : spec.resolutions) {
        const Chart* ch = spec.find_chart(rc.chart_id);
        if (!ch) throw spec_error("resolution '" + rc.id + "' references unknown chart");
        int ei = cx.element_index(rc.locus);
        const auto& locus = cx.loci[ei];
        if (locus.empty()) {
            cx.fail("resolution " + rc.id + ": locus " + rc.locus + " has empty fixed set");
            continue;
        }
        auto orbits = component_orbits(group, locus.components, {});
        if (rc.orbit_index < 0 || rc.orbit_index >= static_cast<int>(orbits.size())) {
            cx.fail("resolution " + rc.id + ": orbit index " + std::to_string(rc.orbit_index) +
                    " out of range (" + std::to_string(orbits.size()) + " orbits)");
            continue;
        }
        int slab_dim = locus.components[0].free_dim();
        if (slab_dim + 4 != spec.dim)
            cx.fail("resolution " + rc.id + ": model resolves a codimension-4 locus but " +
                    rc.locus + " components have codimension " +
                    std::to_string(spec.dim - slab_dim));
        for (int ci : orbits[rc.orbit_index])
            if (!region_contains_slab(ch->region, locus.components[ci]))
                cx.fail("resolution " + rc.id + ": component " + locus.components[ci].str() +
                        " not inside chart " + rc.chart_id);
        // Boundary compatibility: the referenced primitive must act tangentially
        // to the singular slabs (flows) or in their normal coordinates (circles).
        const Chart* bch = spec.find_chart(rc.boundary_chart);
        if (!bch || rc.boundary_action < 0 ||
            rc.boundary_action >= static_cast<int>(bch->actions.size()))
            throw spec_error("resolution '" + rc.id + "' has an unresolved boundary action");
        const Slab& rep = locus.components[orbits[rc.orbit_index][0]];
        const auto& act = bch->actions[rc.boundary_action];
        if (const auto* lf = std::get_if<LiftedFlow>(&act)) {
            for (int i : lf->flow.support())
                if (rep.fixed.count(i))
                    cx.fail("resolution " + rc.id + ": boundary flow moves fixed coordinate x" +
                            std::to_string(i + 1));
        } else if (const auto* lc = std::get_if<LiftedCircle>(&act)) {
            for (const auto& p : lc->pairs)
                if (!rep.fixed.count(p.first) || !rep.fixed.count(p.second))
                    cx.fail("resolution " + rc.id +
                            ": boundary circle pair is not normal to the singular slab");
        } else {
            const auto* lr = std::get_if<LiftedRotation>(&act);
            if (!rep.fixed.count(lr->pair.first) || !rep.fixed.count(lr->pair.second))
                cx.fail("resolution " + rc.id +
                        ": boundary rotation pair is not normal to the singular slab");
        }
    }
    if (!spec.resolutions.empty()) {
        for (int i = 1; i < group.order(); ++i)
            for (const auto& comp : cx.loci[i].components) {
                bool housed = false;
                for (const auto& rc : spec.resolutions) {
                    const Chart* ch = spec.find_chart(rc.chart_id);
                    if (ch && region_contains_slab(ch->region, comp)) {
                        housed = true;
                        break;
                    }
                }
                if (!housed) {
                    cx.fail("singular component " + comp.str() + " of " + cx.names[i] +
                            " lies in no resolution chart");
                    break;
                }
            }
    }
}

// --- P3: cover pass ----------------------------------------------------------

void pass_cover(Ctx& cx) {
    cx.begin_pass("P3", "cover");
    const auto& spec = cx.spec;
    std::vector<Region> family;
    std::vector<std::string> ids;
    const ClaimCover* claim = nullptr;
    for (const auto& c : spec.claims)
        if (const auto* cc = std::get_if<ClaimCover>(&c)) claim = cc;
    if (claim) {
        for (const auto& id : claim->charts) {
            const Chart* ch = spec.find_chart(id);
            if (!ch) throw spec_error("cover claim references unknown chart '" + id + "'");
            family.push_back(ch->region);
            ids.push_back(id);
        }
    } else {
        for (const auto& ch : spec.charts) {
            family.push_back(ch.region);
            ids.push_back(ch.id);
        }
    }
    auto res = check_cover(family, cx.config.min_cell, spec.dim);
    cx.note("boxes processed: " + std::to_string(res.boxes_processed));
    std::string computed;
    switch (res.status) {
        case CoverResult::Status::Covered:
            computed = "covered";
            break;
        case CoverResult::Status::Uncovered:
            computed = "uncovered, witness " + res.witness->str();
            break;
        case CoverResult::Status::Undecided:
            computed = "undecided (" + std::to_string(res.undecided.size()) +
                       " boxes at min_cell " + rat_str(cx.config.min_cell) + ")";
            break;
    }
    cx.claim_result("cover", "covered", computed);
}

// --- P4: invariance pass -----------------------------------------------------

void pass_invariance(Ctx& cx) {
    cx.begin_pass("P4", "invariance");
    const auto& spec = cx.spec;
    for (const auto& ch : spec.charts) {
        for (int gi = 1; gi < cx.group.order(); ++gi)
            if (!region_invariant_under(cx.group.elements[gi], ch.region))
                cx.fail("chart " + ch.id + ": region not invariant under " + cx.names[gi]);

        auto centers = ch.component_centers();
        for (size_t ai = 0; ai < ch.actions.size(); ++ai) {
            const auto& act = ch.actions[ai];
            for (const auto& con : ch.region.constraints) {
                auto touches = [&](int coord) {
                    return std::binary_search(con.coords.begin(), con.coords.end(), coord);
                };
                if (const auto* lf = std::get_if<LiftedFlow>(&act)) {
                    for (int i : lf->flow.support())
                        if (touches(i))
                            cx.fail("chart " + ch.id + ": flow moves constrained coordinate x" +
                                    std::to_string(i + 1));
                } else if (const auto* lr = std::get_if<LiftedRotation>(&act)) {
                    bool a = touches(lr->pair.first), b = touches(lr->pair.second);
                    if (!a && !b) continue;
                    if (!(a && b) || con.sense != Sense::Inside) {
                        cx.fail("chart " + ch.id + ": rotation pair clashes with a constraint");
                        continue;
                    }
                    // Per component the rotation must spin about the tube center.
                    for (size_t c = 0; c < lr->centers.size(); ++c) {
                        size_t ka = std::lower_bound(con.coords.begin(), con.coords.end(),
                                                     lr->pair.first) -
                                    con.coords.begin();
                        size_t kb = std::lower_bound(con.coords.begin(), con.coords.end(),
                                                     lr->pair.second) -
                                    con.coords.begin();
                        const auto& tube = centers.empty() ? con.centers[0] : centers[c];
                        if (tube[ka] != lr->centers[c][0] || tube[kb] != lr->centers[c][1])
                            cx.fail("chart " + ch.id +
                                    ": rotation center differs from the tube center");
                    }
                } else if (const auto* lc = std::get_if<LiftedCircle>(&act)) {
                    for (const auto& p : lc->pairs) {
                        bool a = touches(p.first), b = touches(p.second);
                        if (a != b || (a && con.sense != Sense::Inside))
                            cx.fail("chart " + ch.id + ": circle pair clashes with a constraint");
                    }
                }
            }
        }
    }
}

// --- P5: equivariance pass ---------------------------------------------------

// Extension of a generator-indexed psi table over the deck subgroup, walking
// products of deck generators from the identity.
std::map<int, std::vector<int>> extend_psi(const Ctx& cx, const Chart& ch,
                                           const std::vector<int>& scope) {
    std::map<int, std::vector<int>> out;
    out[0] = std::vector<int>(ch.rank, 1);
    std::vector<int> frontier = {0};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int e : frontier)
            for (const auto& gname : ch.deck_gens) {
                auto it = ch.psi.find(gname);
                if (it == ch.psi.end())
                    throw spec_error("chart " + ch.id + ": psi missing for generator " + gname);
                int gi = cx.element_index(gname);
                int p = cx.group.mul(gi, e);
                if (out.count(p)) continue;
                std::vector<int> diag(ch.rank);
                for (int k = 0; k < ch.rank; ++k) diag[k] = it->second[k] * out[e][k];
                out[p] = std::move(diag);
                next.push_back(p);
            }
        frontier = std::move(next);
    }
    for (int e : scope)
        if (!out.count(e))
            throw spec_error("chart " + ch.id + ": psi extension misses a deck element");
    return out;
}

// Component permutation induced by a deck element on a chart's tube components.
std::vector<int> component_permutation(const Chart& ch, const AffineMap& g) {
    int n = ch.components();
    if (n == 1) return {0};
    auto centers = ch.component_centers();
    const auto& coords = ch.region.constraints[0].coords;
    std::vector<int> perm(n, -1);
    for (int c = 0; c < n; ++c) {
        std::vector<Rational> img(coords.size());
        for (size_t k = 0; k < coords.size(); ++k)
            img[k] = mod1(Rational(g.signs[coords[k]]) * centers[c][k] + g.shift.coords[coords[k]]);
        for (int c2 = 0; c2 < n; ++c2)
            if (centers[c2] == img) {
                perm[c] = c2;
                break;
            }
        if (perm[c] < 0)
            throw spec_error("chart " + ch.id + ": component image missing (region not invariant)");
    }
    return perm;
}

void pass_equivariance(Ctx& cx) {
    cx.begin_pass("P5", "equivariance");
    const auto& spec = cx.spec;
    for (const auto& ch : spec.charts) {
        std::vector<int> scope;
        if (ch.covering == CoveringKind::Quotient)
            scope = cx.subgroup_of(ch.deck_gens);
        else
            for (int i = 0; i < cx.group.order(); ++i) scope.push_back(i);

        std::map<int, std::vector<int>> psi;
        if (ch.covering == CoveringKind::Quotient) {
            psi = extend_psi(cx, ch, scope);
            // Homomorphism property over the subgroup composition table.
            for (int a : scope)
                for (int b : scope) {
                    int p = cx.group.mul(a, b);
                    std::vector<int> prod(ch.rank);
                    for (int k = 0; k < ch.rank; ++k) prod[k] = psi[a][k] * psi[b][k];
                    if (psi.at(p) != prod)
                        cx.fail("chart " + ch.id + ": psi is not a homomorphism at " +
                                cx.names[a] + ", " + cx.names[b]);
                }
        } else {
            for (int e : scope) psi[e] = std::vector<int>(ch.rank, 1);
        }

        bool trivial = ch.covering == CoveringKind::Trivial;
        for (int gi : scope) {
            if (gi == 0) continue;
            const AffineMap& g = cx.group.elements[gi];
            std::vector<int> perm;
            try {
                perm = component_permutation(ch, g);
            } catch (const spec_error&) {
                continue;  // already reported by P4
            }
            const auto& diag = psi.at(gi);
            for (const auto& act : ch.actions) {
                if (const auto* lf = std::get_if<LiftedFlow>(&act)) {
                    auto sign_of = [&](int c) {
                        return lf->comp_signs.empty() ? 1 : lf->comp_signs[c];
                    };
                    for (int c = 0; c < ch.components(); ++c) {
                        int c2 = perm[c];
                        bool ok = true;
                        for (int j = 0; j < lf->flow.rank_k() && ok; ++j)
                            for (int i = 0; i < spec.dim && ok; ++i)
                                if (sign_of(c) * g.signs[i] * lf->flow.columns[j][i] !=
                                    sign_of(c2) * lf->flow.columns[j][i] * diag[j])
                                    ok = false;
                        if (!ok)
                            cx.fail("chart " + ch.id + ", element " + cx.names[gi] +
                                    ": condition (4) fails for the lifted flow" +
                                    (trivial ? " (descent to the quotient)" : ""));
                    }
                } else if (const auto* lr = std::get_if<LiftedRotation>(&act)) {
                    int si = g.signs[lr->pair.first], sj = g.signs[lr->pair.second];
                    for (int c = 0; c < ch.components(); ++c) {
                        int c2 = perm[c];
                        Rational mi = mod1(Rational(si) * lr->centers[c][0] +
                                           g.shift.coords[lr->pair.first]);
                        Rational mj = mod1(Rational(sj) * lr->centers[c][1] +
                                           g.shift.coords[lr->pair.second]);
                        if (mi != lr->centers[c2][0] || mj != lr->centers[c2][1])
                            cx.fail("chart " + ch.id + ", element " + cx.names[gi] +
                                    ": rotation center is not mapped to the image center");
                        if (si * sj * lr->orients[c] != diag[0] * lr->orients[c2])
                            cx.fail("chart " + ch.id + ", element " + cx.names[gi] +
                                    ": rotation orientation breaks condition (4)");
                    }
                } else if (const auto* lc = std::get_if<LiftedCircle>(&act)) {
                    for (int c = 0; c < ch.components(); ++c) {
                        int c2 = perm[c];
                        for (int p = 0; p < 2; ++p) {
                            int rho = g.signs[lc->pairs[p].first] * g.signs[lc->pairs[p].second];
                            if (rho * lc->orients[c][p] != diag[0] * lc->orients[c2][p])
                                cx.fail("chart " + ch.id + ", element " + cx.names[gi] +
                                        ": declared circle orientation tags are inconsistent");
                        }
                    }
                }
            }
        }
        if (!ch.has_evaluable_action())
            cx.note("chart " + ch.id + ": declared circle action, interior taken as stated");
    }
}

// --- P6: overlap pass --------------------------------------------------------

ActionPrimitive instantiate(const StructureSpec& spec, const Chart& ch,
                            const ChartActionSpec& act, int comp) {
    if (const auto* lf = std::get_if<LiftedFlow>(&act)) return lf->flow;
    if (const auto* lr = std::get_if<LiftedRotation>(&act)) {
        PairRotation r;
        r.dim = spec.dim;
        r.pair = lr->pair;
        r.center = lr->centers[comp];
        r.orient = lr->orients[comp];
        return r;
    }
    const auto& lc = std::get<LiftedCircle>(act);
    ChartCircle c;
    c.dim = spec.dim;
    c.pairs = lc.pairs;
    c.weights = lc.weights;
    c.orients = lc.orients[comp];
    auto centers = ch.component_centers();
    const auto& coords = ch.region.constraints[0].coords;
    const auto& tube = centers.empty() ? ch.region.constraints[0].centers[0] : centers[comp];
    c.center.resize(4);
    int idx = 0;
    for (const auto& p : lc.pairs)
        for (int coord : {p.first, p.second}) {
            size_t k = std::lower_bound(coords.begin(), coords.end(), coord) - coords.begin();
            c.center[idx++] = tube[k];
        }
    return c;
}

void pass_overlap(Ctx& cx) {
    cx.begin_pass("P6", "overlap");
    const auto& spec = cx.spec;
    for (size_t a = 0; a < spec.charts.size(); ++a)
        for (size_t b = a + 1; b < spec.charts.size(); ++b) {
            const Chart& A = spec.charts[a];
            const Chart& B = spec.charts[b];
            auto whole = region_overlap(A.region, B.region, cx.config.min_cell);
            if (whole.status == OverlapStatus::Disjoint) continue;
            if (whole.status == OverlapStatus::Undecided)
                cx.note("charts " + A.id + ", " + B.id +
                        ": overlap undecided, checked conservatively");

            // Component pairs that actually meet.
            std::vector<std::pair<int, int>> pairs;
            for (int ca = 0; ca < A.components(); ++ca) {
                Region ra = A.component_subregion(ca);
                for (int cb = 0; cb < B.components(); ++cb) {
                    Region rb = B.component_subregion(cb);
                    auto ov = (A.components() == 1 && B.components() == 1)
                                  ? whole
                                  : region_overlap(ra, rb, cx.config.min_cell);
                    if (ov.status != OverlapStatus::Disjoint) pairs.emplace_back(ca, cb);
                }
            }
            for (auto [ca, cb] : pairs)
                for (size_t ai = 0; ai < A.actions.size(); ++ai)
                    for (size_t bi = 0; bi < B.actions.size(); ++bi) {
                        auto pa = instantiate(spec, A, A.actions[ai], ca);
                        auto pb = instantiate(spec, B, B.actions[bi], cb);
                        if (!commute_check(pa, pb))
                            cx.fail("charts " + A.id + ", " + B.id + ": actions #" +
                                    std::to_string(ai) + "/#" + std::to_string(bi) +
                                    " do not commute on the overlap (components " +
                                    std::to_string(ca) + "," + std::to_string(cb) + ")");
                    }
        }
}

}  // namespace

// --- P7: polarization --------------------------------------------------------

namespace {

struct SamplePool {
    std::vector<TorusPoint> points;
};

Rational random_rat(std::mt19937_64& rng) { return Rational(static_cast<long>(rng() % 509), 509); }

TorusPoint random_point(std::mt19937_64& rng, int dim) {
    std::vector<Rational> c(dim);
    for (auto& q : c) q = random_rat(rng);
    return TorusPoint(std::move(c));
}

}  // namespace

PolarizationResult check_polarized(const StructureSpec& spec, const FiniteGroup& group,
                                   const RunConfig& config) {
    (void)group;
    PolarizationResult res;
    std::vector<const Chart*> included;
    std::vector<std::string> excluded;
    for (const auto& ch : spec.charts)
        (ch.has_evaluable_action() ? (void)included.push_back(&ch)
                                   : (void)excluded.push_back(ch.id));
    if (!excluded.empty()) {
        std::string note = "declared-circle charts excluded from orbit sampling:";
        for (const auto& id : excluded) note += " " + id;
        res.notes.push_back(note);
    }

    std::mt19937_64 rng(config.seed);
    SamplePool pool;
    auto push_if_member = [&](TorusPoint p, const Chart* require) {
        if (require && !require->region.contains(p)) return;
        pool.points.push_back(std::move(p));
    };

    for (const Chart* ch : included) {
        auto centers = ch->component_centers();
        const auto* con = ch->region.constraints.empty() ? nullptr : &ch->region.constraints[0];
        if (!centers.empty() && con) {
            for (const auto& center : centers) {
                TorusPoint base = random_point(rng, spec.dim);
                for (size_t k = 0; k < con->coords.size(); ++k)
                    base.coords[con->coords[k]] = center[k];
                push_if_member(base, ch);
                for (int s = 0; s < config.samples_per_stratum / 4 + 1; ++s) {
                    TorusPoint p = random_point(rng, spec.dim);
                    for (size_t k = 0; k < con->coords.size(); ++k)
                        p.coords[con->coords[k]] =
                            mod1(center[k] + con->radius * Rational(static_cast<long>(rng() % 7) - 3,
                                                                    8));
                    push_if_member(p, ch);
                }
            }
        } else {
            for (int s = 0; s < config.samples_per_stratum * 4; ++s)
                push_if_member(random_point(rng, spec.dim), ch);
        }
        // Rotation center slabs and their perturbations: the polarization-critical
        // points sit exactly on the centers.
        for (const auto& act : ch->actions) {
            const auto* lr = std::get_if<LiftedRotation>(&act);
            if (!lr) continue;
            for (size_t c = 0; c < lr->centers.size(); ++c) {
                for (int s = 0; s < 4; ++s) {
                    TorusPoint p = random_point(rng, spec.dim);
                    if (!centers.empty() && con)
                        for (size_t k = 0; k < con->coords.size(); ++k)
                            p.coords[con->coords[k]] = centers[c][k];
                    p.coords[lr->pair.first] = lr->centers[c][0];
                    p.coords[lr->pair.second] = lr->centers[c][1];
                    push_if_member(p, ch);
                    TorusPoint q = p;
                    q.coords[lr->pair.first] =
                        mod1(lr->centers[c][0] + ch->region.constraints[0].radius / 8);
                    push_if_member(q, ch);
                }
            }
        }
    }
    for (int s = 0; s < config.samples_per_stratum * static_cast<int>(spec.charts.size()); ++s)
        pool.points.push_back(random_point(rng, spec.dim));

    // Strata = chart-membership signatures over the included charts. Points
    // inside an excluded chart are dropped: the declared actions there could
    // raise the orbit dimension invisibly.
    std::map<std::vector<bool>, std::vector<size_t>> strata;
    for (size_t pi = 0; pi < pool.points.size(); ++pi) {
        bool in_excluded = false;
        for (const auto& ch : spec.charts)
            if (!ch.has_evaluable_action() && ch.region.contains(pool.points[pi]))
                in_excluded = true;
        if (in_excluded) continue;
        std::vector<bool> sig(included.size(), false);
        bool any = false;
        for (size_t c = 0; c < included.size(); ++c) {
            sig[c] = included[c]->region.contains(pool.points[pi]);
            any = any || sig[c];
        }
        if (any) strata[sig].push_back(pi);
    }
    res.notes.push_back("strata sampled: " + std::to_string(strata.size()));

    auto dim_at = [&](const std::vector<bool>& sig, const TorusPoint& x) {
        std::vector<ActionPrimitive> prims;
        for (size_t c = 0; c < included.size(); ++c) {
            if (!sig[c]) continue;
            const Chart* ch = included[c];
            int comp = 0;
            if (ch->components() > 1) {
                comp = -1;
                for (int k = 0; k < ch->components(); ++k)
                    if (ch->component_subregion(k).contains(x)) {
                        comp = k;
                        break;
                    }
                if (comp < 0) throw spec_error("polarization: point lost its component");
            }
            for (const auto& act : ch->actions)
                if (!std::holds_alternative<LiftedCircle>(act))
                    prims.push_back(instantiate(spec, *ch, act, comp));
        }
        return orbit_dim_at(prims, x);
    };

    for (const auto& [sig, idxs] : strata) {
        int generic = -1;
        for (size_t pi : idxs) generic = std::max(generic, dim_at(sig, pool.points[pi]));
        for (size_t pi : idxs) {
            int d = dim_at(sig, pool.points[pi]);
            if (d < generic) {
                res.polarized = false;
                res.witness = pool.points[pi];
                std::string charts;
                for (size_t c = 0; c < included.size(); ++c)
                    if (sig[c]) charts += (charts.empty() ? "" : ",") + included[c]->id;
                res.witness_desc = "orbit dimension " + std::to_string(d) + " vs generic " +
                                   std::to_string(generic) + " in stratum {" + charts + "} at " +
                                   pool.points[pi].str();
                return res;
            }
        }
    }
    res.notes.push_back("pass is sampling-based (" +
                        std::to_string(config.samples_per_stratum) + " samples per stratum)");
    return res;
}

// --- verify ------------------------------------------------------------------

VerificationReport verify(const StructureSpec& spec, const RunConfig& config) {
    std::vector<AffineMap> gens;
    for (const auto& [n, g] : spec.generators) gens.push_back(g);
    Ctx cx{spec, config, group_closure(gens, config.group_bound), {}, {}, {}};
    cx.report.spec_name = spec.name;
    cx.names.resize(cx.group.order());
    for (int i = 0; i < cx.group.order(); ++i) cx.names[i] = element_name(spec, cx.group, i);

    for (const auto& claim : spec.claims)
        if (const auto* n = std::get_if<ClaimNote>(&claim)) cx.report.flags.push_back(n->text);

    pass_group(cx);
    pass_stratification(cx);
    pass_cover(cx);
    pass_invariance(cx);
    pass_equivariance(cx);
    pass_overlap(cx);

    bool p16 = true;
    for (const auto& p : cx.report.passes)
        if (p.status == Status::Fail) p16 = false;

    cx.begin_pass("P7", "polarization");
    if (!p16) {
        cx.pass->status = Status::Skip;
        cx.note("skipped: P1-P6 did not all pass");
        cx.report.polarization = "skipped";
    } else {
        auto pol = check_polarized(spec, cx.group, config);
        for (const auto& n : pol.notes) cx.note(n);
        cx.report.polarization = pol.polarized ? "polarized" : "not polarized";
        if (pol.witness) cx.report.polarization_witness = pol.witness_desc;
        for (const auto& claim : spec.claims)
            if (const auto* pc = std::get_if<ClaimPolarized>(&claim))
                cx.claim_result("polarized", pc->value ? "polarized" : "not polarized",
                                cx.report.polarization);
    }

    cx.report.ok = true;
    for (const auto& p : cx.report.passes)
        if (p.status == Status::Fail) {
            cx.report.ok = false;
            if (cx.report.first_failure.empty()) cx.report.first_failure = p.id;
        }
    return cx.report;
}

// --- derived claims ----------------------------------------------------------

std::vector<Claim> derive_claims(const StructureSpec& spec, const RunConfig& config) {
    std::vector<AffineMap> gens;
    for (const auto& [n, g] : spec.generators) gens.push_back(g);
    FiniteGroup group = group_closure(gens, config.group_bound);
    std::vector<std::string> names(group.order());
    for (int i = 0; i < group.order(); ++i) names[i] = element_name(spec, group, i);
    std::vector<FixedLocus> loci(group.order());
    for (int i = 0; i < group.order(); ++i) loci[i] = fixed_locus(group.elements[i]);

    std::vector<Claim> out;
    out.push_back(ClaimGroupOrder{group.order()});
    if (auto r = group.elementary_abelian_rank()) out.push_back(ClaimGroupType{*r});
    bool commute = true;
    for (size_t i = 0; i < gens.size(); ++i)
        for (size_t j = i + 1; j < gens.size(); ++j)
            if (!(compose(gens[i], gens[j]) == compose(gens[j], gens[i]))) commute = false;
    if (commute) out.push_back(ClaimGeneratorsCommute{});

    bool any_empty = false;
    for (int i = 1; i < group.order(); ++i) {
        if (loci[i].empty()) {
            any_empty = true;
            continue;
        }
        out.push_back(ClaimFixed{names[i], static_cast<long>(loci[i].components.size()),
                                 loci[i].components[0].free_dim()});
    }
    if (any_empty) out.push_back(ClaimFixedEmptyOthers{});

    // Orbit partitions of the generator loci under the full deck group.
    for (size_t gi = 0; gi < gens.size(); ++gi) {
        int idx = group.generator_indices[gi];
        if (loci[idx].empty()) continue;
        auto orbits = component_orbits(group, loci[idx].components, {});
        bool uniform = true;
        for (const auto& o : orbits)
            if (o.size() != orbits[0].size()) uniform = false;
        if (uniform)
            out.push_back(ClaimOrbits{names[idx], {}, static_cast<long>(orbits.size()),
                                      static_cast<long>(orbits[0].size())});
    }
    // Pairwise generator intersections.
    for (size_t a = 0; a < gens.size(); ++a)
        for (size_t b = a + 1; b < gens.size(); ++b) {
            int ia = group.generator_indices[a], ib = group.generator_indices[b];
            auto inter = nonempty_intersections(loci[ia], loci[ib]);
            if (inter.empty()) continue;
            int prod = group.mul(ia, ib);
            if (!loci[prod].empty() && loci[prod].components == inter)
                out.push_back(ClaimFixedEqualsIntersection{names[prod], names[ia], names[ib]});
            bool all_points = true;
            for (const auto& s : inter)
                if (s.free_dim() != 0) all_points = false;
            if (!all_points) continue;
            auto orbits = component_orbits(group, inter, {});
            bool uniform = true;
            for (const auto& o : orbits)
                if (o.size() != orbits[0].size()) uniform = false;
            if (uniform)
                out.push_back(ClaimIntersection{names[ia], names[ib],
                                                static_cast<long>(inter.size()),
                                                static_cast<long>(orbits.size()),
                                                static_cast<long>(orbits[0].size()),
                                                {}});
        }
    // Joint singular partition, when the orbit sizes are uniform.
    {
        std::vector<Slab> all;
        for (int i = 1; i < group.order(); ++i)
            all.insert(all.end(), loci[i].components.begin(), loci[i].components.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        if (!all.empty()) {
            auto orbits = component_orbits(group, all, {});
            bool uniform = true;
            for (const auto& o : orbits)
                if (o.size() != orbits[0].size()) uniform = false;
            if (uniform)
                out.push_back(ClaimSingularOrbits{static_cast<long>(orbits.size()),
                                                  static_cast<long>(orbits[0].size())});
        }
    }
    return out;
}

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += " " + s;
    return out;
}

}  // namespace

std::string claim_to_line(const Claim& c) {
    std::ostringstream os;
    if (const auto* x = std::get_if<ClaimGroupOrder>(&c))
        os << "claim group-order " << x->order;
    else if (const auto* x = std::get_if<ClaimGroupType>(&c))
        os << "claim group-type Z2^" << x->rank;
    else if (std::get_if<ClaimGeneratorsCommute>(&c))
        os << "claim generators-commute";
    else if (const auto* x = std::get_if<ClaimFixed>(&c))
        os << "claim fixed " << x->elem << " count " << x->count << " dim " << x->dim;
    else if (const auto* x = std::get_if<ClaimFixedEmpty>(&c))
        os << "claim fixed-empty " << x->elem;
    else if (std::get_if<ClaimFixedEmptyOthers>(&c))
        os << "claim fixed-empty-others";
    else if (const auto* x = std::get_if<ClaimFixedEqualsIntersection>(&c))
        os << "claim fixed-equals-intersection " << x->elem << " " << x->a << " " << x->b;
    else if (const auto* x = std::get_if<ClaimOrbits>(&c))
        os << "claim orbits " << x->elem << " under"
           << (x->under.empty() ? " all" : join(x->under)) << " count " << x->count << " size "
           << x->size;
    else if (const auto* x = std::get_if<ClaimSingularOrbits>(&c))
        os << "claim singular-orbits count " << x->count << " size " << x->size;
    else if (const auto* x = std::get_if<ClaimIntersection>(&c))
        os << "claim intersection " << x->a << " " << x->b << " points " << x->points
           << " orbits " << x->orbits << " size " << x->size << " under"
           << (x->under.empty() ? " all" : join(x->under));
    else if (const auto* x = std::get_if<ClaimSlabDisjoint>(&c))
        os << "claim slab-disjoint " << x->a << " " << x->b;
    else if (const auto* x = std::get_if<ClaimChartComponents>(&c))
        os << "claim chart-components " << x->chart << " " << x->count;
    else if (const auto* x = std::get_if<ClaimQuotientComponents>(&c))
        os << "claim quotient-components " << x->chart << " " << x->count;
    else if (const auto* x = std::get_if<ClaimChartsDisjoint>(&c))
        os << "claim charts-disjoint" << join(x->charts);
    else if (const auto* x = std::get_if<ClaimCover>(&c))
        os << "claim cover" << join(x->charts);
    else if (const auto* x = std::get_if<ClaimPolarized>(&c))
        os << "claim polarized " << (x->value ? "true" : "false");
    else if (const auto* x = std::get_if<ClaimNote>(&c))
        os << "claim note \"" << x->text << "\"";
    return os.str();
}

// --- report emission ---------------------------------------------------------

std::string VerificationReport::to_text() const {
    std::ostringstream os;
    os << "spec " << spec_name << "\n";
    for (const auto& p : passes) {
        const char* st = p.status == PassResult::Status::Pass
                             ? "PASS"
                             : (p.status == PassResult::Status::Fail ? "FAIL" : "SKIP");
        os << p.id << " " << p.name << ": " << st << "\n";
        for (const auto& n : p.notes) os << "    note: " << n << "\n";
        for (const auto& f : p.failures) os << "    fail: " << f << "\n";
    }
    os << "claims:\n";
    for (const auto& c : claims)
        os << "    [" << (c.ok ? "ok" : "FAIL") << "] (" << c.pass << ") " << c.text
           << ": expected " << c.expected << ", computed " << c.computed << "\n";
    os << "polarization: " << polarization << "\n";
    if (polarization_witness) os << "    witness: " << *polarization_witness << "\n";
    for (const auto& f : flags) os << "flag: " << f << "\n";
    os << "verdict: " << (ok ? "pass" : "fail");
    if (!ok) os << " (first failing pass " << first_failure << ")";
    os << "\n";
    return os.str();
}

std::string VerificationReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "fstruct-report/1";
    j["spec"] = spec_name;
    j["passes"] = nlohmann::json::array();
    for (const auto& p : passes) {
        nlohmann::json pj;
        pj["id"] = p.id;
        pj["name"] = p.name;
        pj["status"] = p.status == PassResult::Status::Pass
                           ? "pass"
                           : (p.status == PassResult::Status::Fail ? "fail" : "skip");
        pj["notes"] = p.notes;
        pj["failures"] = p.failures;
        j["passes"].push_back(pj);
    }
    j["claims"] = nlohmann::json::array();
    for (const auto& c : claims) {
        nlohmann::json cj;
        cj["pass"] = c.pass;
        cj["text"] = c.text;
        cj["expected"] = c.expected;
        cj["computed"] = c.computed;
        cj["ok"] = c.ok;
        j["claims"].push_back(cj);
    }
    j["polarization"] = polarization;
    if (polarization_witness) j["polarization_witness"] = *polarization_witness;
    j["flags"] = flags;
    j["verdict"] = ok ? "pass" : "fail";
    j["first_failure"] = first_failure;
    return j.dump(2) + "\n";
}

}  // namespace fstruct

#include "fstruct/torus.hpp"

#include <algorithm>
#include <sstream>

namespace fstruct {

TorusPoint::TorusPoint(std::vector<Rational> c) : coords(std::move(c)) {
    for (auto& q : coords) q = mod1(q);
}

bool TorusPoint::operator<(const TorusPoint& o) const {
    return std::lexicographical_compare(coords.begin(), coords.end(), o.coords.begin(),
                                        o.coords.end());
}

std::string TorusPoint::str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < coords.size(); ++i) os << (i ? "," : "") << rat_str(coords[i]);
    os << ")";
    return os.str();
}

TorusPoint AffineMap::apply(const TorusPoint& x) const {
    if (x.dim() != dim()) throw spec_error("AffineMap::apply: dimension mismatch");
    std::vector<Rational> out(x.coords.size());
    for (int i = 0; i < dim(); ++i)
        out[i] = Rational(signs[i]) * x.coords[i] + shift.coords[i];
    return TorusPoint(std::move(out));
}

AffineMap AffineMap::identity(int n) {
    AffineMap m;
    m.signs.assign(n, 1);
    m.shift = TorusPoint(std::vector<Rational>(n, Rational(0)));
    return m;
}

bool AffineMap::is_identity() const {
    for (int s : signs)
        if (s != 1) return false;
    for (const auto& q : shift.coords)
        if (q != 0) return false;
    return true;
}

bool AffineMap::operator<(const AffineMap& o) const {
    if (signs != o.signs) return signs < o.signs;
    return shift < o.shift;
}

AffineMap compose(const AffineMap& f, const AffineMap& g) {
    if (f.dim() != g.dim()) throw spec_error("compose: dimension mismatch");
    AffineMap h;
    h.signs.resize(f.dim());
    std::vector<Rational> sh(f.dim());
    for (int i = 0; i < f.dim(); ++i) {
        h.signs[i] = f.signs[i] * g.signs[i];
        sh[i] = Rational(f.signs[i]) * g.shift.coords[i] + f.shift.coords[i];
    }
    h.shift = TorusPoint(std::move(sh));
    return h;
}

AffineMap inverse(const AffineMap& f) {
    // x = s y + b  =>  y = s x - s b.
    AffineMap h;
    h.signs = f.signs;
    std::vector<Rational> sh(f.dim());
    for (int i = 0; i < f.dim(); ++i) sh[i] = Rational(-f.signs[i]) * f.shift.coords[i];
    h.shift = TorusPoint(std::move(sh));
    return h;
}

bool is_involution(const AffineMap& f) { return !f.is_identity() && compose(f, f).is_identity(); }

std::vector<int> Slab::free_coords() const {
    std::vector<int> out;
    for (int i = 0; i < dim; ++i)
        if (!fixed.count(i)) out.push_back(i);
    return out;
}

bool Slab::operator<(const Slab& o) const {
    if (dim != o.dim) return dim < o.dim;
    auto a = fixed.begin();
    auto b = o.fixed.begin();
    for (; a != fixed.end() && b != o.fixed.end(); ++a, ++b) {
        if (a->first != b->first) return a->first < b->first;
        if (a->second != b->second) return a->second < b->second;
    }
    return fixed.size() < o.fixed.size();
}

TorusPoint Slab::sample_point(const Rational& filler) const {
    std::vector<Rational> c(dim, filler);
    for (const auto& [i, v] : fixed) c[i] = v;
    return TorusPoint(std::move(c));
}

bool Slab::contains(const TorusPoint& x) const {
    if (x.dim() != dim) return false;
    for (const auto& [i, v] : fixed)
        if (x.coords[i] != v) return false;
    return true;
}

std::string Slab::str() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [i, v] : fixed) {
        os << (first ? "" : ", ") << "x" << (i + 1) << "=" << rat_str(v);
        first = false;
    }
    os << "}";
    return os.str();
}

FixedLocus fixed_locus(const AffineMap& f) {
    const int n = f.dim();
    std::vector<std::pair<int, std::vector<Rational>>> choices;  // fixed coordinate -> values
    for (int i = 0; i < n; ++i) {
        if (f.signs[i] == 1) {
            if (f.shift.coords[i] != 0) return {};  // no solution in this coordinate
            // free coordinate
        } else {
            Rational half = f.shift.coords[i] / 2;
            std::vector<Rational> vals = {mod1(half), mod1(half + Rational(1, 2))};
            std::sort(vals.begin(), vals.end());
            choices.emplace_back(i, std::move(vals));
        }
    }
    FixedLocus out;
    std::vector<Slab> acc = {Slab{n, {}}};
    for (const auto& [coord, vals] : choices) {
        std::vector<Slab> next;
        next.reserve(acc.size() * vals.size());
        for (const auto& s : acc)
            for (const auto& v : vals) {
                Slab t = s;
                t.fixed[coord] = v;
                next.push_back(std::move(t));
            }
        acc = std::move(next);
    }
    std::sort(acc.begin(), acc.end());
    out.components = std::move(acc);
    return out;
}

Slab map_slab(const AffineMap& f, const Slab& s) {
    if (f.dim() != s.dim) throw spec_error("map_slab: dimension mismatch");
    Slab out;
    out.dim = s.dim;
    for (const auto& [i, v] : s.fixed)
        out.fixed[i] = mod1(Rational(f.signs[i]) * v + f.shift.coords[i]);
    return out;
}

int FiniteGroup::index_of(const AffineMap& g) const {
    for (size_t i = 0; i < elements.size(); ++i)
        if (elements[i] == g) return static_cast<int>(i);
    return -1;
}

int FiniteGroup::inv(int i) const {
    for (size_t j = 0; j < elements.size(); ++j)
        if (table[i][j] == 0) return static_cast<int>(j);
    throw spec_error("FiniteGroup::inv: no inverse found (corrupt table)");
}

bool FiniteGroup::is_abelian() const {
    for (size_t i = 0; i < elements.size(); ++i)
        for (size_t j = i + 1; j < elements.size(); ++j)
            if (table[i][j] != table[j][i]) return false;
    return true;
}

std::optional<int> FiniteGroup::elementary_abelian_rank() const {
    if (!is_abelian()) return std::nullopt;
    for (size_t i = 1; i < elements.size(); ++i)
        if (table[i][i] != 0) return std::nullopt;
    size_t n = elements.size();
    int k = 0;
    while ((size_t{1} << k) < n) ++k;
    if ((size_t{1} << k) != n) return std::nullopt;
    return k;
}

std::vector<int> FiniteGroup::subgroup(const std::vector<int>& gens) const {
    std::set<int> seen = {0};
    std::vector<int> frontier = {0};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int e : frontier)
            for (int g : gens) {
                int p = table[g][e];
                if (seen.insert(p).second) next.push_back(p);
            }
        frontier = std::move(next);
    }
    return {seen.begin(), seen.end()};
}

FiniteGroup group_closure(const std::vector<AffineMap>& generators, int element_bound) {
    if (generators.empty()) throw spec_error("group_closure: no generators");
    const int n = generators.front().dim();
    for (const auto& g : generators)
        if (g.dim() != n) throw spec_error("group_closure: generator dimension mismatch");

    FiniteGroup grp;
    std::map<AffineMap, int> index;
    auto add = [&](const AffineMap& g, std::vector<int> word) {
        auto it = index.find(g);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(grp.elements.size());
        if (id >= element_bound)
            throw spec_error("group_closure: element bound " + std::to_string(element_bound) +
                             " exceeded (non-finite or malformed generators?)");
        index.emplace(g, id);
        grp.elements.push_back(g);
        grp.words.push_back(std::move(word));
        return id;
    };

    add(AffineMap::identity(n), {});
    for (size_t gi = 0; gi < generators.size(); ++gi) {
        int id = add(generators[gi], {static_cast<int>(gi)});
        grp.generator_indices.push_back(id);
    }
    // Breadth-first products with generators until closed.
    for (size_t i = 0; i < grp.elements.size(); ++i) {
        for (size_t gi = 0; gi < generators.size(); ++gi) {
            AffineMap p = compose(generators[gi], grp.elements[i]);
            std::vector<int> w = grp.words[i];
            w.insert(w.begin(), static_cast<int>(gi));
            add(p, std::move(w));
        }
    }
    const int m = grp.order();
    grp.table.assign(m, std::vector<int>(m, -1));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            int k = grp.index_of(compose(grp.elements[i], grp.elements[j]));
            if (k < 0) throw spec_error("group_closure: set not closed under composition");
            grp.table[i][j] = k;
        }
    return grp;
}

std::vector<std::vector<int>> component_orbits(const FiniteGroup& group,
                                               const std::vector<Slab>& components,
                                               const std::vector<int>& element_indices) {
    std::vector<int> elts = element_indices;
    if (elts.empty())
        for (int i = 0; i < group.order(); ++i) elts.push_back(i);

    auto find = [&](const Slab& s) {
        for (size_t i = 0; i < components.size(); ++i)
            if (components[i] == s) return static_cast<int>(i);
        return -1;
    };
    // perm[e][c] = index of the image of component c under element e
    std::vector<std::vector<int>> perm(elts.size(), std::vector<int>(components.size(), -1));
    for (size_t e = 0; e < elts.size(); ++e)
        for (size_t c = 0; c < components.size(); ++c) {
            Slab img = map_slab(group.elements[elts[e]], components[c]);
            int k = find(img);
            if (k < 0)
                throw spec_error("component_orbits: component " + components[c].str() +
                                 " leaves the list under element #" + std::to_string(elts[e]));
            perm[e][c] = k;
        }
    std::vector<int> orbit_of(components.size(), -1);
    std::vector<std::vector<int>> orbits;
    for (size_t c = 0; c < components.size(); ++c) {
        if (orbit_of[c] >= 0) continue;
        std::vector<int> orbit = {static_cast<int>(c)};
        orbit_of[c] = static_cast<int>(orbits.size());
        for (size_t q = 0; q < orbit.size(); ++q)
            for (size_t e = 0; e < elts.size(); ++e) {
                int img = perm[e][orbit[q]];
                if (orbit_of[img] < 0) {
                    orbit_of[img] = orbit_of[c];
                    orbit.push_back(img);
                }
            }
        std::sort(orbit.begin(), orbit.end());
        orbits.push_back(std::move(orbit));
    }
    return orbits;
}

std::optional<Slab> intersect_slabs(const Slab& a, const Slab& b) {
    if (a.dim != b.dim) throw spec_error("intersect_slabs: dimension mismatch");
    Slab out;
    out.dim = a.dim;
    out.fixed = a.fixed;
    for (const auto& [i, v] : b.fixed) {
        auto it = out.fixed.find(i);
        if (it != out.fixed.end() && it->second != v) return std::nullopt;
        out.fixed[i] = v;
    }
    return out;
}

Rational toroidal_distance_sq(const TorusPoint& a, const TorusPoint& b,
                              const std::vector<int>& coords) {
    if (a.dim() != b.dim()) throw spec_error("toroidal_distance_sq: dimension mismatch");
    Rational sum(0);
    for (int i : coords) {
        if (i < 0 || i >= a.dim()) throw spec_error("toroidal_distance_sq: coordinate out of range");
        Rational d = circle_dist(a.coords[i], b.coords[i]);
        sum += d * d;
    }
    return sum;
}

}  // namespace fstruct

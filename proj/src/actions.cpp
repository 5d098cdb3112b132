#include "fstruct/actions.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace fstruct {

std::vector<int> TranslationFlow::support() const {
    std::vector<int> out;
    for (int i = 0; i < dim; ++i)
        for (const auto& col : columns)
            if (col[i] != 0) {
                out.push_back(i);
                break;
            }
    return out;
}

bool equivariance_check(const TranslationFlow& flow, const AffineMap& gamma,
                        const std::vector<int>& psi_gamma) {
    if (gamma.dim() != flow.dim) throw spec_error("equivariance_check: dimension mismatch");
    if (static_cast<int>(psi_gamma.size()) != flow.rank_k())
        throw spec_error("equivariance_check: psi rank mismatch");
    for (int j = 0; j < flow.rank_k(); ++j)
        for (int i = 0; i < flow.dim; ++i)
            if (gamma.signs[i] * flow.columns[j][i] != flow.columns[j][i] * psi_gamma[j])
                return false;
    return true;
}

namespace {

bool pair_in_support(const std::pair<int, int>& p, const std::vector<int>& support) {
    return std::binary_search(support.begin(), support.end(), p.first) ||
           std::binary_search(support.begin(), support.end(), p.second);
}

std::set<int> circle_support(const ChartCircle& c) {
    return {c.pairs[0].first, c.pairs[0].second, c.pairs[1].first, c.pairs[1].second};
}

bool circle_vs_rotation(const ChartCircle& c, const PairRotation& r) {
    for (int k = 0; k < 2; ++k) {
        if (c.pairs[k] != r.pair) continue;
        // Matching complex pair: orientation and center must agree.
        if (c.orients[k] != r.orient) return false;
        return c.center[2 * k] == r.center[0] && c.center[2 * k + 1] == r.center[1];
    }
    std::set<int> sup = circle_support(c);
    return !sup.count(r.pair.first) && !sup.count(r.pair.second);
}

}  // namespace

bool commute_check(const ActionPrimitive& a, const ActionPrimitive& b) {
    // (i) translations always commute
    if (std::holds_alternative<TranslationFlow>(a) && std::holds_alternative<TranslationFlow>(b))
        return true;
    // (ii) translation vs rotation: flow must not move the rotation plane
    if (std::holds_alternative<TranslationFlow>(a) && std::holds_alternative<PairRotation>(b)) {
        const auto& f = std::get<TranslationFlow>(a);
        const auto& r = std::get<PairRotation>(b);
        return !pair_in_support(r.pair, f.support());
    }
    if (std::holds_alternative<PairRotation>(a) && std::holds_alternative<TranslationFlow>(b))
        return commute_check(b, a);
    // (iii) rotation vs rotation: disjoint planes, or same plane about the same center
    if (std::holds_alternative<PairRotation>(a) && std::holds_alternative<PairRotation>(b)) {
        const auto& r1 = std::get<PairRotation>(a);
        const auto& r2 = std::get<PairRotation>(b);
        if (r1.pair == r2.pair) return r1.center == r2.center;
        std::set<int> s1 = {r1.pair.first, r1.pair.second};
        return !s1.count(r2.pair.first) && !s1.count(r2.pair.second);
    }
    // (iv) declared chart circle vs rotation: the rotation plane must be one of
    // the chart's complex pairs with matching orientation, or disjoint from it
    if (std::holds_alternative<ChartCircle>(a) && std::holds_alternative<PairRotation>(b))
        return circle_vs_rotation(std::get<ChartCircle>(a), std::get<PairRotation>(b));
    if (std::holds_alternative<PairRotation>(a) && std::holds_alternative<ChartCircle>(b))
        return commute_check(b, a);
    // translation vs chart circle: flow must avoid all four paired coordinates
    if (std::holds_alternative<TranslationFlow>(a) && std::holds_alternative<ChartCircle>(b)) {
        const auto& f = std::get<TranslationFlow>(a);
        auto sup = circle_support(std::get<ChartCircle>(b));
        for (int i : f.support())
            if (sup.count(i)) return false;
        return true;
    }
    if (std::holds_alternative<ChartCircle>(a) && std::holds_alternative<TranslationFlow>(b))
        return commute_check(b, a);
    // chart circle vs chart circle: disjoint supports, or identical data
    if (std::holds_alternative<ChartCircle>(a) && std::holds_alternative<ChartCircle>(b)) {
        const auto& c1 = std::get<ChartCircle>(a);
        const auto& c2 = std::get<ChartCircle>(b);
        auto s1 = circle_support(c1), s2 = circle_support(c2);
        bool disjoint = true;
        for (int i : s1)
            if (s2.count(i)) disjoint = false;
        if (disjoint) return true;
        return c1.pairs == c2.pairs && c1.orients == c2.orients && c1.weights == c2.weights &&
               c1.center == c2.center;
    }
    return false;
}

int rational_matrix_rank(std::vector<std::vector<Rational>> rows) {
    int rank = 0;
    size_t ncols = rows.empty() ? 0 : rows[0].size();
    size_t pr = 0;
    for (size_t col = 0; col < ncols && pr < rows.size(); ++col) {
        size_t pivot = pr;
        while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pr], rows[pivot]);
        for (size_t r = pr + 1; r < rows.size(); ++r) {
            if (rows[r][col] == 0) continue;
            Rational factor = rows[r][col] / rows[pr][col];
            for (size_t c = col; c < ncols; ++c) rows[r][c] -= factor * rows[pr][c];
        }
        ++pr;
        ++rank;
    }
    return rank;
}

int orbit_dim_at(const std::vector<ActionPrimitive>& primitives, const TorusPoint& x) {
    std::vector<std::vector<Rational>> cols;
    const int n = x.dim();
    for (const auto& p : primitives) {
        if (const auto* f = std::get_if<TranslationFlow>(&p)) {
            if (f->dim != n) throw spec_error("orbit_dim_at: dimension mismatch");
            for (const auto& col : f->columns) {
                std::vector<Rational> v(n, Rational(0));
                for (int i = 0; i < n; ++i) v[i] = Rational(col[i]);
                cols.push_back(std::move(v));
            }
        } else if (const auto* r = std::get_if<PairRotation>(&p)) {
            std::vector<Rational> v(n, Rational(0));
            Rational di = centered_mod1(x.coords[r->pair.first] - r->center[0]);
            Rational dj = centered_mod1(x.coords[r->pair.second] - r->center[1]);
            v[r->pair.first] = Rational(-r->orient) * dj;
            v[r->pair.second] = Rational(r->orient) * di;
            cols.push_back(std::move(v));
        } else {
            throw spec_error("orbit_dim_at: declared chart actions have no evaluable generator");
        }
    }
    // Rank of the column span; transpose so rows are the generators.
    return rational_matrix_rank(std::move(cols));
}

bool finite_kernel_check(const TranslationFlow& flow) {
    std::vector<std::vector<Rational>> rows;
    for (const auto& col : flow.columns) {
        std::vector<Rational> v(flow.dim);
        for (int i = 0; i < flow.dim; ++i) v[i] = Rational(col[i]);
        rows.push_back(std::move(v));
    }
    return rational_matrix_rank(std::move(rows)) == flow.rank_k();
}

}  // namespace fstruct

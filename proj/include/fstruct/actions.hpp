// Torus-action primitives on covering charts: translation flows, coordinate-pair
// rotations, declared resolution-chart circle actions, and the symbolic
// equivariance / commutation / orbit-dimension checks.
#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "fstruct/regions.hpp"
#include "fstruct/torus.hpp"

namespace fstruct {

// phi(t)(x) = x + M t for t in T^k; columns are the integer weight vectors.
struct TranslationFlow {
    int dim = 0;
    std::vector<std::vector<long>> columns;  // k columns of length dim

    int rank_k() const { return static_cast<int>(columns.size()); }
    std::vector<int> support() const;  // coordinates with a nonzero weight
};

// Rotation of the (i, j) coordinate plane about a rational center; defined on a
// tube about the center. orient +1 is the standard orientation.
struct PairRotation {
    int dim = 0;
    std::pair<int, int> pair;            // ascending
    std::vector<Rational> center;        // size 2, in pair coordinates
    int orient = 1;
};

// Declared circle action on a resolution chart: diag(e^{i w1 t}, e^{i w2 t}) in
// two complex coordinate pairs. Interior behaviour is quoted, not derived; only
// the pairing data and boundary compatibility are checked.
struct ChartCircle {
    int dim = 0;
    std::array<std::pair<int, int>, 2> pairs;  // each ascending, disjoint
    std::array<int, 2> weights = {1, 1};
    std::array<int, 2> orients = {1, 1};
    std::vector<Rational> center;  // size 4: center values in pairs[0], pairs[1] order
};

using ActionPrimitive = std::variant<TranslationFlow, PairRotation, ChartCircle>;

// Exact reduction of the deck-compatibility identity for translation flows and
// sign-diagonal deck maps: diag(signs) * M == M * diag(psi).
bool equivariance_check(const TranslationFlow& flow, const AffineMap& gamma,
                        const std::vector<int>& psi_gamma);

// Symbolic commutation rules; conservative (anything unrecognized is false).
bool commute_check(const ActionPrimitive& a, const ActionPrimitive& b);

// Rank over Q of the stacked infinitesimal generators at x.
int orbit_dim_at(const std::vector<ActionPrimitive>& primitives, const TorusPoint& x);

// True iff the flow has finite kernel, i.e. rank(M) = k over the rationals.
bool finite_kernel_check(const TranslationFlow& flow);

int rational_matrix_rank(std::vector<std::vector<Rational>> rows);

}  // namespace fstruct

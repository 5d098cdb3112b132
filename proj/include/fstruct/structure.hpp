// Declarative structure specifications (charts, coverings, actions, claims)
// and the verification engine running passes P1-P7.
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fstruct/actions.hpp"
#include "fstruct/regions.hpp"
#include "fstruct/torus.hpp"

namespace fstruct {

enum class CoveringKind { Trivial, Quotient };

// Translation flow lifted to a chart, with one sign per region component
// (the "either as +/- the circle action" device).
struct LiftedFlow {
    TranslationFlow flow;
    std::vector<int> comp_signs;  // size = chart components; empty means all +1
};

// Rotation of a coordinate pair, one center and orientation per component.
struct LiftedRotation {
    std::pair<int, int> pair;
    std::vector<std::vector<Rational>> centers;  // per component, size 2
    std::vector<int> orients;                    // per component
};

// Declared resolution-chart circle (Hopf-type): two complex pairs with integer
// weights; orientation tags per component. Interior behaviour is declared.
struct LiftedCircle {
    std::array<std::pair<int, int>, 2> pairs;
    std::array<int, 2> weights = {1, 1};
    std::vector<std::array<int, 2>> orients;  // per component
};

using ChartActionSpec = std::variant<LiftedFlow, LiftedRotation, LiftedCircle>;

struct Chart {
    std::string id;
    Region region;
    CoveringKind covering = CoveringKind::Trivial;
    std::vector<std::string> deck_gens;  // Quotient only
    int rank = 1;
    std::vector<ChartActionSpec> actions;
    std::map<std::string, std::vector<int>> psi;  // generator -> diag entries, Quotient only

    // Components: one per center of a single Inside-constraint region, else 1.
    int components() const;
    std::vector<std::vector<Rational>> component_centers() const;  // empty for 1-component
    Region component_subregion(int comp) const;
    bool has_evaluable_action() const;  // some action other than a declared circle
};

struct ResolutionChart {
    std::string id;
    std::string chart_id;
    std::string locus;  // element expression, e.g. "alpha" or "alpha*beta"
    int orbit_index = 0;
    std::string model;
    std::string boundary_chart;
    int boundary_action = 0;
};

struct ClaimGroupOrder { long order = 0; };
struct ClaimGroupType { int rank = 0; };  // (Z_2)^rank
struct ClaimGeneratorsCommute {};
struct ClaimFixed { std::string elem; long count = 0; int dim = 0; };
struct ClaimFixedEmpty { std::string elem; };
struct ClaimFixedEmptyOthers {};
struct ClaimFixedEqualsIntersection { std::string elem, a, b; };
struct ClaimOrbits { std::string elem; std::vector<std::string> under; long count = 0; long size = 0; };
struct ClaimSingularOrbits { long count = 0; long size = 0; };
struct ClaimIntersection { std::string a, b; long points = 0; long orbits = 0; long size = 0;
                           std::vector<std::string> under; };
struct ClaimSlabDisjoint { std::string a, b; };
struct ClaimChartComponents { std::string chart; long count = 0; };
struct ClaimQuotientComponents { std::string chart; long count = 0; };
struct ClaimChartsDisjoint { std::vector<std::string> charts; };
struct ClaimCover { std::vector<std::string> charts; };
struct ClaimPolarized { bool value = false; };
struct ClaimNote { std::string text; };

using Claim = std::variant<ClaimGroupOrder, ClaimGroupType, ClaimGeneratorsCommute, ClaimFixed,
                           ClaimFixedEmpty, ClaimFixedEmptyOthers, ClaimFixedEqualsIntersection,
                           ClaimOrbits, ClaimSingularOrbits, ClaimIntersection, ClaimSlabDisjoint,
                           ClaimChartComponents, ClaimQuotientComponents, ClaimChartsDisjoint,
                           ClaimCover, ClaimPolarized, ClaimNote>;

struct StructureSpec {
    std::string name;
    int dim = 0;
    std::vector<std::pair<std::string, AffineMap>> generators;
    std::vector<Chart> charts;
    std::vector<ResolutionChart> resolutions;
    std::vector<Claim> claims;

    const AffineMap* find_generator(const std::string& name) const;
    const Chart* find_chart(const std::string& id) const;
    // Composes a '*'-separated product of generator names; throws on unknown names.
    AffineMap element(const std::string& expr) const;
};

struct RunConfig {
    Rational epsilon = Rational(1, 16);
    Rational min_cell = Rational(1, 256);
    int samples_per_stratum = 32;
    unsigned long seed = 7;
    int group_bound = 4096;
};

struct PassResult {
    std::string id;    // "P1".."P7"
    std::string name;
    enum class Status { Pass, Fail, Skip } status = Status::Pass;
    std::vector<std::string> notes;
    std::vector<std::string> failures;
};

struct ClaimResult {
    std::string pass;  // owning pass id
    std::string text;
    std::string expected;
    std::string computed;
    bool ok = true;
};

struct VerificationReport {
    std::string spec_name;
    std::vector<PassResult> passes;
    std::vector<ClaimResult> claims;
    std::string polarization;  // "polarized" | "not polarized" | "skipped"
    std::optional<std::string> polarization_witness;
    std::vector<std::string> flags;  // surfaced notes (paper discrepancies etc.)
    bool ok = false;
    std::string first_failure;  // pass id, empty when ok

    std::string to_text() const;
    std::string to_json() const;
};

// Runs P1-P7 and evaluates every claim; deterministic for fixed spec + config.
VerificationReport verify(const StructureSpec& spec, const RunConfig& config);

struct PolarizationResult {
    bool polarized = true;
    std::optional<TorusPoint> witness;
    std::string witness_desc;
    std::vector<std::string> notes;
};

PolarizationResult check_polarized(const StructureSpec& spec, const FiniteGroup& group,
                                   const RunConfig& config);

// Recomputes the P1/P2-derivable claim block from the structure itself.
std::vector<Claim> derive_claims(const StructureSpec& spec, const RunConfig& config);

std::string claim_to_line(const Claim& c);  // claims-file syntax, no trailing newline

}  // namespace fstruct

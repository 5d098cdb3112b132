// Structure spec files: a line-oriented text format with a normalized
// serialization. Parsing keeps the syntax-level document so that
// serialize(parse(text)) is byte-stable on normalized input.
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "fstruct/structure.hpp"

namespace fstruct {

class parse_error : public spec_error {
public:
    parse_error(int line, const std::string& msg)
        : spec_error("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

// Radius token: a literal rational or an epsilon multiple ("eps", "eps/2", "eps*p/q").
struct RadiusExpr {
    bool uses_eps = false;
    Rational factor = Rational(1);
    Rational resolve(const Rational& eps) const { return uses_eps ? eps * factor : factor; }
    std::string str() const;
};

struct CentersSpec {
    bool product = false;
    // product: one sorted value list per coordinate; list: explicit center tuples.
    std::vector<std::vector<Rational>> values;
    std::vector<std::vector<Rational>> expand() const;
};

struct ConstraintDecl {
    Sense sense = Sense::Inside;
    std::vector<int> coords;  // 0-based internally, 1-based in the file
    RadiusExpr radius;
    CentersSpec centers;
};

struct FlowDecl {
    std::vector<std::vector<long>> columns;
    std::vector<int> signs;  // per region component; empty = all +1
};

struct RotationDecl {
    std::pair<int, int> pair;
    struct Comp {
        std::vector<Rational> region_center;
        std::vector<Rational> center;
        int orient = 1;
    };
    std::vector<Comp> comps;
};

struct HopfDecl {
    std::array<std::pair<int, int>, 2> pairs;
    std::array<int, 2> weights = {1, 1};
    struct Comp {
        std::vector<Rational> region_center;
        std::array<int, 2> orients = {1, 1};
    };
    std::vector<Comp> comps;
};

using ActionDecl = std::variant<FlowDecl, RotationDecl, HopfDecl>;

struct ChartDecl {
    std::string id;
    CoveringKind covering = CoveringKind::Trivial;
    std::vector<std::string> deck;
    int rank = 1;
    std::vector<ConstraintDecl> region;
    std::vector<ActionDecl> actions;
    std::vector<std::pair<std::string, std::vector<int>>> psi;
};

struct ResolutionDecl {
    std::string id;
    std::string chart;
    std::string locus;
    int orbit = 0;
    std::string model;
    std::string boundary_chart;
    int boundary_action = 0;
};

struct GeneratorDecl {
    std::string name;
    std::vector<int> signs;
    std::vector<Rational> shift;
};

struct SpecDoc {
    std::vector<std::string> header;  // leading '#' comment lines, kept verbatim
    std::string name;
    int dim = 0;
    std::vector<GeneratorDecl> generators;
    std::vector<ChartDecl> charts;
    std::vector<ResolutionDecl> resolutions;
    std::vector<Claim> claims;
};

SpecDoc parse_spec(const std::string& text);
SpecDoc parse_spec_file(const std::string& path);
std::string serialize_spec(const SpecDoc& doc);

// Semantic resolution against a run configuration (epsilon instantiation,
// reference and well-formedness checks). Throws spec_error on any problem.
StructureSpec resolve_spec(const SpecDoc& doc, const RunConfig& config);

struct BundledSpec {
    std::string name;
    std::string file;
    std::string description;
};
const std::vector<BundledSpec>& bundled_specs();

}  // namespace fstruct

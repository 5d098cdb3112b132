#include "fstruct/specfile.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace fstruct {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::string rtrim(const std::string& s) {
    size_t e = s.find_last_not_of(" \t\r\n");
    return e == std::string::npos ? "" : s.substr(0, e + 1);
}

struct Lines {
    std::vector<std::string> raw;
    size_t pos = 0;

    bool done() const { return pos >= raw.size(); }
    int lineno() const { return static_cast<int>(pos); }  // 0-based; +1 for messages
    const std::string& peek() const { return raw[pos]; }
    std::string next() { return raw[pos++]; }
};

[[noreturn]] void fail_at(const Lines& L, const std::string& msg) {
    throw parse_error(L.lineno() + (L.done() ? 0 : 1), msg);
}

Rational need_rat(const Lines& L, const std::string& tok) {
    auto q = rat_parse(tok);
    if (!q) fail_at(L, "bad rational '" + tok + "'");
    return *q;
}

long need_int(const Lines& L, const std::string& tok) {
    try {
        size_t used = 0;
        long v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail_at(L, "bad integer '" + tok + "'");
    }
}

int need_sign(const Lines& L, const std::string& tok) {
    if (tok == "+" || tok == "+1") return 1;
    if (tok == "-" || tok == "-1") return -1;
    fail_at(L, "bad sign '" + tok + "'");
}

std::vector<Rational> need_tuple(const Lines& L, const std::string& tok) {
    if (tok.size() < 2 || tok.front() != '(' || tok.back() != ')')
        fail_at(L, "bad tuple '" + tok + "'");
    std::vector<Rational> out;
    std::string body = tok.substr(1, tok.size() - 2);
    size_t pos = 0;
    while (pos <= body.size()) {
        size_t comma = body.find(',', pos);
        std::string piece = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
        out.push_back(need_rat(L, piece));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::pair<int, int> need_pair(const Lines& L, const std::string& tok) {
    auto t = need_tuple(L, tok);
    if (t.size() != 2 || t[0].get_den() != 1 || t[1].get_den() != 1)
        fail_at(L, "bad coordinate pair '" + tok + "'");
    int a = static_cast<int>(t[0].get_num().get_si()) - 1;
    int b = static_cast<int>(t[1].get_num().get_si()) - 1;
    if (a < 0 || b < 0 || a >= b) fail_at(L, "coordinate pair must be ascending and 1-based");
    return {a, b};
}

RadiusExpr need_radius(const Lines& L, const std::string& tok) {
    RadiusExpr r;
    if (tok == "eps") {
        r.uses_eps = true;
        return r;
    }
    if (tok.rfind("eps/", 0) == 0) {
        r.uses_eps = true;
        Rational d = need_rat(L, tok.substr(4));
        if (d <= 0) fail_at(L, "bad radius divisor in '" + tok + "'");
        r.factor = Rational(1) / d;
        return r;
    }
    if (tok.rfind("eps*", 0) == 0) {
        r.uses_eps = true;
        r.factor = need_rat(L, tok.substr(4));
        return r;
    }
    r.factor = need_rat(L, tok);
    return r;
}

std::string quoted_tail(const Lines& L, const std::string& line, const std::string& after) {
    size_t k = line.find(after);
    size_t q1 = line.find('"', k);
    size_t q2 = line.rfind('"');
    if (q1 == std::string::npos || q2 <= q1) fail_at(L, "expected a quoted string");
    return line.substr(q1 + 1, q2 - q1 - 1);
}

ConstraintDecl parse_constraint(Lines& L, const std::vector<std::string>& t,
                                const std::string& line) {
    (void)line;
    ConstraintDecl c;
    c.sense = t[0] == "inside" ? Sense::Inside : Sense::Outside;
    size_t i = 1;
    if (i >= t.size() || t[i] != "coords") fail_at(L, "expected 'coords'");
    ++i;
    while (i < t.size() && t[i] != "radius") {
        long v = need_int(L, t[i]);
        if (v < 1) fail_at(L, "coordinates are 1-based");
        c.coords.push_back(static_cast<int>(v) - 1);
        ++i;
    }
    if (!std::is_sorted(c.coords.begin(), c.coords.end()) ||
        std::adjacent_find(c.coords.begin(), c.coords.end()) != c.coords.end())
        fail_at(L, "constraint coordinates must be ascending");
    if (i + 1 >= t.size() || t[i] != "radius") fail_at(L, "expected 'radius'");
    c.radius = need_radius(L, t[i + 1]);
    i += 2;
    if (i >= t.size() || t[i] != "centers") fail_at(L, "expected 'centers'");
    ++i;
    if (i >= t.size()) fail_at(L, "expected 'product' or 'list'");
    if (t[i] == "product") {
        c.centers.product = true;
        ++i;
        for (; i < t.size(); ++i) {
            const std::string& tok = t[i];
            if (tok.size() < 2 || tok.front() != '{' || tok.back() != '}')
                fail_at(L, "bad value set '" + tok + "'");
            std::vector<Rational> vals;
            std::string body = tok.substr(1, tok.size() - 2);
            size_t pos = 0;
            while (pos <= body.size()) {
                size_t comma = body.find(',', pos);
                vals.push_back(
                    need_rat(L, body.substr(pos, comma == std::string::npos ? comma : comma - pos)));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            c.centers.values.push_back(std::move(vals));
        }
        if (c.centers.values.size() != c.coords.size())
            fail_at(L, "product centers need one value set per coordinate");
    } else if (t[i] == "list") {
        ++i;
        for (; i < t.size(); ++i) {
            auto tup = need_tuple(L, t[i]);
            if (tup.size() != c.coords.size()) fail_at(L, "center arity mismatch");
            c.centers.values.push_back(std::move(tup));
        }
        if (c.centers.values.empty()) fail_at(L, "empty center list");
    } else {
        fail_at(L, "expected 'product' or 'list'");
    }
    return c;
}

Claim parse_claim(Lines& L, const std::vector<std::string>& t, const std::string& line) {
    if (t.size() < 2) fail_at(L, "empty claim");
    const std::string& kind = t[1];
    auto elems_from = [&](size_t i) {
        std::vector<std::string> out(t.begin() + i, t.end());
        return out;
    };
    if (kind == "group-order") return ClaimGroupOrder{need_int(L, t.at(2))};
    if (kind == "group-type") {
        if (t.at(2).rfind("Z2^", 0) != 0) fail_at(L, "group-type must be Z2^k");
        return ClaimGroupType{static_cast<int>(need_int(L, t[2].substr(3)))};
    }
    if (kind == "generators-commute") return ClaimGeneratorsCommute{};
    if (kind == "fixed")
        return ClaimFixed{t.at(2), need_int(L, t.at(4)),
                          static_cast<int>(need_int(L, t.at(6)))};
    if (kind == "fixed-empty") return ClaimFixedEmpty{t.at(2)};
    if (kind == "fixed-empty-others") return ClaimFixedEmptyOthers{};
    if (kind == "fixed-equals-intersection")
        return ClaimFixedEqualsIntersection{t.at(2), t.at(3), t.at(4)};
    if (kind == "orbits") {
        ClaimOrbits c;
        c.elem = t.at(2);
        if (t.at(3) != "under") fail_at(L, "expected 'under'");
        size_t i = 4;
        while (i < t.size() && t[i] != "count") {
            if (t[i] != "all") c.under.push_back(t[i]);
            ++i;
        }
        c.count = need_int(L, t.at(i + 1));
        c.size = need_int(L, t.at(i + 3));
        return c;
    }
    if (kind == "singular-orbits")
        return ClaimSingularOrbits{need_int(L, t.at(3)), need_int(L, t.at(5))};
    if (kind == "intersection") {
        ClaimIntersection c;
        c.a = t.at(2);
        c.b = t.at(3);
        c.points = need_int(L, t.at(5));
        c.orbits = need_int(L, t.at(7));
        c.size = need_int(L, t.at(9));
        if (t.at(10) != "under") fail_at(L, "expected 'under'");
        for (size_t i = 11; i < t.size(); ++i)
            if (t[i] != "all") c.under.push_back(t[i]);
        return c;
    }
    if (kind == "slab-disjoint") return ClaimSlabDisjoint{t.at(2), t.at(3)};
    if (kind == "chart-components") return ClaimChartComponents{t.at(2), need_int(L, t.at(3))};
    if (kind == "quotient-components")
        return ClaimQuotientComponents{t.at(2), need_int(L, t.at(3))};
    if (kind == "charts-disjoint") return ClaimChartsDisjoint{elems_from(2)};
    if (kind == "cover") return ClaimCover{elems_from(2)};
    if (kind == "polarized") {
        if (t.at(2) != "true" && t.at(2) != "false") fail_at(L, "polarized must be true|false");
        return ClaimPolarized{t[2] == "true"};
    }
    if (kind == "note") return ClaimNote{quoted_tail(L, line, "note")};
    fail_at(L, "unknown claim kind '" + kind + "'");
}

ActionDecl parse_action(Lines& L, const std::vector<std::string>& t) {
    if (t.at(1) == "flow") {
        FlowDecl f;
        while (!L.done()) {
            std::string line = rtrim(L.next());
            auto u = split_ws(line);
            if (u.empty()) continue;
            if (u[0] == "end") return f;
            if (u[0] == "column") {
                std::vector<long> col;
                for (size_t i = 1; i < u.size(); ++i) col.push_back(need_int(L, u[i]));
                f.columns.push_back(std::move(col));
            } else if (u[0] == "signs") {
                for (size_t i = 1; i < u.size(); ++i) f.signs.push_back(need_sign(L, u[i]));
            } else {
                fail_at(L, "unknown flow line '" + u[0] + "'");
            }
        }
        fail_at(L, "unterminated flow action");
    }
    if (t.at(1) == "rotation") {
        if (t.size() < 5 || t[2] != "pair") fail_at(L, "expected 'pair i j'");
        RotationDecl r;
        long a = need_int(L, t[3]), b = need_int(L, t[4]);
        if (a < 1 || b < 1 || a >= b) fail_at(L, "rotation pair must be ascending and 1-based");
        r.pair = {static_cast<int>(a) - 1, static_cast<int>(b) - 1};
        while (!L.done()) {
            std::string line = rtrim(L.next());
            auto u = split_ws(line);
            if (u.empty()) continue;
            if (u[0] == "end") return r;
            if (u[0] != "component" || u.size() != 6 || u[2] != "center" || u[4] != "orient")
                fail_at(L, "expected 'component (..) center (..) orient +/-'");
            RotationDecl::Comp c;
            c.region_center = need_tuple(L, u[1]);
            c.center = need_tuple(L, u[3]);
            if (c.center.size() != 2) fail_at(L, "rotation center must have two coordinates");
            c.orient = need_sign(L, u[5]);
            r.comps.push_back(std::move(c));
        }
        fail_at(L, "unterminated rotation action");
    }
    if (t.at(1) == "hopf") {
        if (t.size() != 8 || t[2] != "pairs" || t[5] != "weights")
            fail_at(L, "expected 'hopf pairs (i,j) (k,l) weights w1 w2'");
        HopfDecl h;
        h.pairs[0] = need_pair(L, t[3]);
        h.pairs[1] = need_pair(L, t[4]);
        h.weights[0] = static_cast<int>(need_int(L, t[6]));
        h.weights[1] = static_cast<int>(need_int(L, t[7]));
        while (!L.done()) {
            std::string line = rtrim(L.next());
            auto u = split_ws(line);
            if (u.empty()) continue;
            if (u[0] == "end") return h;
            if (u[0] != "component" || u.size() != 5 || u[2] != "orient")
                fail_at(L, "expected 'component (..) orient +/- +/-'");
            HopfDecl::Comp c;
            c.region_center = need_tuple(L, u[1]);
            c.orients[0] = need_sign(L, u[3]);
            c.orients[1] = need_sign(L, u[4]);
            h.comps.push_back(std::move(c));
        }
        fail_at(L, "unterminated hopf action");
    }
    fail_at(L, "unknown action kind '" + t.at(1) + "'");
}

ChartDecl parse_chart(Lines& L, const std::string& id) {
    ChartDecl ch;
    ch.id = id;
    while (!L.done()) {
        std::string line = rtrim(L.next());
        auto t = split_ws(line);
        if (t.empty() || t[0][0] == '#') continue;
        if (t[0] == "end") return ch;
        if (t[0] == "covering") {
            if (t.at(1) == "trivial") {
                ch.covering = CoveringKind::Trivial;
            } else if (t[1] == "quotient") {
                ch.covering = CoveringKind::Quotient;
                for (size_t i = 2; i < t.size(); ++i) ch.deck.push_back(t[i]);
                if (ch.deck.empty()) fail_at(L, "quotient covering needs deck generators");
            } else {
                fail_at(L, "covering must be trivial|quotient");
            }
        } else if (t[0] == "rank") {
            ch.rank = static_cast<int>(need_int(L, t.at(1)));
            if (ch.rank < 1) fail_at(L, "rank must be positive");
        } else if (t[0] == "region") {
            while (!L.done()) {
                std::string rline = rtrim(L.next());
                auto u = split_ws(rline);
                if (u.empty()) continue;
                if (u[0] == "end") break;
                if (u[0] != "inside" && u[0] != "outside")
                    fail_at(L, "constraint must start with inside|outside");
                ch.region.push_back(parse_constraint(L, u, rline));
            }
        } else if (t[0] == "action") {
            ch.actions.push_back(parse_action(L, t));
        } else if (t[0] == "psi") {
            std::vector<int> diag;
            for (size_t i = 2; i < t.size(); ++i) diag.push_back(need_sign(L, t[i]));
            if (diag.empty()) fail_at(L, "psi needs diagonal entries");
            ch.psi.emplace_back(t.at(1), std::move(diag));
        } else {
            fail_at(L, "unknown chart line '" + t[0] + "'");
        }
    }
    fail_at(L, "unterminated chart block");
}

ResolutionDecl parse_resolution(Lines& L, const std::string& id) {
    ResolutionDecl r;
    r.id = id;
    while (!L.done()) {
        std::string line = rtrim(L.next());
        auto t = split_ws(line);
        if (t.empty() || t[0][0] == '#') continue;
        if (t[0] == "end") return r;
        if (t[0] == "chart") {
            r.chart = t.at(1);
        } else if (t[0] == "locus") {
            r.locus = t.at(1);
            if (t.size() != 4 || t[2] != "orbit") fail_at(L, "expected 'locus <elem> orbit <k>'");
            r.orbit = static_cast<int>(need_int(L, t[3]));
        } else if (t[0] == "model") {
            r.model = quoted_tail(L, line, "model");
        } else if (t[0] == "boundary") {
            if (t.size() != 4 || t[2] != "action")
                fail_at(L, "expected 'boundary <chart> action <k>'");
            r.boundary_chart = t.at(1);
            r.boundary_action = static_cast<int>(need_int(L, t[3]));
        } else {
            fail_at(L, "unknown resolution line '" + t[0] + "'");
        }
    }
    fail_at(L, "unterminated resolution block");
}

}  // namespace

std::vector<std::vector<Rational>> CentersSpec::expand() const {
    if (!product) return values;
    std::vector<std::vector<Rational>> out = {{}};
    for (const auto& vals : values) {
        std::vector<std::vector<Rational>> next;
        for (const auto& acc : out)
            for (const auto& v : vals) {
                auto c = acc;
                c.push_back(v);
                next.push_back(std::move(c));
            }
        out = std::move(next);
    }
    return out;
}

std::string RadiusExpr::str() const {
    if (!uses_eps) return rat_str(factor);
    if (factor == 1) return "eps";
    if (factor.get_num() == 1) return "eps/" + factor.get_den().get_str();
    return "eps*" + rat_str(factor);
}

SpecDoc parse_spec(const std::string& text) {
    Lines L;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            L.raw.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) L.raw.push_back(cur);

    SpecDoc doc;
    bool seen_name = false;
    while (!L.done()) {
        std::string line = rtrim(L.next());
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!seen_name) doc.header.push_back(line);
            continue;
        }
        auto t = split_ws(line);
        if (t[0] == "fstructure") {
            doc.name = t.at(1);
            seen_name = true;
        } else if (t[0] == "torus") {
            doc.dim = static_cast<int>(need_int(L, t.at(1)));
            if (doc.dim < 1) fail_at(L, "torus dimension must be positive");
        } else if (t[0] == "generator") {
            GeneratorDecl g;
            g.name = t.at(1);
            size_t i = 2;
            if (t.at(i) != "signs") fail_at(L, "expected 'signs'");
            ++i;
            while (i < t.size() && t[i] != "shift") g.signs.push_back(need_sign(L, t[i++]));
            if (i >= t.size() || t[i] != "shift") fail_at(L, "expected 'shift'");
            ++i;
            while (i < t.size()) g.shift.push_back(need_rat(L, t[i++]));
            doc.generators.push_back(std::move(g));
        } else if (t[0] == "chart") {
            doc.charts.push_back(parse_chart(L, t.at(1)));
        } else if (t[0] == "resolution") {
            doc.resolutions.push_back(parse_resolution(L, t.at(1)));
        } else if (t[0] == "claims") {
            while (!L.done()) {
                std::string cline = rtrim(L.next());
                auto u = split_ws(cline);
                if (u.empty() || u[0][0] == '#') continue;
                if (u[0] == "end") break;
                if (u[0] != "claim") fail_at(L, "claims block lines must start with 'claim'");
                doc.claims.push_back(parse_claim(L, u, cline));
            }
        } else {
            fail_at(L, "unknown top-level line '" + t[0] + "'");
        }
    }
    if (!seen_name) throw parse_error(1, "missing 'fstructure <name>' line");
    if (doc.dim == 0) throw parse_error(1, "missing 'torus <dim>' line");
    return doc;
}

SpecDoc parse_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spec_error("cannot open spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

namespace {

std::string sign_tok(int s) { return s > 0 ? "+" : "-"; }
std::string psi_tok(int s) { return s > 0 ? "+1" : "-1"; }

std::string tuple_str(const std::vector<Rational>& v) {
    std::string out = "(";
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + rat_str(v[i]);
    return out + ")";
}

std::string pair_str(const std::pair<int, int>& p) {
    return "(" + std::to_string(p.first + 1) + "," + std::to_string(p.second + 1) + ")";
}

}  // namespace

std::string serialize_spec(const SpecDoc& doc) {
    std::ostringstream os;
    for (const auto& h : doc.header) os << h << "\n";
    if (!doc.header.empty()) os << "\n";
    os << "fstructure " << doc.name << "\n";
    os << "torus " << doc.dim << "\n";
    os << "\n";
    for (const auto& g : doc.generators) {
        os << "generator " << g.name << " signs";
        for (int s : g.signs) os << " " << sign_tok(s);
        os << " shift";
        for (const auto& q : g.shift) os << " " << rat_str(q);
        os << "\n";
    }
    for (const auto& ch : doc.charts) {
        os << "\nchart " << ch.id << "\n";
        os << "  covering ";
        if (ch.covering == CoveringKind::Trivial) {
            os << "trivial\n";
        } else {
            os << "quotient";
            for (const auto& d : ch.deck) os << " " << d;
            os << "\n";
        }
        os << "  rank " << ch.rank << "\n";
        os << "  region\n";
        for (const auto& c : ch.region) {
            os << "    " << (c.sense == Sense::Inside ? "inside" : "outside") << " coords";
            for (int i : c.coords) os << " " << (i + 1);
            os << " radius " << c.radius.str() << " centers";
            if (c.centers.product) {
                os << " product";
                for (const auto& vals : c.centers.values) {
                    os << " {";
                    for (size_t i = 0; i < vals.size(); ++i)
                        os << (i ? "," : "") << rat_str(vals[i]);
                    os << "}";
                }
            } else {
                os << " list";
                for (const auto& c2 : c.centers.values) os << " " << tuple_str(c2);
            }
            os << "\n";
        }
        os << "  end\n";
        for (const auto& act : ch.actions) {
            if (const auto* f = std::get_if<FlowDecl>(&act)) {
                os << "  action flow\n";
                for (const auto& col : f->columns) {
                    os << "    column";
                    for (long v : col) os << " " << v;
                    os << "\n";
                }
                if (!f->signs.empty()) {
                    os << "    signs";
                    for (int s : f->signs) os << " " << sign_tok(s);
                    os << "\n";
                }
                os << "  end\n";
            } else if (const auto* r = std::get_if<RotationDecl>(&act)) {
                os << "  action rotation pair " << (r->pair.first + 1) << " "
                   << (r->pair.second + 1) << "\n";
                for (const auto& c : r->comps)
                    os << "    component " << tuple_str(c.region_center) << " center "
                       << tuple_str(c.center) << " orient " << sign_tok(c.orient) << "\n";
                os << "  end\n";
            } else if (const auto* h = std::get_if<HopfDecl>(&act)) {
                os << "  action hopf pairs " << pair_str(h->pairs[0]) << " "
                   << pair_str(h->pairs[1]) << " weights " << h->weights[0] << " "
                   << h->weights[1] << "\n";
                for (const auto& c : h->comps)
                    os << "    component " << tuple_str(c.region_center) << " orient "
                       << sign_tok(c.orients[0]) << " " << sign_tok(c.orients[1]) << "\n";
                os << "  end\n";
            }
        }
        for (const auto& [name, diag] : ch.psi) {
            os << "  psi " << name;
            for (int s : diag) os << " " << psi_tok(s);
            os << "\n";
        }
        os << "end\n";
    }
    for (const auto& r : doc.resolutions) {
        os << "\nresolution " << r.id << "\n";
        os << "  chart " << r.chart << "\n";
        os << "  locus " << r.locus << " orbit " << r.orbit << "\n";
        os << "  model \"" << r.model << "\"\n";
        os << "  boundary " << r.boundary_chart << " action " << r.boundary_action << "\n";
        os << "end\n";
    }
    if (!doc.claims.empty()) {
        os << "\nclaims\n";
        for (const auto& c : doc.claims) os << "  " << claim_to_line(c) << "\n";
        os << "end\n";
    }
    return os.str();
}

StructureSpec resolve_spec(const SpecDoc& doc, const RunConfig& config) {
    StructureSpec spec;
    spec.name = doc.name;
    spec.dim = doc.dim;
    spec.claims = doc.claims;

    for (const auto& g : doc.generators) {
        if (static_cast<int>(g.signs.size()) != doc.dim ||
            static_cast<int>(g.shift.size()) != doc.dim)
            throw spec_error("generator " + g.name + ": signs/shift arity must equal torus dim");
        if (spec.find_generator(g.name))
            throw spec_error("duplicate generator name '" + g.name + "'");
        AffineMap m;
        m.signs = g.signs;
        m.shift = TorusPoint(g.shift);
        spec.generators.emplace_back(g.name, std::move(m));
    }

    for (const auto& cd : doc.charts) {
        if (spec.find_chart(cd.id)) throw spec_error("duplicate chart id '" + cd.id + "'");
        Chart ch;
        ch.id = cd.id;
        ch.covering = cd.covering;
        ch.deck_gens = cd.deck;
        ch.rank = cd.rank;
        ch.region.dim = doc.dim;
        for (const auto& c : cd.region) {
            TubeConstraint tc;
            tc.sense = c.sense;
            tc.coords = c.coords;
            for (int i : tc.coords)
                if (i >= doc.dim)
                    throw spec_error("chart " + cd.id + ": constraint coordinate out of range");
            tc.radius = c.radius.resolve(config.epsilon);
            if (tc.radius <= 0) throw spec_error("chart " + cd.id + ": radius must be positive");
            for (auto center : c.centers.expand()) {
                for (auto& q : center) q = mod1(q);
                tc.centers.push_back(std::move(center));
            }
            tc.normalize();
            ch.region.constraints.push_back(std::move(tc));
        }

        // Multi-component charts need pairwise disjoint tubes for the
        // per-component data to be meaningful.
        auto centers = ch.component_centers();
        if (centers.size() > 1) {
            const auto& con = ch.region.constraints[0];
            Rational sep = 4 * con.radius * con.radius;
            for (size_t a = 0; a < centers.size(); ++a)
                for (size_t b = a + 1; b < centers.size(); ++b) {
                    Rational d2(0);
                    for (size_t k = 0; k < centers[a].size(); ++k) {
                        Rational d = circle_dist(centers[a][k], centers[b][k]);
                        d2 += d * d;
                    }
                    if (d2 < sep)
                        throw spec_error("chart " + cd.id +
                                         ": component tubes overlap at this epsilon");
                }
        }
        int n_comp = ch.components();

        auto find_component = [&](const std::vector<Rational>& rc) {
            if (centers.empty()) return 0;
            std::vector<Rational> key(rc.size());
            for (size_t k = 0; k < rc.size(); ++k) key[k] = mod1(rc[k]);
            for (size_t i = 0; i < centers.size(); ++i)
                if (centers[i] == key) return static_cast<int>(i);
            throw spec_error("chart " + cd.id + ": component " + tuple_str(rc) +
                             " does not name a region center");
        };

        int circles = 0;
        for (const auto& ad : cd.actions) {
            if (const auto* f = std::get_if<FlowDecl>(&ad)) {
                LiftedFlow lf;
                lf.flow.dim = doc.dim;
                for (const auto& col : f->columns) {
                    if (static_cast<int>(col.size()) != doc.dim)
                        throw spec_error("chart " + cd.id + ": flow column arity mismatch");
                    lf.flow.columns.push_back(col);
                }
                if (lf.flow.columns.empty())
                    throw spec_error("chart " + cd.id + ": flow needs at least one column");
                if (!f->signs.empty() && static_cast<int>(f->signs.size()) != n_comp)
                    throw spec_error("chart " + cd.id + ": flow signs arity != components");
                lf.comp_signs = f->signs;
                circles += lf.flow.rank_k();
                if (!finite_kernel_check(lf.flow))
                    throw spec_error("chart " + cd.id + ": flow kernel is not finite");
                ch.actions.push_back(std::move(lf));
            } else if (const auto* r = std::get_if<RotationDecl>(&ad)) {
                LiftedRotation lr;
                lr.pair = r->pair;
                if (lr.pair.second >= doc.dim)
                    throw spec_error("chart " + cd.id + ": rotation pair out of range");
                lr.centers.assign(n_comp, {});
                lr.orients.assign(n_comp, 0);
                for (const auto& comp : r->comps) {
                    int idx = find_component(comp.region_center);
                    if (lr.orients[idx] != 0)
                        throw spec_error("chart " + cd.id + ": duplicate rotation component");
                    lr.centers[idx] = {mod1(comp.center[0]), mod1(comp.center[1])};
                    lr.orients[idx] = comp.orient;
                }
                for (int i = 0; i < n_comp; ++i)
                    if (lr.orients[i] == 0)
                        throw spec_error("chart " + cd.id +
                                         ": rotation misses a region component");
                circles += 1;
                ch.actions.push_back(std::move(lr));
            } else if (const auto* h = std::get_if<HopfDecl>(&ad)) {
                LiftedCircle lc;
                lc.pairs = h->pairs;
                lc.weights = h->weights;
                if (lc.pairs[1].second >= doc.dim || lc.pairs[0].second >= doc.dim)
                    throw spec_error("chart " + cd.id + ": hopf pair out of range");
                std::set<int> sup = {lc.pairs[0].first, lc.pairs[0].second, lc.pairs[1].first,
                                     lc.pairs[1].second};
                if (sup.size() != 4)
                    throw spec_error("chart " + cd.id + ": hopf pairs must be disjoint");
                if (lc.weights[0] == 0 || lc.weights[1] == 0)
                    throw spec_error("chart " + cd.id + ": hopf weights must be nonzero");
                lc.orients.assign(n_comp, {0, 0});
                for (const auto& comp : h->comps) {
                    int idx = find_component(comp.region_center);
                    if (lc.orients[idx][0] != 0)
                        throw spec_error("chart " + cd.id + ": duplicate hopf component");
                    lc.orients[idx] = comp.orients;
                }
                for (int i = 0; i < n_comp; ++i)
                    if (lc.orients[i][0] == 0)
                        throw spec_error("chart " + cd.id + ": hopf misses a region component");
                circles += 1;
                ch.actions.push_back(std::move(lc));
            }
        }
        if (circles != ch.rank)
            throw spec_error("chart " + cd.id + ": action circle count " +
                             std::to_string(circles) + " != rank " + std::to_string(ch.rank));

        // Rotations and declared circles need an embedded tube to act on.
        bool has_rot = false;
        for (const auto& a : ch.actions)
            if (!std::holds_alternative<LiftedFlow>(a)) has_rot = true;
        if (has_rot) {
            for (const auto& con : ch.region.constraints)
                if (con.sense == Sense::Inside && con.radius > Rational(1, 4))
                    throw spec_error("chart " + cd.id +
                                     ": rotation tube radius must be <= 1/4");
        }

        if (ch.covering == CoveringKind::Quotient) {
            for (const auto& d : cd.deck)
                if (!spec.find_generator(d))
                    throw spec_error("chart " + cd.id + ": unknown deck generator '" + d + "'");
            for (const auto& [name, diag] : cd.psi) {
                if (!spec.find_generator(name))
                    throw spec_error("chart " + cd.id + ": psi names unknown generator '" + name +
                                     "'");
                if (static_cast<int>(diag.size()) != ch.rank)
                    throw spec_error("chart " + cd.id + ": psi arity != rank");
                ch.psi[name] = diag;
            }
            for (const auto& d : cd.deck)
                if (!ch.psi.count(d))
                    throw spec_error("chart " + cd.id + ": psi missing for deck generator '" + d +
                                     "'");
        } else if (!cd.psi.empty()) {
            throw spec_error("chart " + cd.id + ": psi given for a trivial covering");
        }
        spec.charts.push_back(std::move(ch));
    }

    for (const auto& rd : doc.resolutions) {
        ResolutionChart rc;
        rc.id = rd.id;
        rc.chart_id = rd.chart;
        rc.locus = rd.locus;
        rc.orbit_index = rd.orbit;
        rc.model = rd.model;
        rc.boundary_chart = rd.boundary_chart;
        rc.boundary_action = rd.boundary_action;
        if (!spec.find_chart(rc.chart_id))
            throw spec_error("resolution " + rd.id + ": unknown chart '" + rd.chart + "'");
        const Chart* bch = spec.find_chart(rc.boundary_chart);
        if (!bch)
            throw spec_error("resolution " + rd.id + ": unknown boundary chart '" +
                             rd.boundary_chart + "'");
        if (rc.boundary_action < 0 ||
            rc.boundary_action >= static_cast<int>(bch->actions.size()))
            throw spec_error("resolution " + rd.id + ": boundary action index out of range");
        spec.element(rc.locus);  // throws on unknown generators
        spec.resolutions.push_back(std::move(rc));
    }
    return spec;
}

const std::vector<BundledSpec>& bundled_specs() {
    static const std::vector<BundledSpec> specs = {
        {"k3", "k3.fspec", "Kummer K3 surface: T^4 / (x -> -x) with 16 resolved fixed points"},
        {"j8", "j8.fspec", "Bott 8-manifold: T^8 / (Z_2)^4 with 15-chart structure"},
        {"g2", "g2.fspec", "G2 holonomy 7-manifold: T^7 / (Z_2)^3, 48 fixed 3-tori"},
        {"cy3", "cy3.fspec", "Calabi-Yau 3-fold: T^6 / (Z_2)^2, 32 singular 2-tori"},
    };
    return specs;
}

}  // namespace fstruct

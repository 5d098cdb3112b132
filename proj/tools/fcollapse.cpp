// fcollapse: profile validation, the warped-product curvature lower bound over
// a delta schedule, finite-difference oracle cross-checks, and the volume
// schedules of the collapse model pieces. CSV tables on stdout.
// Exit codes: 0 all assertions hold, 1 any assertion fails, 2 input error.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fstruct/collapse.hpp"

namespace {

std::vector<double> parse_deltas(const std::string& text) {
    std::vector<double> out;
    auto range = text.find("..");
    if (range != std::string::npos) {
        double a = std::stod(text.substr(0, range));
        double b = std::stod(text.substr(range + 2));
        if (!(a > 0 && b > 0)) throw std::invalid_argument("deltas must be positive");
        // decade steps from a down to b
        for (double d = a; d >= b * 0.999999; d /= 10) out.push_back(d);
        return out;
    }
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical certification of the collapsing construction"};
    std::string deltas_arg = "1e-1..1e-6", profile_name = "quintic";
    int grid = 2001;
    double fd_step = 1e-3;
    app.add_option("--deltas", deltas_arg, "comma list or decade range a..b");
    app.add_option("--profile", profile_name, "quintic|quintic_margin|linear_ramp|steep");
    app.add_option("--grid", grid, "t-grid size");
    app.add_option("--fd-step", fd_step, "finite-difference step");
    CLI11_PARSE(app, argc, argv);

    std::vector<double> deltas;
    fstruct::WarpProfile profile;
    try {
        deltas = parse_deltas(deltas_arg);
        profile = fstruct::WarpProfile::by_name(profile_name);
        if (deltas.empty()) throw std::invalid_argument("empty delta list");
    } catch (const std::exception& e) {
        std::cerr << "fcollapse: " << e.what() << "\n";
        return 2;
    }

    bool ok = true;

    auto rep = fstruct::validate_profile(profile, grid);
    std::printf("# profile validation\n");
    std::printf("profile,pass,max_s',min_s''\n");
    std::printf("%s,%d,%.9f,%.9f\n", profile.name.c_str(), rep.pass ? 1 : 0, rep.max_ds,
                rep.min_dds);
    for (const auto& v : rep.violations) std::printf("# violation: %s\n", v.c_str());
    if (!rep.pass) {
        std::cerr << "fcollapse: profile validation failed\n";
        return 1;
    }

    std::printf("\n# curvature lower bound, both warp conventions\n");
    std::printf("profile,delta,convention,t_argmin,min_bound,limit,margin\n");
    for (double d : deltas) {
        for (auto conv :
             {fstruct::WarpConvention::PaperLiteral, fstruct::WarpConvention::SquaredWarp}) {
            fstruct::WarpedMetric m{profile, d, 0.0, conv};
            fstruct::BoundResult b;
            try {
                b = fstruct::curvature_lower_bound(m, grid);
            } catch (const std::exception& e) {
                std::cerr << "fcollapse: " << e.what() << "\n";
                return 2;
            }
            std::printf("%s,%.3e,%s,%.4f,%.6f,%.6f,%.6f\n", profile.name.c_str(), d,
                        conv == fstruct::WarpConvention::PaperLiteral ? "literal" : "squared",
                        b.argmin_t, b.min_value, b.limit, b.min_value - b.limit);
            if (!b.pass) {
                ok = false;
                std::cerr << "fcollapse: bound fails at delta " << d << ", t " << b.argmin_t
                          << "\n";
            }
        }
        fstruct::WarpedMetric m{profile, d, 0.0, fstruct::WarpConvention::PaperLiteral};
        auto id = fstruct::check_derivative_identities(m, 1000, 1e-5);
        if (id.max_rel_err_df > 1e-6 || id.max_rel_err_ddf > 1e-6) {
            ok = false;
            std::cerr << "fcollapse: derivative identities fail at delta " << d << " (rel "
                      << id.max_rel_err_df << ", " << id.max_rel_err_ddf << ")\n";
        }
    }

    // Oracle cross-checks at the smallest requested delta.
    std::printf("\n# finite-difference oracle\n");
    std::printf("case,value,reference,abs_err\n");
    {
        auto flat = fstruct::product_flat_field(2);
        double k = fstruct::fd_sectional_oracle(flat, {0.1, 0.2, 0.3}, {1, 0, 0}, {0, 1, 0},
                                                fd_step);
        std::printf("flat_product,%.3e,0,%.3e\n", k, std::abs(k));
        if (std::abs(k) > 1e-6) ok = false;

        auto ew = fstruct::exp_warp_field(2);
        double k2 =
            fstruct::fd_sectional_oracle(ew, {0.3, 0.2, 0.1}, {1, 0, 0}, {0, 1, 0}, fd_step);
        std::printf("exp_warp_mixed,%.9f,-1,%.3e\n", k2, std::abs(k2 + 1));
        if (std::abs(k2 + 1) > 1e-4) ok = false;

        double dmin = deltas.back();
        auto wf = fstruct::warped_torus_field(profile, dmin, 2);
        fstruct::WarpedMetric msq{profile, dmin, 0.0, fstruct::WarpConvention::SquaredWarp};
        double on = fstruct::fd_sectional_oracle(wf, {3.0, 0.2, 0.3}, {1, 0, 0}, {0, 1, 0},
                                                 fd_step);
        double cf = fstruct::sectional_curvature(msq, 3.0, 1.0, 0.0, 0.0);
        double rel = std::abs(on - cf) / std::abs(cf);
        std::printf("warped_vs_closed_form,%.6f,%.6f,%.3e\n", on, cf, rel);
        if (rel > 1e-3) ok = false;
    }

    std::printf("\n# volume schedules\n");
    std::printf("piece,log_exponent,collapsed_dims,delta,volume\n");
    std::vector<double> sched = deltas;
    for (auto piece : fstruct::theorem_b_pieces()) {
        auto res = fstruct::volume_schedule(piece, sched);
        for (size_t i = 0; i < sched.size(); ++i)
            std::printf("%s,%d,%d,%.3e,%.6e\n", piece.name.c_str(), piece.log_exponent,
                        piece.collapsed_dims, sched[i], res.volumes[i]);
        if (!res.eventually_decreasing) {
            ok = false;
            std::cerr << "fcollapse: schedule for " << piece.name
                      << " is not eventually decreasing\n";
        }
    }
    {
        fstruct::CollapsePiece control{"control_d0", 4, 0, 1.0};
        auto res = fstruct::volume_schedule(control, sched);
        std::printf("# control piece d=0: %s\n",
                    res.divergent ? "flagged divergent (orbit shrinking is essential)"
                                  : "unexpectedly convergent");
        if (!res.divergent) ok = false;
    }

    if (!ok) {
        std::cerr << "fcollapse: assertions failed\n";
        return 1;
    }
    return 0;
}

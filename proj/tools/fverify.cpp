// fverify: parse a structure spec file and run the verification passes.
// Exit codes: 0 all passes and claims hold, 1 verification failure,
// 2 input/parse error.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fstruct/specfile.hpp"
#include "fstruct/structure.hpp"

namespace {

std::string spec_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("FSTRUCT_SPEC_DIR")) return env;
    return "specs";
}

std::string locate(const std::string& arg, const std::string& dir) {
    for (const auto& b : fstruct::bundled_specs())
        if (arg == b.name) return dir + "/" + b.file;
    return arg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification of torus-orbifold structure specs"};
    std::string spec_path;
    std::string epsilon = "1/16", min_cell = "1/256", report_fmt = "text", out_path, dir_flag;
    int samples = 32;
    bool emit_claims = false, list_specs = false;
    app.add_option("spec", spec_path, "spec file path or bundled spec name");
    app.add_option("--epsilon", epsilon, "tube parameter epsilon (rational p/q)");
    app.add_option("--min-cell", min_cell, "cover subdivision floor (rational p/q)");
    app.add_option("--samples", samples, "samples per polarization stratum");
    app.add_option("--report", report_fmt, "report format: text|json");
    app.add_option("--out", out_path, "write the report to a file instead of stdout");
    app.add_option("--spec-dir", dir_flag, "directory of the bundled specs");
    app.add_flag("--emit-claims", emit_claims, "print the derived claims block and exit");
    app.add_flag("--list-specs", list_specs, "list the bundled specs and exit");
    CLI11_PARSE(app, argc, argv);

    if (list_specs) {
        for (const auto& b : fstruct::bundled_specs())
            std::cout << b.name << "\t" << b.description << "\n";
        return 0;
    }
    if (spec_path.empty()) {
        std::cerr << "fverify: no spec given (see --help)\n";
        return 2;
    }
    if (report_fmt != "text" && report_fmt != "json") {
        std::cerr << "fverify: unknown report format '" << report_fmt << "'\n";
        return 2;
    }

    fstruct::RunConfig config;
    auto eps = fstruct::rat_parse(epsilon);
    auto cell = fstruct::rat_parse(min_cell);
    if (!eps || *eps <= 0 || !cell || *cell <= 0) {
        std::cerr << "fverify: epsilon and min-cell must be positive rationals\n";
        return 2;
    }
    config.epsilon = *eps;
    config.min_cell = *cell;
    config.samples_per_stratum = samples;

    try {
        auto doc = fstruct::parse_spec_file(locate(spec_path, spec_dir(dir_flag)));
        auto spec = fstruct::resolve_spec(doc, config);

        if (emit_claims) {
            std::cout << "claims\n";
            for (const auto& c : fstruct::derive_claims(spec, config))
                std::cout << "  " << fstruct::claim_to_line(c) << "\n";
            std::cout << "end\n";
            return 0;
        }

        auto report = fstruct::verify(spec, config);
        std::string text = report_fmt == "json" ? report.to_json() : report.to_text();
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "fverify: cannot write '" << out_path << "'\n";
                return 2;
            }
            out << text;
        }
        if (!report.ok) {
            std::cerr << "fverify: verification failed at pass " << report.first_failure << "\n";
            return 1;
        }
        return 0;
    } catch (const fstruct::parse_error& e) {
        std::cerr << "fverify: parse error: " << e.what() << "\n";
        return 2;
    } catch (const fstruct::spec_error& e) {
        std::cerr << "fverify: " << e.what() << "\n";
        return 2;
    }
}

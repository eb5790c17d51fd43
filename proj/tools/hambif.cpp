#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hambif/analyze.hpp"

namespace {

int run_analyze(const std::string& configPath, int jmaxOverride,
                const std::vector<double>& window, bool validateOrbits,
                const std::string& format, const std::string& outPath) {
    hambif::ProblemSpec spec = hambif::load_problem(configPath);
    if (jmaxOverride > 0) spec.analysis.jMax = jmaxOverride;
    if (!window.empty()) {
        if (window.size() != 2 || !(0 < window[0] && window[0] < window[1]))
            throw hambif::ConfigError("--lambda-window needs 0 < a < b");
        spec.analysis.lambdaWindow = {window[0], window[1]};
    }
    if (validateOrbits) spec.analysis.validateOrbits = true;
    spec.analysis.reportFormat = format;

    const hambif::AnalysisReport report = hambif::analyze(spec);
    const std::string body =
        format == "json" ? report.to_json() : report.to_text();

    if (outPath.empty()) {
        std::cout << body;
    } else {
        std::ofstream out(outPath);
        if (!out)
            throw hambif::ConfigError("cannot write report to " + outPath);
        out << body;
        // Orbit dumps go next to the report, one file per validated orbit.
        int k = 0;
        for (const auto& orbit : report.orbits) {
            if (orbit.dump.empty()) continue;
            const std::string dumpPath =
                outPath + ".orbit" + std::to_string(k++) + ".txt";
            std::ofstream dump(dumpPath);
            dump << orbit.dump;
        }
    }
    if (!report.allCertifiedValidated) {
        std::cerr << "internal consistency error: a certified claim "
                     "failed validation (see report)\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bifurcation analysis of 2pi-periodic solutions of "
                 "parametrized Hamiltonian systems with block-diagonal "
                 "Hessians"};
    app.require_subcommand(1);

    std::string configPath;
    int jmax = 0;
    std::vector<double> window;
    bool validateOrbits = false;
    std::string format = "text";
    std::string outPath;

    CLI::App* analyze =
        app.add_subcommand("analyze", "Run the full analysis pipeline");
    analyze->add_option("config", configPath,
                        "Config file path or registry name")
        ->required();
    analyze->add_option("--jmax", jmax, "Window size for the eta sequence");
    analyze->add_option("--lambda-window", window,
                        "Restrict candidates to [a, b]")
        ->expected(2);
    analyze->add_flag("--validate-orbits", validateOrbits,
                      "Shoot for small-amplitude periodic orbits at "
                      "certified candidates");
    analyze->add_option("--report", format, "Report format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    analyze->add_option("--out", outPath, "Write the report to a file");

    CLI::App* registry = app.add_subcommand(
        "registry", "List built-in example problems");

    CLI11_PARSE(app, argc, argv);

    try {
        if (registry->parsed()) {
            for (const auto& name : hambif::registry_names())
                std::cout << name << "\n";
            return 0;
        }
        return run_analyze(configPath, jmax, window, validateOrbits, format,
                           outPath);
    } catch (const hambif::RouteDisagreement& e) {
        std::cerr << "internal consistency error: " << e.what() << "\n";
        return 2;
    } catch (const hambif::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const hambif::ConfigError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const hambif::HessianStructureError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const hambif::Error& e) {
        std::cerr << "internal consistency error: " << e.what() << "\n";
        return 2;
    }
}

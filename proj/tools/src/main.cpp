// qmap: scenario runner.
//
//   qmap run <scenario> [--out DIR] [--strict]
//   qmap validate <scenario> [--strict]
//
// Exit codes: 0 ok, 1 usage, 2 schema or output directory, 3 engine error,
// 4 invariant failure under --strict.

#include "runner.hpp"
#include "scenario.hpp"

#include "qmap/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kSchema = 2;
constexpr int kEngine = 3;
constexpr int kInvariant = 4;

void print(const std::vector<qmap::cli::Diagnostic>& ds, const std::string& file) {
    for (const auto& d : ds) {
        std::cerr << qmap::cli::format(d, file) << "\n";
    }
}

int validate(const std::string& file, bool strict) {
    const auto result = qmap::cli::validate_scenario(file, strict);
    if (!result.ok()) {
        print(result.diagnostics, file);
        return kSchema;
    }
    std::cout << file << ": ok (" << qmap::cli::to_string(result.config->kind) << ", "
              << result.config->variants.size() << " variant(s))\n";
    return 0;
}

int run(const std::string& file, const std::string& out, bool strict) {
    const auto result = qmap::cli::validate_scenario(file);
    if (!result.ok()) {
        print(result.diagnostics, file);
        return kSchema;
    }
    const qmap::cli::ScenarioConfig& cfg = *result.config;
    const auto dir = out.empty() ? qmap::cli::default_out_dir(cfg) : std::filesystem::path(out);
    qmap::cli::RunOutcome outcome;
    try {
        outcome = qmap::cli::run_scenario(cfg, dir);
    } catch (const qmap::cli::OutputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSchema;
    } catch (const qmap::Error& e) {
        std::cerr << "engine error: " << e.what() << "\n";
        return kEngine;
    }
    for (const auto& c : outcome.checks) {
        std::cout << (c.pass ? "pass " : "FAIL ") << c.name << " = " << c.value << " (" << c.relation << " "
                  << c.tolerance << ")\n";
    }
    std::cout << "wrote " << outcome.files.size() << " file(s) to " << dir.string() << "\n";
    if (!outcome.passed) {
        std::cerr << "invariant checks failed\n";
        return strict ? kInvariant : 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic thermodynamics of collision-generated CPTP maps"};
    app.require_subcommand(1);

    std::string file;
    std::string out;
    bool strict = false;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its artifacts");
    run_cmd->add_option("scenario", file, "Scenario file (TOML)")->required();
    run_cmd->add_option("--out", out, "Output directory (overrides run.out)");
    run_cmd->add_flag("--strict", strict, "Exit 4 when an invariant check fails");

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario against the schema");
    validate_cmd->add_option("scenario", file, "Scenario file (TOML)")->required();
    validate_cmd->add_flag("--strict", strict, "Stop at the first failure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) {
            return run(file, out, strict);
        }
        return validate(file, strict);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kEngine;
    }
}

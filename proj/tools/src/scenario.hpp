// scenario.hpp: scenario files: schema, parsing and validation.
//
// A scenario is a TOML document. Every diagnostic carries the line of the
// offending node when the parser knows it.

#pragma once

#include "qmap/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmap::cli {

enum class Kind { SingleMap, Sequence, Cycle, Lindblad, FtCheck };

std::string to_string(Kind kind);

struct Diagnostic {
    int line = 0;          // 0 when unknown
    std::string path;      // dotted key path
    std::string message;
};

std::string format(const Diagnostic& d, const std::string& file);

class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

struct ModelConfig {
    SpinChainParams chain;
    double bath_h = 0.0;
    double beta = 1.0;
    std::optional<CouplingSpec> coupling;
};

struct Variant {
    std::string name;      // empty for the base model
    ModelConfig model;
};

struct SequenceEntry {
    CouplingSpec coupling;
    int repeat = 1;
};

struct CycleConfig {
    CouplingSpec drive;
    CouplingSpec relax;
    int relax_steps = 6;
    double tolerance = 1e-5;
};

struct LindbladConfig {
    double t_final = 10.0;
    double dt = 1e-3;
    int sample_every = 100;
    std::vector<double> taus;
    double convergence_t = 1.0;
};

enum class InitialState { Gibbs, GibbsH0, MaximallyMixed, Random };

struct RunConfig {
    int repeats = 1;
    InitialState initial = InitialState::Gibbs;
    std::string out;
    std::size_t budget = 100'000;     // trajectory records per ensemble
    std::map<std::string, double> tolerances;

    double tol(const std::string& key) const;
};

struct ScenarioConfig {
    std::filesystem::path source;
    std::string name;
    std::string config_hash;
    Kind kind = Kind::SingleMap;
    std::uint64_t seed = 1;
    std::vector<Variant> variants;   // the base model alone when no [[variant]] is given
    RunConfig run;
    std::optional<std::vector<SequenceEntry>> sequence;
    std::optional<CycleConfig> cycle;
    std::optional<LindbladConfig> lindblad;
};

/// Default tolerances, overridable under [run.tolerances].
const std::map<std::string, double>& default_tolerances();

struct ValidationResult {
    std::optional<ScenarioConfig> config;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

/// Full schema walk; with stop_at_first only the first failure is reported.
ValidationResult validate_scenario(const std::filesystem::path& file, bool stop_at_first = false);

/// validate_scenario, throwing SchemaError on any diagnostic.
ScenarioConfig load_scenario(const std::filesystem::path& file);

/// FNV-1a (64 bit) of the file bytes, as 16 hex digits.
std::string config_hash(const std::filesystem::path& file);

}  // namespace qmap::cli

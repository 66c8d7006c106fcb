// runner.hpp: executes a validated scenario and writes its artifacts.

#pragma once

#include "scenario.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmap::cli {

/// The output directory cannot be created or written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string relation;   // "<", ">" or ">="
    bool pass = false;
};

struct RunOutcome {
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> files;   // in write order
    std::vector<Check> checks;                  // names prefixed by variant
    bool passed = true;
};

/// run.out, or out/<scenario name> when unset.
std::filesystem::path default_out_dir(const ScenarioConfig& cfg);

/// Engine failures propagate as qmap::Error; OutputError for I/O.
RunOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace qmap::cli

#include "scenario.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(testing::TempDir()) / ("qmap_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result invoke(const std::string& args, const fs::path& log, const std::string& env = "") {
    const std::string cmd = env + " \"" + std::string(QMAP_CLI) + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
    }
    return files;
}

const std::string kSingle = R"(kind = "single_map"
name = "probe"
seed = 9

[model]
sites = 2
h = 2.0
jx = [3.0]
jy = [2.0]
beta = 1.2

[model.coupling]
jx_c = 3.0
jy_c = 3.0
tau = 1.0

[run]
initial = "random"
)";

std::string scenario(const std::string& name) { return (fs::path(QMAP_SCENARIO_DIR) / name).string(); }

}  // namespace

TEST(Validate, ShippedScenarioIsOk) {
    const fs::path dir = scratch("validate_ok");
    const Result r = invoke("validate " + scenario("fig3.toml"), dir / "log");
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("ok (ft_check, 2 variant(s))"), std::string::npos) << r.output;
}

TEST(Validate, MissingBetaNamesTheField) {
    const fs::path dir = scratch("missing_beta");
    std::string text = kSingle;
    text.erase(text.find("beta = 1.2\n"), 11);
    const Result r = invoke("validate " + write(dir, "s.toml", text).string(), dir / "log");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("model.beta"), std::string::npos) << r.output;
}

TEST(Validate, NegativeTauIsRejectedWithLine) {
    const fs::path dir = scratch("negative_tau");
    std::string text = kSingle;
    text.replace(text.find("tau = 1.0"), 9, "tau = -1.0");
    const fs::path file = write(dir, "s.toml", text);
    const Result r = invoke("validate " + file.string(), dir / "log");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find(file.string() + ":15: model.coupling.tau"), std::string::npos) << r.output;
    EXPECT_EQ(invoke("run " + file.string() + " --out " + (dir / "out").string(), dir / "log2").code, 2);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Validate, StrictStopsAtFirstFailure) {
    const fs::path dir = scratch("strict_validate");
    std::string text = kSingle;
    text.replace(text.find("tau = 1.0"), 9, "tau = -1.0");
    text.erase(text.find("beta = 1.2\n"), 11);
    const fs::path file = write(dir, "s.toml", text + "bogus = 1\n");
    EXPECT_EQ(qmap::cli::validate_scenario(file).diagnostics.size(), 3u);
    EXPECT_EQ(qmap::cli::validate_scenario(file, true).diagnostics.size(), 1u);
    EXPECT_EQ(invoke("validate --strict " + file.string(), dir / "log").code, 2);
}

TEST(Validate, UnknownFieldsAndBadTolerances) {
    const fs::path dir = scratch("unknown");
    const fs::path file = write(dir, "s.toml", kSingle + "\n[run.tolerances]\nfirst_law = -1.0\nnope = 1.0\n");
    const auto result = qmap::cli::validate_scenario(file);
    ASSERT_FALSE(result.ok());
    std::string all;
    for (const auto& d : result.diagnostics) all += d.path + ";";
    EXPECT_NE(all.find("run.tolerances.first_law"), std::string::npos) << all;
    EXPECT_NE(all.find("run.tolerances.nope"), std::string::npos) << all;
}

TEST(Run, OutputsAreByteIdentical) {
    const fs::path dir = scratch("identical");
    const fs::path file = write(dir, "s.toml", kSingle);
    ASSERT_EQ(invoke("run " + file.string() + " --out " + (dir / "a").string(), dir / "log1", "QMAP_THREADS=1").code, 0);
    ASSERT_EQ(invoke("run " + file.string() + " --out " + (dir / "b").string(), dir / "log2", "QMAP_THREADS=4").code, 0);
    const auto a = tree(dir / "a");
    const auto b = tree(dir / "b");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    ASSERT_TRUE(a.count("summary.json"));
    ASSERT_TRUE(a.count("thermo.csv"));
    const std::string hash = qmap::cli::config_hash(file);
    EXPECT_EQ(a.at("thermo.csv").rfind("# config_hash=" + hash + "\n", 0), 0u);
}

TEST(Run, EmptySequenceExitsCleanly) {
    const fs::path dir = scratch("empty_sequence");
    std::string text = kSingle;
    text.replace(text.find("single_map"), 10, "sequence");
    text.insert(text.find("[model]"), "sequence = []\n\n");
    const fs::path file = write(dir, "s.toml", text);
    const Result r = invoke("run " + file.string() + " --out " + (dir / "out").string() + " --strict", dir / "log");
    EXPECT_EQ(r.code, 0) << r.output;
    const auto files = tree(dir / "out");
    ASSERT_TRUE(files.count("thermo.csv"));
    // Metadata and header only.
    const std::string& csv = files.at("thermo.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Run, StrictModeReportsInvariantFailures) {
    const fs::path dir = scratch("strict_run");
    const fs::path file = write(dir, "s.toml", kSingle + "\n[run.tolerances]\nkraus = 1e-300\n");
    EXPECT_EQ(invoke("run " + file.string() + " --out " + (dir / "a").string(), dir / "log1").code, 0);
    const Result r = invoke("run " + file.string() + " --out " + (dir / "b").string() + " --strict", dir / "log2");
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.output.find("FAIL kraus_completeness"), std::string::npos) << r.output;
}

TEST(Run, UnwritableOutputDirectory) {
    const fs::path dir = scratch("unwritable");
    const fs::path file = write(dir, "s.toml", kSingle);
    const fs::path blocker = write(dir, "blocker", "x");
    EXPECT_EQ(invoke("run " + file.string() + " --out " + blocker.string(), dir / "log").code, 2);
}

TEST(Run, EngineErrorExitCode) {
    // One thermal collision cannot bring the driven spin back to ω_β(H_S).
    const fs::path dir = scratch("engine_error");
    const fs::path file = write(dir, "s.toml", R"(kind = "cycle"
name = "short"

[model]
sites = 1
h = 1.0
beta = 1.0

[cycle]
drive = { jx_c = 3.3, jy_c = 3.0, tau = 1.0 }
relax = { jx_c = 3.0, jy_c = 3.0, tau = 4.0 }
relax_steps = 1
)");
    const Result r = invoke("run " + file.string() + " --out " + (dir / "out").string(), dir / "log");
    EXPECT_EQ(r.code, 3) << r.output;
}

TEST(Run, UsageErrors) {
    const fs::path dir = scratch("usage");
    EXPECT_EQ(invoke("", dir / "log").code, 1);
    EXPECT_EQ(invoke("run", dir / "log").code, 1);
    EXPECT_EQ(invoke("--help", dir / "log").code, 0);
}

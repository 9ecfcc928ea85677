#include "mal/cli/commands.hpp"
#include "mal/cli/config.hpp"
#include "mal/cli/spec_io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace mal::cli;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mal_cli_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(MAL_EXECUTABLE) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string field_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<none>";
}

std::string constants_config(const fs::path& out, const std::string& suites = "noether") {
    return "[grid]\nN = 8\n[fixture]\nkind = constants\nconstant_a = 0\nconstant_b = 1\n"
           "[geodesic]\nepsilon_schedule = 0.1\ntime_steps = 8\n[verification]\nsuites = " +
           suites + "\n[output]\ndirectory = " + out.string() + "\n";
}

}  // namespace

TEST(Config, ErrorsNameTheField) {
    EXPECT_EQ(field_of("[grid]\nN = 7\n"), "grid.N");
    EXPECT_EQ(field_of("[grid]\nN = abc\n"), "grid.N");
    EXPECT_EQ(field_of("[grid]\nbogus = 1\n"), "grid.bogus");
    EXPECT_EQ(field_of("[geodesic]\nmode = sideways\n"), "geodesic.mode");
    EXPECT_EQ(field_of("[verification]\nsuites = least_action,nope\n"), "verification.suites");
    EXPECT_EQ(field_of("[fixture]\nkind = constants\namplitudes_a = 0.1\n"), "fixture.amplitudes_a");
    EXPECT_EQ(field_of("[grid]\nN = 8\n"), "<none>");
}

TEST(Config, HashIsStableAndSensitive) {
    const ExperimentConfig a = parse_config_text("[grid]\nN = 8\n");
    const ExperimentConfig b = parse_config_text("[grid]\n  N=8  \n[geodesic]\nT = 1\n");
    const ExperimentConfig c = parse_config_text("[grid]\nN = 10\n");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(c));
    EXPECT_EQ(config_hash(a).size(), 64u);
}

TEST(SpecIo, ParsesAllFamilies) {
    EXPECT_EQ(parse_spec("power:p1", ".").text(), "power:p1");
    EXPECT_EQ(parse_spec("orlicz:p2", ".").text(), "orlicz:p2");
    EXPECT_EQ(parse_spec("lorentz:a0.5", ".").text(), "lorentz:a0.5");
    EXPECT_ANY_THROW(parse_spec("quartic:p3", "."));
    const fs::path dir = scratch_dir("spec");
    write(dir / "fam.json", R"({"members": [{"a": 0.0, "breakpoints": [0.0, 0.5, 1.0], "levels": [1.0, -1.0]}]})");
    const auto spec = parse_spec("supfam:fam.json", dir);
    EXPECT_TRUE(std::holds_alternative<mal::SupFamily>(spec.variant()));
}

TEST(Rearrange, SpecExampleAndErrors) {
    const fs::path dir = scratch_dir("rearrange");
    write(dir / "in.csv", "value,weight\n1,0.25\n3,0.5\n2,0.25\n");
    std::ostringstream err;
    ASSERT_EQ(cmd_rearrange(dir / "in.csv", dir / "out.csv", err), exit_pass);
    EXPECT_EQ(read(dir / "out.csv"), "breakpoint,level\n0.5,3\n0.75,2\n1,1\n");
    write(dir / "bad.csv", "1,0.25\n2,-1\n");
    EXPECT_EQ(cmd_rearrange(dir / "bad.csv", dir / "o2.csv", err), exit_config_error);
    write(dir / "bad2.csv", "1,0.25\nxyz\n");
    EXPECT_EQ(cmd_rearrange(dir / "bad2.csv", dir / "o3.csv", err), exit_config_error);
}

TEST(Solve, ConstantsClosedFormAndDeterminism) {
    const fs::path dir = scratch_dir("solve");
    write(dir / "c.ini", constants_config(dir / "out"));
    ASSERT_EQ(run("solve --config " + (dir / "c.ini").string(), dir / "stdout.txt"), 0);
    std::ifstream csv(dir / "out" / "path.csv");
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "t,i,j,u");
    double worst = 0.0;
    int rows = 0;
    while (std::getline(csv, line)) {
        double t = 0.0;
        int i = 0;
        int j = 0;
        double u = 0.0;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%d,%d,%lf", &t, &i, &j, &u), 4);
        worst = std::max(worst, std::abs(u - (t + 0.1 * t * (t - 1.0) / 2.0)));
        ++rows;
    }
    EXPECT_EQ(rows, 9 * 64);
    EXPECT_LE(worst, 1e-6);
    const std::string first = read(dir / "out" / "path.csv");
    const std::string first_json = read(dir / "out" / "path.json");
    ASSERT_EQ(run("solve --config " + (dir / "c.ini").string(), dir / "stdout2.txt"), 0);
    EXPECT_EQ(read(dir / "out" / "path.csv"), first);
    EXPECT_EQ(read(dir / "out" / "path.json"), first_json);
    EXPECT_NE(first_json.find(config_hash(parse_config(dir / "c.ini"))), std::string::npos);
}

TEST(Verify, NoetherOnConstantsPassesWithControl) {
    const fs::path dir = scratch_dir("verify");
    write(dir / "c.ini", constants_config(dir / "out"));
    ASSERT_EQ(run("verify --config " + (dir / "c.ini").string(), dir / "lines.jsonl"), 0);
    const std::string lines = read(dir / "lines.jsonl");
    EXPECT_EQ(lines, read(dir / "out" / "verify.jsonl"));
    EXPECT_NE(lines.find("\"experiment\":\"noether\""), std::string::npos);
    EXPECT_NE(lines.find("expected-fail: observed-fail"), std::string::npos);
    EXPECT_EQ(lines.find("\"pass\":false"), std::string::npos);
}

TEST(ExitCodes, ConfigErrorsAndHomogeneity) {
    const fs::path dir = scratch_dir("exit");
    write(dir / "bad.ini", "[grid]\nN = 5\n");
    EXPECT_EQ(run("solve --config " + (dir / "bad.ini").string(), dir / "o.txt"), 3);
    EXPECT_EQ(run("solve --config " + (dir / "missing.ini").string(), dir / "o.txt"), 3);
    std::string cfg = constants_config(dir / "out", "comparison");
    cfg += "[lagrangian]\nspec = orlicz:p2\n";
    write(dir / "hom.ini", cfg);
    EXPECT_EQ(run("verify --config " + (dir / "hom.ini").string(), dir / "o.txt"), 3);
    write(dir / "in.csv", "1,0\n");
    EXPECT_EQ(run("rearrange --in " + (dir / "in.csv").string() + " --out " + (dir / "o.csv").string(), dir / "o.txt"),
              3);
}

TEST(ExitCodes, ViolationAndSolverFailure) {
    const fs::path dir = scratch_dir("exit2");
    // A tolerance below the eps floor of the weak geodesic gives exit 1.
    write(dir / "strict.ini", "[grid]\nN = 8\n[geodesic]\nmode = weak\nepsilon_schedule = 1\ntime_steps = 8\n"
                              "[verification]\nsuites = noether\ntolerance = 1e-14\n[output]\ndirectory = " +
                                  (dir / "out").string() + "\n");
    EXPECT_EQ(run("verify --config " + (dir / "strict.ini").string(), dir / "o.txt"), 1);
    // One Newton iteration at a tiny tolerance cannot converge.
    std::string hard = "[grid]\nN = 16\n[geodesic]\nepsilon_schedule = 0.1\ntime_steps = 16\nsolver_tol = 1e-15\n"
                       "max_iter = 1\n[output]\ndirectory = " +
                       (dir / "out2").string() + "\n";
    write(dir / "hard.ini", hard);
    EXPECT_EQ(run("solve --config " + (dir / "hard.ini").string(), dir / "o.txt"), 2);
}

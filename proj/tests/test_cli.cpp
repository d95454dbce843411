#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(DDMCERT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ddmcert_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Cli, HelpExitsCleanly) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("run --help"), 0);
}

TEST(Cli, ConfigErrorsExitWithOne) {
    EXPECT_EQ(run("run --h 0.3"), 1);
    EXPECT_EQ(run("run --h 0.25 --H 0.125"), 1);
    EXPECT_EQ(run("run --config /nonexistent.cfg"), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run(""), 1);
}

TEST(Cli, RunWritesHistoryAndTable) {
    const fs::path out = scratch("run");
    ASSERT_EQ(run("run --preset lshape --h 0.5 --sweeps 3 --emit-fields --out " + out.string()), 0);
    const std::string csv = slurp(out / "history.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_NE(csv.find("\r\n"), std::string::npos);
    EXPECT_NE(slurp(out / "table.md").find("| sweep |"), std::string::npos);
    EXPECT_TRUE(fs::exists(out / "fields_sweep3.vtk"));
    fs::remove_all(out);
}

TEST(Cli, ConfigFileWithOverride) {
    const fs::path out = scratch("cfg");
    fs::create_directories(out);
    {
        std::ofstream f(out / "run.cfg");
        f << "preset = lshape\nh = 1/4\nH = 1/2\nsweeps = 8\n";
    }
    ASSERT_EQ(run("run --config " + (out / "run.cfg").string() + " --sweeps 2 --out " + out.string()), 0);
    const std::string csv = slurp(out / "history.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_NE(csv.find("\r\n0.25,0.5,1,2,"), std::string::npos);
    fs::remove_all(out);
}

TEST(Cli, RectPresetWithOptimizedWeights) {
    const fs::path out = scratch("rect");
    EXPECT_EQ(run("run --preset rect --m 3 --n 2 --h 0.25 --sweeps 2 --eps opt --out " + out.string()), 0);
    fs::remove_all(out);
}

TEST(Cli, TableFourLayout) {
    const fs::path out = scratch("table4");
    ASSERT_EQ(run("table4 --h 0.25 --out " + out.string()), 0);
    const std::string md = slurp(out / "table.md");
    EXPECT_NE(md.find("M1^2 omega3"), std::string::npos);
    for (const char* n : {"| 2 |", "| 3 |", "| 4 |", "| 7 |", "| 8 |"}) EXPECT_NE(md.find(n), std::string::npos);
    fs::remove_all(out);
}

TEST(Cli, CheckPasses) { EXPECT_EQ(run("check"), 0); }

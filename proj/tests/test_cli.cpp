#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(KIRCHHOFF_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t k;
    while ((k = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, k);
    const int st = pclose(pipe);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::filesystem::path scratch(const char* name) {
    auto p = std::filesystem::temp_directory_path() / ("kirchhoff_cli_" + std::string(name));
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST(Cli, ThresholdsJson) {
    const auto r = run("thresholds --dim 5 --p 2.9 --a 0.1 --b 0.01");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("regime"), "mass_supercritical");
    EXPECT_TRUE(j.at("existence_condition").at("holds").get<bool>());
    EXPECT_LT(j.at("c0").get<double>(), j.at("c1_lower").get<double>());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("thresholds --dim 3 --p 2.9 --a 0.1 --b 0.01").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("solve --dim 5 --p 2.9 --a 0.1 --b 0.01 --c -1").code, 2);
    EXPECT_EQ(run("--format xml thresholds --dim 5 --p 2.9 --a 0.1 --b 0.01").code, 2);
    EXPECT_EQ(run("--out /proc/kirchhoff_none thresholds --dim 5 --p 2.9 --a 0.1 --b 0.01").code, 3);
    EXPECT_EQ(run("--config /nonexistent/cfg.json thresholds --dim 5 --p 2.9 --a 0.1 --b 0.01").code, 3);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, MoserCsv) {
    const auto dir = scratch("moser");
    const auto r = run("--out " + dir.string() + " --format csv moser --n-list 100,1000");
    ASSERT_EQ(r.code, 0);
    std::ifstream in(dir / "moser.csv");
    ASSERT_TRUE(in);
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, "n,max_g,argmax_t,bound,margin");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 2);
    std::filesystem::remove_all(dir);
}

TEST(Cli, ConfigOverriddenByFlags) {
    const auto dir = scratch("config");
    std::filesystem::create_directories(dir);
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"thresholds": {"dim": 5, "p": 2.9, "a": 0.1, "b": 0.01}})";
    }
    const auto from_cfg = run("--config " + (dir / "cfg.json").string() + " thresholds");
    ASSERT_EQ(from_cfg.code, 0);
    EXPECT_EQ(nlohmann::json::parse(from_cfg.out).at("a"), 0.1);
    const auto flagged = run("--config " + (dir / "cfg.json").string() + " thresholds --a 0.2");
    ASSERT_EQ(flagged.code, 0);
    const auto j = nlohmann::json::parse(flagged.out);
    EXPECT_EQ(j.at("a"), 0.2);
    EXPECT_EQ(j.at("b"), 0.01);
    std::filesystem::remove_all(dir);
}

TEST(Cli, SweepCsvDeterministic) {
    const std::string args = "--format csv --seed 3 sweep --dim 5 --p 2.9 --a 0.1 --b 0.01 --c 8";
    const auto r1 = run(args), r2 = run("--jobs 2 " + args);
    ASSERT_EQ(r1.code, 0);
    EXPECT_EQ(r1.out, r2.out);
    std::istringstream is(r1.out);
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    EXPECT_EQ(header.substr(0, 10), "N,p,a,b,c,");
    EXPECT_NE(row.find("ground_state"), std::string::npos) << row;
}

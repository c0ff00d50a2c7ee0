#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "bomberfp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = bomber::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("bomberfp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string sub(const std::string& name) const { return (dir_ / name).string(); }
    fs::path dir_;
};

std::vector<std::string> csv_lines(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    return lines;
}

}  // namespace

TEST_F(CliTest, SolveWritesDeterministicFiles) {
    const std::vector<std::string> base{"solve",  "--model",   "bomber", "--ammo",   "bomber:u=0.2",
                                        "--grid", "3x3:21x21", "--scaling", "both", "--policy"};
    auto a = base;
    a.insert(a.end(), {"--out", sub("a")});
    auto b = base;
    b.insert(b.end(), {"--out", sub("b")});
    ASSERT_EQ(run_cli(a).code, 0);
    ASSERT_EQ(run_cli(b).code, 0);
    for (const char* f : {"value_raw.csv", "value_rescaled.csv", "policy.csv", "solve_report.json"}) {
        ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    }
    const auto lines = csv_lines(dir_ / "a" / "value_raw.csv");
    EXPECT_EQ(lines.front(), "x,t,value");
    EXPECT_EQ(lines.size(), 1u + 21u * 21u);
    const auto report = bomber::Json::parse(slurp(dir_ / "a" / "solve_report.json"));
    EXPECT_EQ(report["command"], "solve");
    EXPECT_TRUE(report["report"]["converged"].get<bool>());
    EXPECT_LT(report["report"]["sandwich_gap"].get<double>(), 1e-8);
}

TEST_F(CliTest, FuAtZeroMatchesFrail) {
    ASSERT_EQ(run_cli({"solve", "--model", "fu:u=0", "--ammo", "fighter", "--grid", "3x3:21x21", "--out", sub("fu")})
                  .code,
              0);
    ASSERT_EQ(run_cli({"solve", "--model", "frail", "--ammo", "fighter", "--grid", "3x3:21x21", "--out", sub("f0")})
                  .code,
              0);
    const auto fu = csv_lines(dir_ / "fu" / "value_raw.csv");
    const auto f0 = csv_lines(dir_ / "f0" / "value_raw.csv");
    ASSERT_EQ(fu.size(), f0.size());
    for (std::size_t k = 1; k < fu.size(); ++k) {
        const double a = std::stod(fu[k].substr(fu[k].rfind(',') + 1));
        const double b = std::stod(f0[k].substr(f0[k].rfind(',') + 1));
        EXPECT_NEAR(a, b, 1e-13);
    }
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli({"solve", "--ammo", "bomber:u=1.5", "--grid", "3x3:11x11", "--out", sub("x")}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--ammo", "bomber:u=0", "--grid", "3x3:1x11", "--out", sub("x")}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--ammo", "bomber:u=0", "--grid", "3x3", "--out", sub("x")}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--model", "tank", "--ammo", "fighter", "--grid", "3x3:11x11"}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--ammo", "fighter"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--ammo", "fighter", "--grid", "3x3:11x11", "--init", "random"}).code, 2);
    EXPECT_EQ(run_cli({"solve", "--ammo", "fighter", "--grid", "3x3:3000x3000"}).code, 2);
    EXPECT_EQ(run_cli({"simulate", "--ammo", "fighter", "--model", "frail", "--grid", "3x3:11x11", "--x0", "0.15",
                       "--t0", "1", "--out", sub("x")})
                  .code,
              2);
}

TEST_F(CliTest, HelpAndVersionExitZero) {
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    const auto v = run_cli({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find(bomber::cli::kVersion), std::string::npos);
}

TEST_F(CliTest, UnwritableOutputExitsThree) {
    fs::create_directories(dir_);
    std::ofstream(dir_ / "file") << "x";
    EXPECT_EQ(run_cli({"solve", "--ammo", "fighter", "--grid", "3x3:11x11", "--out", sub("file")}).code, 3);
}

TEST_F(CliTest, IterationCapExitsOne) {
    EXPECT_EQ(run_cli({"solve", "--ammo", "bomber:u=0", "--grid", "3x3:11x11", "--max-iter", "1", "--out", sub("c")})
                  .code,
              1);
    EXPECT_TRUE(fs::exists(dir_ / "c" / "solve_report.json"));
}

TEST_F(CliTest, CheckBomberPasses) {
    const auto r = run_cli({"check", "--model", "bomber", "--ammo", "bomber:u=0", "--grid", "4x4:41x41",
                            "--property-trials", "20", "--out", sub("chk")});
    EXPECT_EQ(r.code, 0) << r.out;
    const auto j = bomber::Json::parse(slurp(dir_ / "chk" / "check_report.json"));
    EXPECT_TRUE(j["holds"].get<bool>());
    EXPECT_GE(j["checks"].size(), 6u);
    EXPECT_TRUE(fs::exists(dir_ / "chk" / "policy.csv"));
}

TEST_F(CliTest, SimulateReportsDpValue) {
    const auto r = run_cli({"simulate", "--model", "bomber", "--ammo", "bomber:u=0", "--grid", "3x3:31x31", "--x0",
                            "2", "--t0", "2", "--paths", "2000", "--seed", "4", "--out", sub("sim")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = bomber::Json::parse(slurp(dir_ / "sim" / "simulate_report.json"));
    const double est = j["result"]["estimate"].get<double>();
    const double se = j["result"]["std_err"].get<double>();
    EXPECT_EQ(j["result"]["n_paths"].get<std::size_t>(), 2000u);
    EXPECT_LE(std::abs(est - j["dp_value"].get<double>()), 5 * se + 0.01);
}

TEST_F(CliTest, TraceRowsMatchClosedForm) {
    const auto r = run_cli({"trace", "--model", "bomber", "--ammo", "bomber:u=0", "--grid", "4x4:21x21",
                            "--iterates", "3", "--surfaces", "2", "--out", sub("tr")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = csv_lines(dir_ / "tr" / "trace_line.csv");
    EXPECT_EQ(lines.front(), "m,x,t,log_value");
    ASSERT_EQ(lines.size(), 1u + 3u * 21u);
    const auto a = bomber::AmmoFunction::bomber(0.0);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        std::istringstream row(lines[k]);
        std::string m, x, t, lv;
        std::getline(row, m, ',');
        std::getline(row, x, ',');
        std::getline(row, t, ',');
        std::getline(row, lv, ',');
        if (m == "1") {
            EXPECT_EQ(std::stod(lv), 0.0);
        }
        if (m == "2") {
            EXPECT_NEAR(std::stod(lv), std::log(std::stod(t) * a(std::stod(x)) + 1.0), 1e-13);
        }
    }
    EXPECT_EQ(csv_lines(dir_ / "tr" / "trace_surface.csv").size(), 1u + 2u * 21u * 21u);
    const auto j = bomber::Json::parse(slurp(dir_ / "tr" / "trace_report.json"));
    EXPECT_EQ(j["iterates"].size(), 3u);
    EXPECT_TRUE(j.contains("all_logconcave_in_x"));
}

TEST(CliGrid, Parse) {
    const auto g = bomber::cli::parse_grid("10x5:201x101");
    EXPECT_EQ(g, (bomber::GridSpec{10.0, 5.0, 201, 101}));
    EXPECT_THROW(bomber::cli::parse_grid("10x5:201"), bomber::UsageError);
    EXPECT_THROW(bomber::cli::parse_grid("10x5:201xk"), bomber::UsageError);
    EXPECT_THROW(bomber::cli::parse_grid("-1x5:3x3"), bomber::UsageError);
}

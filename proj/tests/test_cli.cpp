#include "commands.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "nutrans");
    std::ostringstream out, err;
    const int code = nutrans::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        v.push_back(l);
    return v;
}

std::vector<double> fields(const std::string& line)
{
    std::vector<double> v;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');)
        v.push_back(f.empty() ? -1.0 : std::stod(f));
    return v;
}

} // namespace

TEST(Cli, FeasibilityExitCodes)
{
    const auto ok = run({"feasibility", "--d", "2", "--p", "1.2", "--r", "1.5"});
    EXPECT_EQ(ok.code, 0);
    const auto j = nlohmann::json::parse(ok.out);
    EXPECT_TRUE(j.at("feasible").get<bool>());
    EXPECT_NEAR(j.at("margin").get<double>(), 1.0 / 6.0, 1e-12);
    EXPECT_EQ(run({"feasibility", "--d", "2", "--p", "2", "--r", "2"}).code, 2);
}

TEST(Cli, NormSeriesCsvLayout)
{
    const auto r = run({"norm-series", "--mode", "lr", "--depth", "3", "--times", "9", "--grid", "32"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.front(), "t,norm_exact,norm_grid,mass,w1p,depth");
    ASSERT_EQ(ls.size(), 10u);
    double last_t = -1.0;
    for (std::size_t j = 1; j < ls.size(); ++j) {
        const auto f = fields(ls[j]);
        ASSERT_EQ(f.size(), 6u);
        EXPECT_GT(f[0], last_t);
        last_t = f[0];
        EXPECT_GE(f[1], 1.0 - 1e-12); // L^r norm of a unit-mass density on the unit cube
        EXPECT_GT(f[2], 0.0);
        EXPECT_EQ(f[3], 1.0);
        EXPECT_GE(f[4], 0.0);
    }
}

TEST(Cli, NormSeriesGridZeroLeavesColumnEmpty)
{
    const auto r = run({"norm-series", "--mode", "l1", "--depth", "4", "--times", "5", "--grid", "0"});
    ASSERT_EQ(r.code, 0);
    for (std::size_t j = 1; j < lines(r.out).size(); ++j)
        EXPECT_EQ(fields(lines(r.out)[j])[2], -1.0);
}

TEST(Cli, BlockVelocityOnlyInMiddleThird)
{
    const auto r = run({"norm-series", "--mode", "block", "--times", "31", "--grid", "0"});
    ASSERT_EQ(r.code, 0);
    int moving = 0;
    for (std::size_t j = 1; j < lines(r.out).size(); ++j) {
        const auto f = fields(lines(r.out)[j]);
        if (f[0] < 1.0 / 3.0 || f[0] > 2.0 / 3.0)
            EXPECT_EQ(f[4], 0.0) << "t=" << f[0];
        else if (f[4] > 0.0)
            ++moving;
    }
    EXPECT_GT(moving, 0);
}

TEST(Cli, DeterministicAcrossWorkerCounts)
{
    const std::vector<std::string> args{"norm-series", "--mode", "lr", "--depth", "4", "--times", "17", "--grid", "16"};
    ::setenv("NUTRANS_WORKERS", "1", 1);
    const auto a = run(args);
    const auto b = run(args);
    ::setenv("NUTRANS_WORKERS", "4", 1);
    const auto c = run(args);
    ::unsetenv("NUTRANS_WORKERS");
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
}

TEST(Cli, SnapshotPgmHeaderAndSize)
{
    const auto r = run({"snapshot", "--mode", "lr", "--t", "0.3", "--grid", "64"});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string head = "P5\n64 64\n255\n";
    ASSERT_EQ(r.out.substr(0, head.size()), head);
    EXPECT_EQ(r.out.size(), head.size() + 64u * 64u);
}

TEST(Cli, SnapshotAtOneIsUniform)
{
    const auto r = run({"snapshot", "--mode", "l1", "--t", "1", "--grid", "16", "--format", "csv"});
    ASSERT_EQ(r.code, 0);
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 1u + 16u * 16u);
    for (std::size_t j = 1; j < ls.size(); ++j)
        EXPECT_EQ(fields(ls[j]).back(), 1.0);
}

TEST(Cli, SnapshotPgmNeedsTwoDimensions)
{
    const auto r = run({"snapshot", "--d", "3", "--format", "pgm", "--grid", "8"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, VerifyContractionPasses)
{
    const auto r = run({"verify", "contraction"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("checks passed"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, VerifyJsonListsChecks)
{
    const auto r = run({"verify", "selfsimilar", "--times", "50", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_TRUE(j.contains("checks"));
    EXPECT_GT(j["checks"].size(), 0u);
}

TEST(Cli, UnknownSuiteAndBadArguments)
{
    EXPECT_EQ(run({"verify", "nonsense"}).code, 1);
    EXPECT_EQ(run({"norm-series", "--d", "5"}).code, 1);
    EXPECT_EQ(run({"eval", "--x", "0.1"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
}

TEST(Cli, EvalReportsFieldAndTrace)
{
    const auto r = run({"eval", "--mode", "lr", "--t", "0.02", "--x", "-0.37,-0.37"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    for (const char* key : {"velocity", "jacobian", "divergence", "density", "phase_trace"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["velocity"].size(), 2u);
    EXPECT_LE(std::abs(j["divergence"].get<double>()), 1e-10);
    EXPECT_GT(j["phase_trace"].size(), 0u);
}

#ifdef NUTRANS_CLI_PATH
TEST(Cli, BinaryRunsFeasibility)
{
    const std::string cmd = std::string(NUTRANS_CLI_PATH) + " feasibility --d 2 --p 2 --r 2 > /dev/null";
    const int status = std::system(cmd.c_str());
    ASSERT_NE(status, -1);
    EXPECT_EQ(WEXITSTATUS(status), 2);
}
#endif

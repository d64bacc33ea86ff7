#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "w3sim/cli.hpp"

using w3sim::run_cli;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--type", "13"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--type", "2", "--tuple", "A1,B1,C1"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--tuple", "A9,B1,C1"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--format", "xml"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--scenario", "/nonexistent/script.txt"}).code, 2);
    EXPECT_EQ(cli({"encode", "--to", "base58", "--from", "base58", "00"}).code, 2);
    EXPECT_EQ(cli({"encode", "--to", "base58", "xyz"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
    auto r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, EncodeVectors) {
    EXPECT_EQ(cli({"encode", "--to", "base58", ""}).out, "\n");
    EXPECT_EQ(cli({"encode", "--to", "base58", "00"}).out, "1\n");
    EXPECT_EQ(cli({"encode", "--to", "base58", "000001"}).out, "112\n");
    EXPECT_EQ(cli({"encode", "--from", "base58", "112"}).out, "0x000001\n");
    EXPECT_EQ(cli({"encode", "--to", "base16", "0xABcd"}).out, "0xabcd\n");
}

TEST(Cli, SimulateJsonCarriesSeedAndType) {
    auto r = cli({"simulate", "--tuple", "A2,B1,C3", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\"type\": 9"), std::string::npos);
    EXPECT_NE(r.out.find("\"seed\": 7"), std::string::npos);
    EXPECT_EQ(r.out, cli({"simulate", "--tuple", "A2,B1,C3", "--seed", "7"}).out);
}

TEST(Cli, EnvSeedOnlyReplacesDefault) {
    ::setenv("W3SIM_SEED", "11", 1);
    auto env = cli({"simulate", "--type", "1"});
    auto explicit_seed = cli({"simulate", "--type", "1", "--seed", "3"});
    ::unsetenv("W3SIM_SEED");
    EXPECT_NE(env.out.find("\"seed\": 11"), std::string::npos);
    EXPECT_NE(explicit_seed.out.find("\"seed\": 3"), std::string::npos);
}

TEST(Cli, InfeasibleScenarioIsReportedNotFatal) {
    auto r = cli({"simulate", "--type", "1", "--scenario", W3SIM_SOURCE_DIR "/scenarios/large_media.txt"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("ScenarioInfeasible"), std::string::npos);
}

TEST(Cli, DemoPrintsPhases) {
    auto r = cli({"demo"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Π5"), std::string::npos);
}

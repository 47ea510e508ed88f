#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geoflow/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = geoflow::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

geoflow::Json json_of(const Invocation& r) { return geoflow::Json::parse(r.out); }

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("geoflow_test_" + name); }

}  // namespace

TEST(Cli, IntegrateReportShape) {
  const Invocation r = invoke({"integrate", "--scenario", "sphere", "--t-max", "2", "--samples", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["command"], "integrate");
  EXPECT_EQ(j["scenario"], "sphere");
  EXPECT_EQ(j["verdict"], "ok");
  for (const char* key : {"epsilon", "delta", "t_max", "samples", "result", "config"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["config"]["t_max"], "2");
  EXPECT_NE(r.err.find("integrate sphere: ok"), std::string::npos);
}

TEST(Cli, SameSeedSameBytes) {
  const std::vector<std::string> args{"analyze", "distal", "--scenario", "flat_torus", "--samples", "4", "--t-max", "20"};
  const Invocation a = invoke(args), b = invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto other = args;
  other.insert(other.end(), {"--seed", "7"});
  EXPECT_NE(invoke(other).out, a.out);
}

TEST(Cli, FlagsBeatSetWhichBeatsConfigFile) {
  const fs::path cfg = temp_file("precedence.cfg");
  std::ofstream(cfg) << "t_max = 3\nseed = 5\nsamples = 7\n";
  const Invocation r = invoke({"integrate", "--config", cfg.string(), "--set", "t_max=4", "--set", "samples=9", "--samples",
                     "11"});
  fs::remove(cfg);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto c = json_of(r)["config"];
  EXPECT_EQ(c["seed"], "5");
  EXPECT_EQ(c["t_max"], "4");
  EXPECT_EQ(c["samples"], "11");
}

TEST(Cli, ExitCodes) {
  Invocation r = invoke({"integrate", "--expect", "escaped", "--t-max", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("expected verdict 'escaped'"), std::string::npos);
  EXPECT_EQ(invoke({"integrate", "--expect", "ok", "--t-max", "1"}).code, 0);

  r = invoke({"integrate", "--set", "bogus=1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("geoflow: [config] unknown key 'bogus'"), std::string::npos) << r.err;

  r = invoke({"integrate", "--scenario", "nope"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("[scenarios]"), std::string::npos) << r.err;

  r = invoke({"integrate", "--t-max", "soon"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("field 't_max'"), std::string::npos) << r.err;

  r = invoke({"oracle-check", "--scenario", "ellipsoid"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("[cli]"), std::string::npos) << r.err;

  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"analyze", "sideways"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, OutFileAndCsv) {
  const fs::path out = temp_file("section.csv");
  const Invocation r = invoke({"section", "--scenario", "flat_torus", "--samples", "3", "--format", "csv", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("section flat_torus: ok"), std::string::npos);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "s,theta,s_next,theta_next,return_time");
  in.close();
  fs::remove(out);
}

TEST(Cli, AnalyzeVerdicts) {
  Invocation r = invoke({"analyze", "equicont", "--scenario", "sphere", "--samples", "10", "--t-max", "10", "--set",
               "levels=3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json_of(r)["verdict"], "satisfied");
  EXPECT_TRUE(json_of(r)["delta"].is_number());

  r = invoke({"census", "--scenario", "sphere", "--samples", "20", "--set", "grid_theta=11", "--set", "iterate=1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json_of(r)["verdict"], "isolated");

  r = invoke({"oracle-check", "--scenario", "plane_exp", "--samples", "5", "--t-max", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json_of(r)["verdict"], "pass");
}

TEST(Cli, Binary) {
  const fs::path out = temp_file("binary.json");
  const std::string cmd = std::string(GEOFLOW_CLI) + " integrate --scenario zoll --t-max 1 --samples 3 --out " +
                          out.string() + " > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream in(out);
  const auto j = geoflow::Json::parse(in);
  EXPECT_EQ(j["scenario"], "zoll");
  fs::remove(out);
  EXPECT_NE(std::system((std::string(GEOFLOW_CLI) + " integrate --scenario nope 2> /dev/null").c_str()), 0);
}

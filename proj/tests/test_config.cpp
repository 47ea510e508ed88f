#include <gtest/gtest.h>

#include <functional>
#include <sstream>

#include "geoflow/config.hpp"

using namespace geoflow;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ParseConfig, KeysValuesAndComments) {
  std::istringstream in("# header\n  scenario = zoll  \n\nt_max=12.5 # trailing\n");
  const auto kv = parse_config(in, "run.cfg");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"scenario", "zoll"}));
  EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"t_max", "12.5"}));
}

TEST(ParseConfig, MalformedLineNamesOriginAndLine) {
  std::istringstream in("seed = 3\njust words\n");
  const std::string msg = error_of([&] { parse_config(in, "run.cfg"); });
  EXPECT_NE(msg.find("run.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(error_of([] { load_config_file("/nonexistent/geoflow.cfg"); }).find("cannot read"), std::string::npos);
}

TEST(Settings, DefaultsCoverEveryKey) {
  const Settings cfg(command_defaults("integrate"));
  for (const auto& spec : setting_specs()) EXPECT_TRUE(cfg.values().count(spec.key)) << spec.key;
  EXPECT_EQ(cfg.number("t_max"), 10.0);
  EXPECT_EQ(cfg.integer("samples"), 201);
  EXPECT_EQ(Settings(command_defaults("census")).integer("samples"), 200);
}

TEST(Settings, UnknownKeyIsRejected) {
  Settings cfg(command_defaults("section"));
  const std::string msg = error_of([&] { cfg.set("radiu", "2"); });
  EXPECT_NE(msg.find("unknown key 'radiu'"), std::string::npos) << msg;
}

TEST(Settings, BadValuesNameTheField) {
  Settings cfg(command_defaults("integrate"));
  cfg.set("t_max", "ten");
  EXPECT_NE(error_of([&] { cfg.number("t_max"); }).find("field 't_max'"), std::string::npos);
  cfg.set("samples", "2.5");
  EXPECT_NE(error_of([&] { cfg.integer("samples"); }).find("integer"), std::string::npos);
  cfg.set("samples", "0");
  EXPECT_THROW(cfg.count("samples"), ConfigError);
  cfg.set("tol", "-1");
  EXPECT_THROW(cfg.positive("tol"), ConfigError);
  cfg.set("pointwise", "maybe");
  EXPECT_THROW(cfg.flag("pointwise"), ConfigError);
  EXPECT_TRUE(cfg.is_explicit("tol"));
  EXPECT_FALSE(cfg.is_explicit("seed"));
}

TEST(Settings, ListsAndChoices) {
  Settings cfg(command_defaults("integrate"));
  cfg.set("semi_axes", "1, 2,3");
  EXPECT_EQ(cfg.list("semi_axes", 3), (std::vector<double>{1.0, 2.0, 3.0}));
  cfg.set("semi_axes", "1,2");
  EXPECT_THROW(cfg.list("semi_axes", 3), ConfigError);
  cfg.set("format", "csv");
  EXPECT_EQ(cfg.choice("format", {"json", "csv"}), "csv");
  cfg.set("format", "xml");
  EXPECT_NE(error_of([&] { cfg.choice("format", {"json", "csv"}); }).find("json, csv"), std::string::npos);
}

TEST(Settings, ScenarioParameters) {
  Settings cfg(command_defaults("integrate"));
  cfg.set("radius", "2.5");
  cfg.set("torus_periods", "1,3");
  const ScenarioParams p = cfg.scenario_params();
  EXPECT_EQ(p.radius, 2.5);
  EXPECT_EQ(p.torus_periods[1], 3.0);
}

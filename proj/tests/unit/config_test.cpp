#include <gtest/gtest.h>

#include "ownrecon/config_json.hpp"

using namespace ownrecon;

namespace {

std::string config_error(const Json& j) {
  try {
    model_config_from_json(StrictObject(j, "model"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ModelJson, RoundTrip) {
  ModelConfig c;
  c.groups = 3;
  c.unit.ssm.d_state = 8;
  c.unit.direction = ScanDirection::reverse;
  c.switches.output_outlet = false;
  c.residual = ResidualMode::per_group;
  c.dc = DcMode::soft_weighted(0.5);
  c.seed = 77;
  const ModelConfig back = model_config_from_json(StrictObject(to_json(c), "model"));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_TRUE(back.same_architecture(c));
}

TEST(ModelJson, DefaultsFromEmptyObject) {
  const ModelConfig c = model_config_from_json(StrictObject(Json::object(), ""));
  EXPECT_EQ(c.total_units(), 12);
  EXPECT_EQ(c.unit.ssm.chunk, 16);
  EXPECT_EQ(c.switches, AblationSwitches{});
}

TEST(ModelJson, UnknownKeysNameTheFullPath) {
  EXPECT_NE(config_error({{"grups", 3}}).find("'model.grups'"), std::string::npos);
  EXPECT_NE(config_error({{"switches", {{"stat_access", false}}}}).find("'model.switches.stat_access'"),
            std::string::npos);
  EXPECT_NE(config_error({{"ssm", {{"d_state", "big"}}}}).find("'model.ssm.d_state'"), std::string::npos);
  EXPECT_NE(config_error({{"residual", "sideways"}}).find("'model.residual'"), std::string::npos);
}

TEST(ModelJson, SemanticErrors) {
  EXPECT_FALSE(config_error({{"switches", {{"use_sor", false}}}}).empty());
  EXPECT_FALSE(config_error({{"ssm", {{"rank", 3}}}}).empty());
  EXPECT_FALSE(config_error({{"groups", 0}}).empty());
}

TEST(MaskJson, RoundTripKeepsOptionals) {
  MaskSpec s;
  s.kind = MaskKind::radial;
  s.spokes = 12;
  const MaskSpec back = mask_spec_from_json(StrictObject(to_json(s), "mask"));
  EXPECT_EQ(back.spokes, 12);
  EXPECT_FALSE(back.center_fraction.has_value());
  EXPECT_THROW(mask_spec_from_json(StrictObject({{"kind", "spiral"}}, "mask")), ConfigError);
}

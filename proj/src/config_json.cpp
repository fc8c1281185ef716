#include "ownrecon/config_json.hpp"

#include <algorithm>

namespace ownrecon {

StrictObject::StrictObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (j_.is_null()) j_ = Json::object();
  if (!j_.is_object()) throw ConfigError("'" + (path_.empty() ? std::string("<root>") : path_) + "' must be an object");
}

StrictObject StrictObject::object(const std::string& key) {
  seen_.push_back(key);
  return StrictObject(j_.contains(key) ? j_.at(key) : Json::object(), child_path(key));
}

void StrictObject::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
      throw ConfigError("unknown key '" + child_path(key) + "'");
  }
}

Json to_json(const SsmConfig& cfg) {
  return {{"d_model", cfg.d_model}, {"d_state", cfg.d_state},   {"d_head", cfg.d_head},
          {"rank", cfg.rank},       {"chunk", cfg.chunk},       {"expand", cfg.expand},
          {"alpha_mu", cfg.alpha_mu}, {"alpha_nu", cfg.alpha_nu}};
}

SsmConfig ssm_config_from_json(StrictObject obj) {
  SsmConfig d;
  SsmConfig c;
  c.d_model = obj.get<Index>("d_model", d.d_model);
  c.d_state = obj.get<Index>("d_state", d.d_state);
  c.d_head = obj.get<Index>("d_head", d.d_head);
  c.rank = obj.get<Index>("rank", d.rank);
  c.chunk = obj.get<Index>("chunk", d.chunk);
  c.expand = obj.get<Index>("expand", d.expand);
  c.alpha_mu = obj.get<double>("alpha_mu", d.alpha_mu);
  c.alpha_nu = obj.get<double>("alpha_nu", d.alpha_nu);
  obj.finish();
  validate(c);
  return c;
}

Json to_json(const AblationSwitches& sw) {
  return {{"use_sor", sw.use_sor},
          {"content_residency_violation", sw.content_residency_violation},
          {"state_access", sw.state_access},
          {"output_outlet", sw.output_outlet},
          {"tie_a_delta", sw.tie_a_delta},
          {"tie_b_c", sw.tie_b_c}};
}

AblationSwitches switches_from_json(StrictObject obj) {
  AblationSwitches sw;
  sw.use_sor = obj.get<bool>("use_sor", sw.use_sor);
  sw.content_residency_violation = obj.get<bool>("content_residency_violation", sw.content_residency_violation);
  sw.state_access = obj.get<bool>("state_access", sw.state_access);
  sw.output_outlet = obj.get<bool>("output_outlet", sw.output_outlet);
  sw.tie_a_delta = obj.get<bool>("tie_a_delta", sw.tie_a_delta);
  sw.tie_b_c = obj.get<bool>("tie_b_c", sw.tie_b_c);
  obj.finish();
  validate(sw);
  return sw;
}

Json to_json(const ModelConfig& cfg) {
  return {{"groups", cfg.groups},
          {"units_per_group", cfg.units_per_group},
          {"ssm", to_json(cfg.unit.ssm)},
          {"direction", cfg.unit.direction == ScanDirection::forward ? "forward" : "reverse"},
          {"switches", to_json(cfg.switches)},
          {"residual", cfg.residual == ResidualMode::per_unit ? "per_unit" : "per_group"},
          {"dc_mode", cfg.dc.soft ? "soft" : "hard"},
          {"dc_weight", cfg.dc.weight},
          {"dc_per_unit", cfg.dc_per_unit},
          {"share_weights", cfg.share_weights},
          {"image_channels", cfg.image_channels},
          {"seed", cfg.seed}};
}

ModelConfig model_config_from_json(StrictObject obj) {
  ModelConfig c;
  c.groups = obj.get<Index>("groups", c.groups);
  c.units_per_group = obj.get<Index>("units_per_group", c.units_per_group);
  c.unit.ssm = ssm_config_from_json(obj.object("ssm"));
  const auto direction = obj.get<std::string>("direction", "forward");
  if (direction == "forward")
    c.unit.direction = ScanDirection::forward;
  else if (direction == "reverse")
    c.unit.direction = ScanDirection::reverse;
  else
    throw ConfigError("'" + obj.child_path("direction") + "' must be forward or reverse");
  c.switches = switches_from_json(obj.object("switches"));
  const auto residual = obj.get<std::string>("residual", "per_unit");
  if (residual == "per_unit")
    c.residual = ResidualMode::per_unit;
  else if (residual == "per_group")
    c.residual = ResidualMode::per_group;
  else
    throw ConfigError("'" + obj.child_path("residual") + "' must be per_unit or per_group");
  const auto dc = obj.get<std::string>("dc_mode", "hard");
  const auto dc_weight = obj.get<double>("dc_weight", 0.0);
  if (dc == "hard")
    c.dc = DcMode::hard();
  else if (dc == "soft")
    c.dc = DcMode::soft_weighted(dc_weight);
  else
    throw ConfigError("'" + obj.child_path("dc_mode") + "' must be hard or soft");
  c.dc_per_unit = obj.get<bool>("dc_per_unit", c.dc_per_unit);
  c.share_weights = obj.get<bool>("share_weights", c.share_weights);
  c.image_channels = obj.get<Index>("image_channels", c.image_channels);
  c.seed = obj.get<std::uint64_t>("seed", c.seed);
  obj.finish();
  validate(c);
  return c;
}

Json to_json(const MaskSpec& spec) {
  Json j{{"kind", to_string(spec.kind)},
         {"height", spec.height},
         {"width", spec.width},
         {"acceleration", spec.acceleration},
         {"seed", spec.seed}};
  if (spec.center_fraction) j["center_fraction"] = *spec.center_fraction;
  if (spec.spokes) j["spokes"] = *spec.spokes;
  return j;
}

MaskSpec mask_spec_from_json(StrictObject obj) {
  MaskSpec s;
  s.kind = parse_mask_kind(obj.get<std::string>("kind", "equispaced"));
  s.height = obj.get<Index>("height", s.height);
  s.width = obj.get<Index>("width", s.width);
  s.acceleration = obj.get<double>("acceleration", s.acceleration);
  s.center_fraction = obj.optional<double>("center_fraction");
  s.spokes = obj.optional<int>("spokes");
  s.seed = obj.get<std::uint64_t>("seed", s.seed);
  obj.finish();
  return s;
}

}  // namespace ownrecon

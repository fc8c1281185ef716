#include "ownrecon/so_unit.hpp"

#include <optional>

namespace ownrecon {

void validate(const AblationSwitches& sw) {
  if (!sw.use_sor && (sw.content_residency_violation || sw.state_access || sw.output_outlet))
    throw ConfigError("evidence routes (residency violation, state access, output outlet) require the router");
}

Eigen::MatrixXd tokenize(const FeatureMap& map) { return map.data.transpose(); }

FeatureMap detokenize(const Eigen::MatrixXd& tokens, Index height, Index width) {
  if (tokens.rows() != height * width)
    throw ShapeError("token count " + std::to_string(tokens.rows()) + " != " + std::to_string(height) + "x" +
                     std::to_string(width));
  FeatureMap out(tokens.cols(), height, width);
  out.data = tokens.transpose();
  return out;
}

Eigen::MatrixXd content_tokens(const OwnershipStreams& streams, const UnitWeights& w, const AblationSwitches& sw) {
  validate(sw);
  if (!sw.use_sor) throw ConfigError("stream-based content tokens require the router switch");
  if (sw.content_residency_violation)
    return apply_rows(w.violation_proj, tokenize(concat_channels(streams.carrier, streams.evidence)));
  return apply_rows(w.in_proj, tokenize(streams.carrier));
}

Eigen::MatrixXd content_tokens(const FeatureMap& x, const UnitWeights& w, const AblationSwitches& sw) {
  validate(sw);
  if (!sw.use_sor) return apply_rows(w.bypass_proj, tokenize(x));
  return content_tokens(route(x, w.router), w, sw);
}

FeatureMap nsr_gate(const FeatureMap& g, const NsrWeights& w) {
  FeatureMap gate = apply(w.gate, g);
  gate.data = sigmoid(gate.data);
  return gate;
}

FeatureMap nsr(const FeatureMap& g, const NsrWeights& w) {
  FeatureMap local = apply(w.local, g);
  local.data = silu(local.data);
  FeatureMap out = apply(w.mix, local);
  out.data.array() *= nsr_gate(g, w).data.array();
  return out;
}

namespace {

template <typename M>
M reversed_rows(const M& m) {
  return m.colwise().reverse();
}

UnitOutput finish_unit(const Eigen::MatrixXd& u, const OwnershipStreams* streams, const UnitWeights& w,
                       const AblationSwitches& sw, const UnitConfig& cfg, Index height, Index width,
                       bool capture_probe) {
  const SsmConfig& ssm = cfg.ssm;
  const ParamTying tying{sw.tie_a_delta, sw.tie_b_c};
  SsmParams params = generate_ssm_params(u, w.scan, ssm, tying);
  if (sw.state_access) params = modulate_interfaces(params, tokenize(streams->evidence), w.modulation, ssm);

  RowMatrix<double> content = u;
  if (cfg.direction == ScanDirection::reverse) {
    content = reversed_rows(content);
    params.delta = reversed_rows(params.delta);
    params.lambda = reversed_rows(params.lambda);
    params.b = reversed_rows(params.b);
    params.c = reversed_rows(params.c);
    params.b_mod = reversed_rows(params.b_mod);
    params.c_mod = reversed_rows(params.c_mod);
  }
  ScanOutput scan = selective_scan_chunked(content, params, ssm, capture_probe);
  if (cfg.direction == ScanDirection::reverse) {
    scan.readout = reversed_rows(scan.readout);
    if (capture_probe) scan.states = reversed_rows(scan.states);
  }

  const Index half = cfg.evidence_channels();
  FeatureMap readout = detokenize(scan.readout, height, width);
  FeatureMap outlet = sw.output_outlet ? nsr(streams->evidence, w.nsr) : FeatureMap(half, height, width);

  UnitOutput out;
  out.y = apply(w.merge, concat_channels(readout, outlet));
  if (capture_probe) {
    out.probe.hidden_grid = detokenize(scan.states, height, width).cast<float>();
    out.probe.readout_grid = readout.cast<float>();
  }
  return out;
}

}  // namespace

UnitOutput so_unit_forward(const OwnershipStreams& streams, const UnitWeights& w, const AblationSwitches& sw,
                           const UnitConfig& cfg, bool capture_probe) {
  const Eigen::MatrixXd u = content_tokens(streams, w, sw);
  return finish_unit(u, &streams, w, sw, cfg, streams.carrier.height, streams.carrier.width, capture_probe);
}

UnitOutput so_unit_forward(const FeatureMap& x, const UnitWeights& w, const AblationSwitches& sw,
                           const UnitConfig& cfg, bool capture_probe) {
  validate(sw);
  validate(cfg.ssm);
  if (x.channels != cfg.ssm.d_model)
    throw ShapeError("unit expects " + std::to_string(cfg.ssm.d_model) + " feature channels, got " +
                     std::to_string(x.channels));
  if (!sw.use_sor)
    return finish_unit(content_tokens(x, w, sw), nullptr, w, sw, cfg, x.height, x.width, capture_probe);
  const OwnershipStreams streams = route(x, w.router);
  return so_unit_forward(streams, w, sw, cfg, capture_probe);
}

}  // namespace ownrecon

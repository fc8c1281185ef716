#pragma once

#include "ownrecon/field.hpp"
#include "ownrecon/layers.hpp"
#include "ownrecon/sor_router.hpp"
#include "ownrecon/ssm.hpp"

namespace ownrecon {

/// Which evidence routes a unit wires up. The default is the full ownership
/// layout: carrier-only tokens, B/C access and the NSR outlet for G.
struct AblationSwitches {
  bool use_sor = true;
  bool content_residency_violation = false;  // tokens from [L; G] instead of L
  bool state_access = true;                  // G modulates B/C
  bool output_outlet = true;                 // NSR(G) reaches the merge
  bool tie_a_delta = false;
  bool tie_b_c = false;

  bool operator==(const AblationSwitches&) const = default;
};

/// Throws ConfigError for combinations that have no meaning (routes for G
/// without a router).
void validate(const AblationSwitches& sw);

enum class ScanDirection { forward, reverse };

struct UnitConfig {
  SsmConfig ssm;
  ScanDirection direction = ScanDirection::forward;

  Index evidence_channels() const { return ssm.d_model / 2; }
};

/// Non-State Refinement: depthwise 3x3, SiLU, pointwise mix, times a sigmoid
/// gate computed from the input.
struct NsrWeights {
  DepthwiseConv3x3 local;
  Linear mix;
  Linear gate;

  bool operator==(const NsrWeights&) const = default;
};

struct UnitWeights {
  RouterWeights router;
  Linear in_proj;         // d_inner x d_model/2: carrier tokens -> content
  Linear bypass_proj;     // d_inner x d_model: X tokens -> content (no router)
  Linear violation_proj;  // d_inner x d_model: [L; G] tokens -> content
  ScanWeights scan;
  ModulationWeights modulation;
  NsrWeights nsr;
  Linear merge;   // d_model x (d_inner + d_model/2) over [S; NSR(G)]
  Linear decode;  // image channels x d_model

  bool operator==(const UnitWeights&) const = default;
};

/// Post-scan grids captured for the leakage diagnostic.
///   hidden_grid:  heads * d_state * m channels, one per flattened state entry
///   readout_grid: d_inner channels, the readout before the merge
struct UnitProbe {
  FeatureMapF hidden_grid;
  FeatureMapF readout_grid;
};

struct UnitOutput {
  FeatureMap y;
  UnitProbe probe;
};

/// Raster-order tokens: pixel (i, j) -> row i * W + j, one column per channel.
Eigen::MatrixXd tokenize(const FeatureMap& map);

/// Inverse of tokenize.
FeatureMap detokenize(const Eigen::MatrixXd& tokens, Index height, Index width);

/// Content tokens u_k (tokens x d_inner) as wired by the switches.
Eigen::MatrixXd content_tokens(const FeatureMap& x, const UnitWeights& w, const AblationSwitches& sw);

/// Content tokens from already-routed streams (router switch must be on).
Eigen::MatrixXd content_tokens(const OwnershipStreams& streams, const UnitWeights& w, const AblationSwitches& sw);

FeatureMap nsr(const FeatureMap& g, const NsrWeights& w);

/// The sigmoid gate of the NSR block, exposed for range checks.
FeatureMap nsr_gate(const FeatureMap& g, const NsrWeights& w);

/// One unit on features X (d_model channels): route, tokenize, modulate,
/// scan, Y = merge([S; NSR(G)]).
UnitOutput so_unit_forward(const FeatureMap& x, const UnitWeights& w, const AblationSwitches& sw,
                           const UnitConfig& cfg, bool capture_probe = true);

/// Same, starting from streams produced elsewhere (router switch must be on).
UnitOutput so_unit_forward(const OwnershipStreams& streams, const UnitWeights& w, const AblationSwitches& sw,
                           const UnitConfig& cfg, bool capture_probe = true);

}  // namespace ownrecon

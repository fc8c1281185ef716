#pragma once

#include <array>

#include "ownrecon/field.hpp"
#include "ownrecon/layers.hpp"

namespace ownrecon {

/// Normalized 5-tap binomial kernel [1, 4, 6, 4, 1] / 16.
inline constexpr std::array<double, 5> kBinomialTaps{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

/// Mirror index without edge repetition: -1 -> 1, n -> n - 2. Valid for
/// offsets up to n - 1 past either edge.
inline Index reflect_index(Index i, Index n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

/// Feature extractor and the two role projections.
///   phi:      3x3 conv (in_channels -> d_model) followed by SiLU
///   proj_car: per-pixel affine map on the carrier pool (first half of X)
///   proj_nr:  per-pixel affine map on the evidence pool (second half of X)
struct RouterWeights {
  Conv3x3 phi;
  Linear proj_car;
  Linear proj_nr;

  bool operator==(const RouterWeights& o) const = default;
};

/// Resident carrier L and non-resident evidence G, both C/2 x H x W.
struct OwnershipStreams {
  FeatureMap carrier;
  FeatureMap evidence;
};

/// Intermediates of route(), kept for inspection.
struct RouteTrace {
  FeatureMap carrier_pool;      // U_car
  FeatureMap evidence_pool;     // U_nr
  FeatureMap carrier_rejected;  // E_off = U_car - L
};

/// X = SiLU(conv3x3(x)). `x` stacks real/imag parts (2 channels per coil).
FeatureMap extract_features(const FeatureMap& x, const RouterWeights& w);

/// Separable depthwise binomial pass: horizontal then vertical, mirror
/// padding of width 2. Needs H, W >= 3.
FeatureMap binomial_project(const FeatureMap& u);

/// Horizontal pass only (exposed for kernel tests).
FeatureMap binomial_horizontal(const FeatureMap& u);

/// Keep samples at even rows and columns: H x W -> H/2 x W/2.
FeatureMap decimate2(const FeatureMap& u);

/// Bilinear 2x restoration with half-pixel centres, clamped at the borders.
/// Per axis, fine sample i reads coarse coordinate (i + 0.5) / 2 - 0.5:
///   i = 2j     -> 0.25 * c[j-1] + 0.75 * c[j]    (c[0] alone at i = 0)
///   i = 2j + 1 -> 0.75 * c[j]   + 0.25 * c[j+1]  (c[n-1] alone at the end)
FeatureMap upsample_bilinear2(const FeatureMap& u);

/// Fixed carrier projector: binomial pass, 2x compaction, bilinear
/// restoration. Needs even H, W >= 4; output has the input's dimensions.
FeatureMap carrier_project(const FeatureMap& u_car);

/// Split X into equal carrier / evidence pools, project each, form
/// L = carrier_project(U_car) and G = U_nr + (U_car - L).
OwnershipStreams route(const FeatureMap& x, const RouterWeights& w, RouteTrace* trace = nullptr);

}  // namespace ownrecon

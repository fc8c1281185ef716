#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ownrecon/field.hpp"

namespace ownrecon {

enum class MaskKind { equispaced, random, radial };

std::string to_string(MaskKind kind);
MaskKind parse_mask_kind(const std::string& name);

/// Golden-angle increment between consecutive radial spokes, in degrees.
inline constexpr double kGoldenAngleDeg = 111.2461583;

/// Walk step used when rasterizing a spoke, in pixels.
inline constexpr double kRadialStepPx = 0.5;

/// Request for generate_mask. Unset optionals take the documented defaults:
///   center_fraction: 0.08 at acceleration 4, 0.04 at 8, otherwise 0.32 / acceleration
///   spokes:          round(width / acceleration)  (32 at 128 px and 4x, 16 at 8x)
struct MaskSpec {
  MaskKind kind = MaskKind::equispaced;
  Index height = 128;
  Index width = 128;
  double acceleration = 4.0;
  std::optional<double> center_fraction;
  std::optional<int> spokes;
  std::uint64_t seed = 0;
};

using MaskBits = RowMatrix<bool>;

struct SampleMask {
  Index height = 0;
  Index width = 0;
  MaskBits bits;
  MaskKind kind = MaskKind::equispaced;
  double acceleration = 1.0;
  double center_fraction = 0.0;
  int spokes = 0;
  std::uint64_t seed = 0;

  Index sampled_count() const { return bits.count(); }
  double sampled_fraction() const { return static_cast<double>(sampled_count()) / static_cast<double>(bits.size()); }

  /// Columns that are fully sampled, ascending.
  std::vector<Index> sampled_columns() const;

  /// Real 0/1 weights with the mask's shape.
  RealImage weights() const { return bits.cast<double>(); }
};

/// Fully sampled mask (every bin acquired).
SampleMask full_mask(Index height, Index width);

SampleMask generate_mask(const MaskSpec& spec);

/// Throws ShapeError / ConfigError if the mask violates its invariants.
void validate(const SampleMask& mask);

}  // namespace ownrecon

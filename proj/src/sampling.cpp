#include "ownrecon/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ownrecon/rng.hpp"

namespace ownrecon {

std::string to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::equispaced: return "equispaced";
    case MaskKind::random: return "random";
    case MaskKind::radial: return "radial";
  }
  return "unknown";
}

MaskKind parse_mask_kind(const std::string& name) {
  if (name == "equispaced") return MaskKind::equispaced;
  if (name == "random") return MaskKind::random;
  if (name == "radial") return MaskKind::radial;
  throw ConfigError("unknown mask kind '" + name + "'");
}

std::vector<Index> SampleMask::sampled_columns() const {
  std::vector<Index> cols;
  for (Index j = 0; j < width; ++j)
    if (bits.col(j).all()) cols.push_back(j);
  return cols;
}

SampleMask full_mask(Index height, Index width) {
  SampleMask m;
  m.height = height;
  m.width = width;
  m.bits = MaskBits::Constant(height, width, true);
  m.kind = MaskKind::equispaced;
  m.acceleration = 1.0;
  m.center_fraction = 1.0;
  return m;
}

namespace {

double default_center_fraction(double acceleration) {
  if (acceleration == 4.0) return 0.08;
  if (acceleration == 8.0) return 0.04;
  return 0.32 / acceleration;
}

// Contiguous low-frequency block [start, start + count), containing width / 2.
std::pair<Index, Index> center_block(Index width, double center_fraction) {
  if (center_fraction * static_cast<double>(width) < 1.0)
    throw ConfigError("center_fraction x width must be >= 1 (got " +
                      std::to_string(center_fraction * static_cast<double>(width)) + ")");
  const Index count = std::min<Index>(width, std::lround(static_cast<double>(width) * center_fraction));
  const Index start = (width - count + 1) / 2;
  return {start, count};
}

void fill_columns(MaskBits& bits, const std::vector<bool>& columns) {
  for (Index j = 0; j < bits.cols(); ++j) bits.col(j).setConstant(columns[static_cast<size_t>(j)]);
}

void mark_spoke(MaskBits& bits, double angle_rad) {
  const Index h = bits.rows();
  const Index w = bits.cols();
  const double cy = static_cast<double>(h / 2);
  const double cx = static_cast<double>(w / 2);
  const double dx = std::cos(angle_rad);
  const double dy = std::sin(angle_rad);
  for (double direction : {1.0, -1.0}) {
    for (Index step = 0;; ++step) {
      const double t = direction * kRadialStepPx * static_cast<double>(step);
      // round() is symmetric about zero, so the two half-spokes mirror exactly.
      const Index i = static_cast<Index>(cy + std::round(t * dy));
      const Index j = static_cast<Index>(cx + std::round(t * dx));
      if (i < 0 || i >= h || j < 0 || j >= w) break;
      bits(i, j) = true;
    }
  }
}

}  // namespace

SampleMask generate_mask(const MaskSpec& spec) {
  if (spec.acceleration < 1.0) throw ConfigError("acceleration must be >= 1");
  if (spec.width < 4) throw ConfigError("mask width must be >= 4");
  if (spec.height < 2) throw ConfigError("mask height must be >= 2");

  SampleMask mask;
  mask.height = spec.height;
  mask.width = spec.width;
  mask.kind = spec.kind;
  mask.acceleration = spec.acceleration;
  mask.seed = spec.seed;
  mask.bits = MaskBits::Constant(spec.height, spec.width, false);

  const Index w = spec.width;
  switch (spec.kind) {
    case MaskKind::equispaced: {
      mask.center_fraction = spec.center_fraction.value_or(default_center_fraction(spec.acceleration));
      const auto [start, count] = center_block(w, mask.center_fraction);
      const Index stride = std::max<Index>(1, std::lround(spec.acceleration));
      std::vector<bool> cols(static_cast<size_t>(w), false);
      for (Index j = start; j < start + count; ++j) cols[static_cast<size_t>(j)] = true;
      for (Index j = 0; j < w; j += stride) cols[static_cast<size_t>(j)] = true;
      fill_columns(mask.bits, cols);
      break;
    }
    case MaskKind::random: {
      mask.center_fraction = spec.center_fraction.value_or(default_center_fraction(spec.acceleration));
      const auto [start, count] = center_block(w, mask.center_fraction);
      const auto target = static_cast<Index>(std::ceil(static_cast<double>(w) / spec.acceleration));
      if (count > target)
        throw ConfigError("center block (" + std::to_string(count) + " columns) exceeds the sampled-column budget " +
                          std::to_string(target));
      std::vector<bool> cols(static_cast<size_t>(w), false);
      std::vector<Index> pool;
      for (Index j = 0; j < w; ++j) {
        if (j >= start && j < start + count)
          cols[static_cast<size_t>(j)] = true;
        else
          pool.push_back(j);
      }
      // Partial Fisher-Yates: draw without replacement from the outer columns.
      Rng rng(spec.seed);
      const Index needed = target - count;
      for (Index k = 0; k < needed; ++k) {
        const auto pick = k + static_cast<Index>(rng.index(static_cast<std::uint64_t>(pool.size() - k)));
        std::swap(pool[static_cast<size_t>(k)], pool[static_cast<size_t>(pick)]);
        cols[static_cast<size_t>(pool[static_cast<size_t>(k)])] = true;
      }
      fill_columns(mask.bits, cols);
      break;
    }
    case MaskKind::radial: {
      const int spokes =
          spec.spokes.value_or(static_cast<int>(std::lround(static_cast<double>(w) / spec.acceleration)));
      if (spokes < 1) throw ConfigError("radial mask needs at least one spoke");
      mask.spokes = spokes;
      for (int s = 0; s < spokes; ++s) {
        const double deg = std::fmod(static_cast<double>(s) * kGoldenAngleDeg, 360.0);
        mark_spoke(mask.bits, deg * std::numbers::pi / 180.0);
      }
      break;
    }
  }
  validate(mask);
  return mask;
}

void validate(const SampleMask& mask) {
  if (mask.bits.rows() != mask.height || mask.bits.cols() != mask.width)
    throw ShapeError("mask bits do not match height x width");
  if (mask.height < 2 || mask.width < 2) throw ShapeError("mask must be at least 2x2");
  if (!mask.bits(mask.height / 2, mask.width / 2)) throw ConfigError("mask does not sample the zero-frequency bin");
}

}  // namespace ownrecon

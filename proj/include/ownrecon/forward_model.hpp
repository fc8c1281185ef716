#pragma once

#include <cstdint>
#include <vector>

#include "ownrecon/field.hpp"
#include "ownrecon/sampling.hpp"

namespace ownrecon {

enum class CoilMode { single_coil, multi_coil };

/// Tolerance on sum_c |s_c|^2 = 1 for coil sensitivities.
inline constexpr double kCoilNormTolerance = 1e-6;

/// The measurement operator A: mask, optional coil sensitivities.
struct ForwardConfig {
  SampleMask mask;
  std::vector<ComplexField> coil_maps;
  CoilMode mode = CoilMode::single_coil;

  Index coils() const { return mode == CoilMode::single_coil ? 1 : static_cast<Index>(coil_maps.size()); }
  Index height() const { return mask.height; }
  Index width() const { return mask.width; }
};

ForwardConfig single_coil(SampleMask mask);
ForwardConfig multi_coil(SampleMask mask, std::vector<ComplexField> coil_maps);

/// Throws on missing or mis-sized maps, or maps that are not jointly normalized.
void validate(const ForwardConfig& cfg);

/// Per-coil k-space; exactly zero at unsampled bins.
struct Measurements {
  std::vector<ComplexField> coils;

  bool operator==(const Measurements& o) const { return coils == o.coils; }
};

/// How DC combines the current k-space with the measurements at sampled bins.
/// Hard replacement by default; `soft` blends (k + w y) / (1 + w).
struct DcMode {
  bool soft = false;
  double weight = 0.0;

  static DcMode hard() { return {}; }
  static DcMode soft_weighted(double w) { return {true, w}; }
};

Measurements forward(const ForwardConfig& cfg, const ComplexField& image);

ComplexField adjoint(const ForwardConfig& cfg, const Measurements& y);

/// Per-coil k-space after replacing sampled bins with y. This is the exact
/// replacement point: sampled entries are copies of y.
std::vector<ComplexField> dc_kspace(const ComplexField& z, const Measurements& y, const ForwardConfig& cfg,
                                    DcMode mode = DcMode::hard());

ComplexField data_consistency(const ComplexField& z, const Measurements& y, const ForwardConfig& cfg,
                              DcMode mode = DcMode::hard());

/// forward(cfg, image) plus circular complex Gaussian noise (std `noise_std`
/// per real/imag component) on sampled bins. Draw order: coil, then row-major
/// sampled bins, real before imaginary.
Measurements simulate(const ComplexField& image, const ForwardConfig& cfg, double noise_std, std::uint64_t seed);

}  // namespace ownrecon

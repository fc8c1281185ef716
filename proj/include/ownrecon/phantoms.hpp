#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ownrecon/field.hpp"

namespace ownrecon {

enum class PhantomKind { shepp_logan, smooth_texture };

std::string to_string(PhantomKind kind);
PhantomKind parse_phantom_kind(const std::string& name);

/// Ground-truth image of side `size` (even, >= 32) with magnitudes in [0, 1].
/// shepp_logan is the ten-ellipse modified (Toft) table with zero phase and
/// ignores the seed; smooth_texture is a seeded sum of low-frequency cosines
/// plus fine uniform texture, with a slowly varying phase.
ComplexField make_phantom(PhantomKind kind, Index size, std::uint64_t seed = 0);

/// `n_coils` smooth Gaussian-profile sensitivities centred on anchors spaced
/// evenly around the image border, with a constant phase per coil, jointly
/// normalized so that sum_c |s_c|^2 = 1 at every pixel.
std::vector<ComplexField> synth_coil_maps(Index n_coils, Index size);

}  // namespace ownrecon

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ownrecon/forward_model.hpp"
#include "ownrecon/so_unit.hpp"

namespace ownrecon {

/// Where the residual z = x + Psi(Y) is taken.
///   per_unit:  every unit decodes its own update from the current iterate
///   per_group: units chain in feature space, the last one decodes
enum class ResidualMode { per_unit, per_group };

struct ModelConfig {
  Index groups = 6;
  Index units_per_group = 2;
  UnitConfig unit;
  AblationSwitches switches;
  ResidualMode residual = ResidualMode::per_unit;
  DcMode dc = DcMode::hard();
  bool dc_per_unit = false;
  bool share_weights = false;  // reuse one group's unit weights in every group
  Index image_channels = 2;    // 2 x coils (real / imaginary stacking)
  std::uint64_t seed = 0;

  Index total_units() const { return groups * units_per_group; }
  Index stored_units() const { return share_weights ? units_per_group : total_units(); }

  /// True when two configs need identically shaped weights.
  bool same_architecture(const ModelConfig& o) const;
};

void validate(const ModelConfig& cfg);

struct ModelWeights {
  std::vector<UnitWeights> units;

  const UnitWeights& unit(const ModelConfig& cfg, Index group, Index index) const;

  bool operator==(const ModelWeights&) const = default;
};

/// Zero weights with the shapes the config requires.
ModelWeights allocate_weights(const ModelConfig& cfg);

/// Seeded initialization: weights uniform in +-1/sqrt(fan_in), biases zero,
/// a_log zero. Every value is representable in float32 so the weight file
/// round-trips exactly.
ModelWeights init_weights(const ModelConfig& cfg);

/// Zero the decoders (Psi) of every unit.
void zero_decoders(ModelWeights& w);

/// Visit every parameter block in file order as (name, matrix-or-vector).
template <typename Weights, typename Visitor>
void for_each_block(Weights& w, Visitor&& visit) {
  for (size_t k = 0; k < w.units.size(); ++k) {
    auto& u = w.units[k];
    const std::string p = "unit" + std::to_string(k) + ".";
    visit(p + "router.phi.weight", u.router.phi.weight);
    visit(p + "router.phi.bias", u.router.phi.bias);
    visit(p + "router.proj_car.weight", u.router.proj_car.weight);
    visit(p + "router.proj_car.bias", u.router.proj_car.bias);
    visit(p + "router.proj_nr.weight", u.router.proj_nr.weight);
    visit(p + "router.proj_nr.bias", u.router.proj_nr.bias);
    visit(p + "in_proj.weight", u.in_proj.weight);
    visit(p + "in_proj.bias", u.in_proj.bias);
    visit(p + "bypass_proj.weight", u.bypass_proj.weight);
    visit(p + "bypass_proj.bias", u.bypass_proj.bias);
    visit(p + "violation_proj.weight", u.violation_proj.weight);
    visit(p + "violation_proj.bias", u.violation_proj.bias);
    visit(p + "scan.delta.weight", u.scan.delta.weight);
    visit(p + "scan.delta.bias", u.scan.delta.bias);
    visit(p + "scan.a_log", u.scan.a_log);
    visit(p + "scan.lambda.weight", u.scan.lambda.weight);
    visit(p + "scan.lambda.bias", u.scan.lambda.bias);
    visit(p + "scan.b_proj.weight", u.scan.b_proj.weight);
    visit(p + "scan.b_proj.bias", u.scan.b_proj.bias);
    visit(p + "scan.c_proj.weight", u.scan.c_proj.weight);
    visit(p + "scan.c_proj.bias", u.scan.c_proj.bias);
    visit(p + "modulation.weight", u.modulation.proj.weight);
    visit(p + "modulation.bias", u.modulation.proj.bias);
    visit(p + "nsr.local.weight", u.nsr.local.weight);
    visit(p + "nsr.local.bias", u.nsr.local.bias);
    visit(p + "nsr.mix.weight", u.nsr.mix.weight);
    visit(p + "nsr.mix.bias", u.nsr.mix.bias);
    visit(p + "nsr.gate.weight", u.nsr.gate.weight);
    visit(p + "nsr.gate.bias", u.nsr.gate.bias);
    visit(p + "merge.weight", u.merge.weight);
    visit(p + "merge.bias", u.merge.bias);
    visit(p + "decode.weight", u.decode.weight);
    visit(p + "decode.bias", u.decode.bias);
  }
}

/// Real/imaginary stacking at the network boundary: [Re, Im] for one coil,
/// [Re(s_c x), Im(s_c x)] per coil otherwise.
FeatureMap stack_image(const ComplexField& x, const ForwardConfig& fwd);

/// Inverse of stack_image for updates: sum_c conj(s_c) (re_c + i im_c).
ComplexField unstack_update(const FeatureMap& update, const ForwardConfig& fwd);

struct ReconResult {
  ComplexField image;                     // x_hat
  ComplexField zero_filled;               // x_0 = A^H y
  std::vector<ComplexField> final_kspace; // k-space at the last replacement point
  std::vector<UnitProbe> probes;          // one per unit, in execution order
  Index dc_calls = 0;                     // DC evaluations actually performed
};

/// Unrolled reconstruction:
///   x_0 = A^H y
///   per group: z = x + Psi(Y) through the group's units, x <- DC(z, y)
/// Scan states never cross units or groups. DC is idempotent on an iterate
/// it produced (single-coil, hard replacement), so a group whose update is
/// exactly zero leaves the iterate as is.
ReconResult reconstruct(const Measurements& y, const ForwardConfig& fwd, const ModelWeights& w,
                        const ModelConfig& cfg, bool capture_probes = true);

inline constexpr int kWeightFormatVersion = 1;
inline constexpr const char* kWeightMagic = "OWNRECON-WEIGHTS";

/// Text manifest (magic, version, seed, config JSON, one line per block with
/// rows, cols and byte offset) followed by little-endian float32 payload.
void save_weights(const ModelWeights& w, const ModelConfig& cfg, const std::filesystem::path& path);

struct LoadedWeights {
  ModelConfig config;
  ModelWeights weights;
};

LoadedWeights load_weights(const std::filesystem::path& path);

/// Load and require the stored architecture to match `expected`.
ModelWeights load_weights(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace ownrecon

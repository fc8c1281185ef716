#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ownrecon/config_json.hpp"
#include "ownrecon/diagnostics.hpp"
#include "ownrecon/phantoms.hpp"
#include "ownrecon/unroll.hpp"

namespace ownrecon::cli {

/// Process exit status per error category.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,  // bad flags or config (configuration errors are reported as usage)
  kIo = 3,
  kFormat = 4,
  kShape = 5,
  kDataIntegrity = 6,
  kCapability = 7,
  kDomain = 8,
  kCheckFailed = 9,  // selftest found a failing property
};

int exit_code(ErrorKind kind);

/// Name of the environment variable that sets the default output directory.
inline constexpr const char* kOutputEnv = "OWNRECON_OUT";

struct PhantomSpec {
  PhantomKind kind = PhantomKind::shepp_logan;
  Index size = 128;
  std::uint64_t seed = 0;
};

/// Everything one recon / diagnose / ablate run needs. Slice s uses phantom
/// seed + s and noise seed + s.
struct RunConfig {
  std::string case_name = "phantom";
  ModelConfig model;
  MaskSpec mask;
  PhantomSpec phantom;
  Index coils = 1;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
  Index slices = 1;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> weights_path;  // load instead of seeding
  bool save_weights = false;
  bool zero_decode = false;
  bool write_probes = false;
};

/// Strict parse; relative paths resolve against `base_dir`. The mask size
/// defaults to the phantom size and image_channels to 2 x coils.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

struct SliceResult {
  ReconResult recon;
  ComplexField truth;
  double psnr = 0.0;
  double ssim = 0.0;
  double zero_filled_psnr = 0.0;
  double zero_filled_ssim = 0.0;
};

/// Builds the operator, simulates measurements and reconstructs every slice.
/// Output order follows the slice index whatever `jobs` is.
std::vector<SliceResult> run_slices(const RunConfig& cfg, const ModelWeights& weights, unsigned jobs = 1);

/// Weights for a run: loaded from weights_path or seeded from model.seed,
/// with decoders zeroed when zero_decode is set.
ModelWeights run_weights(const RunConfig& cfg);

struct AblationVariant {
  std::string name;
  AblationSwitches switches;
};

/// The six ownership-path variants followed by the two tying variants.
std::vector<AblationVariant> ablation_variants();

/// Entry point. `args` excludes the program name; `out` and `err` receive
/// human-readable output.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// selftest body; returns the number of failing properties.
int selftest(std::ostream& out);

}  // namespace ownrecon::cli

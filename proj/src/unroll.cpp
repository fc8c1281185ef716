#include "ownrecon/unroll.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "ownrecon/config_json.hpp"
#include "ownrecon/rng.hpp"

namespace ownrecon {

bool ModelConfig::same_architecture(const ModelConfig& o) const {
  return groups == o.groups && units_per_group == o.units_per_group && unit.ssm == o.unit.ssm &&
         share_weights == o.share_weights && image_channels == o.image_channels;
}

void validate(const ModelConfig& cfg) {
  if (cfg.groups < 1 || cfg.units_per_group < 1) throw ConfigError("groups and units_per_group must be >= 1");
  validate(cfg.unit.ssm);
  validate(cfg.switches);
  if (cfg.unit.ssm.d_model % 2 != 0) throw ConfigError("d_model must be even for the role split");
  if (cfg.image_channels < 2 || cfg.image_channels % 2 != 0)
    throw ConfigError("image_channels must be a positive multiple of 2");
  if (cfg.dc.soft && !(cfg.dc.weight >= 0.0)) throw ConfigError("soft DC weight must be >= 0");
}

const UnitWeights& ModelWeights::unit(const ModelConfig& cfg, Index group, Index index) const {
  const Index k = cfg.share_weights ? index : group * cfg.units_per_group + index;
  return units.at(static_cast<size_t>(k));
}

ModelWeights allocate_weights(const ModelConfig& cfg) {
  validate(cfg);
  const SsmConfig& s = cfg.unit.ssm;
  const Index dm = s.d_model;
  const Index half = dm / 2;
  const Index di = s.d_inner();
  const Index heads = s.heads();

  UnitWeights u;
  u.router.phi = Conv3x3(dm, cfg.image_channels);
  u.router.proj_car = Linear(half, half);
  u.router.proj_nr = Linear(half, half);
  u.in_proj = Linear(di, half);
  u.bypass_proj = Linear(di, dm);
  u.violation_proj = Linear(di, dm);
  u.scan.delta = Linear(heads, di);
  u.scan.a_log = Eigen::VectorXd::Zero(heads);
  u.scan.lambda = Linear(heads, di);
  u.scan.b_proj = Linear(s.interface_width(), di);
  u.scan.c_proj = Linear(s.interface_width(), di);
  u.modulation.proj = Linear(heads * 4 * s.d_state, half);
  u.nsr.local = DepthwiseConv3x3(half);
  u.nsr.mix = Linear(half, half);
  u.nsr.gate = Linear(half, half);
  u.merge = Linear(dm, di + half);
  u.decode = Linear(cfg.image_channels, dm);

  ModelWeights w;
  w.units.assign(static_cast<size_t>(cfg.stored_units()), u);
  return w;
}

ModelWeights init_weights(const ModelConfig& cfg) {
  ModelWeights w = allocate_weights(cfg);
  Rng rng(cfg.seed);
  auto fill = [&rng](Eigen::MatrixXd& m, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i)
        m(i, j) = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
  };
  for (auto& u : w.units) {
    fill(u.router.phi.weight, u.router.phi.weight.cols());
    fill(u.router.proj_car.weight, u.router.proj_car.in_features());
    fill(u.router.proj_nr.weight, u.router.proj_nr.in_features());
    fill(u.in_proj.weight, u.in_proj.in_features());
    fill(u.bypass_proj.weight, u.bypass_proj.in_features());
    fill(u.violation_proj.weight, u.violation_proj.in_features());
    fill(u.scan.delta.weight, u.scan.delta.in_features());
    fill(u.scan.lambda.weight, u.scan.lambda.in_features());
    fill(u.scan.b_proj.weight, u.scan.b_proj.in_features());
    fill(u.scan.c_proj.weight, u.scan.c_proj.in_features());
    fill(u.modulation.proj.weight, u.modulation.proj.in_features());
    fill(u.nsr.local.weight, 9);
    fill(u.nsr.mix.weight, u.nsr.mix.in_features());
    fill(u.nsr.gate.weight, u.nsr.gate.in_features());
    fill(u.merge.weight, u.merge.in_features());
    fill(u.decode.weight, u.decode.in_features());
  }
  return w;
}

void zero_decoders(ModelWeights& w) {
  for (auto& u : w.units) {
    u.decode.weight.setZero();
    u.decode.bias.setZero();
  }
}

FeatureMap stack_image(const ComplexField& x, const ForwardConfig& fwd) {
  const Index coils = fwd.coils();
  FeatureMap out(2 * coils, x.rows(), x.cols());
  for (Index c = 0; c < coils; ++c) {
    const ComplexField img =
        fwd.mode == CoilMode::single_coil ? x : ComplexField(fwd.coil_maps[static_cast<size_t>(c)].cwiseProduct(x));
    out.plane(2 * c) = img.real();
    out.plane(2 * c + 1) = img.imag();
  }
  return out;
}

ComplexField unstack_update(const FeatureMap& update, const ForwardConfig& fwd) {
  const Index coils = fwd.coils();
  if (update.channels != 2 * coils)
    throw ShapeError("decoded update has " + std::to_string(update.channels) + " channels, expected " +
                     std::to_string(2 * coils));
  ComplexField out = ComplexField::Zero(update.height, update.width);
  for (Index c = 0; c < coils; ++c) {
    ComplexField coil(update.height, update.width);
    coil.real() = update.plane(2 * c);
    coil.imag() = update.plane(2 * c + 1);
    if (fwd.mode == CoilMode::single_coil)
      out += coil;
    else
      out += fwd.coil_maps[static_cast<size_t>(c)].conjugate().cwiseProduct(coil);
  }
  return out;
}

namespace {

// DC on an iterate that DC itself produced is a no-op (hard replacement,
// single coil), so the caller may skip it when the update is exactly zero.
bool dc_is_idempotent(const ForwardConfig& fwd, const ModelConfig& cfg) {
  return fwd.mode == CoilMode::single_coil && !cfg.dc.soft;
}

struct DcState {
  ComplexField x;
  std::vector<ComplexField> kspace;
  bool consistent = false;
  Index calls = 0;
};

void apply_dc(DcState& st, const ComplexField& z, const Measurements& y, const ForwardConfig& fwd,
              const ModelConfig& cfg) {
  if (st.consistent && z == st.x) return;
  st.kspace = dc_kspace(z, y, fwd, cfg.dc);
  if (fwd.mode == CoilMode::single_coil) {
    st.x = ifft2c(st.kspace[0]);
  } else {
    st.x = ComplexField::Zero(fwd.height(), fwd.width());
    for (size_t c = 0; c < st.kspace.size(); ++c) st.x += fwd.coil_maps[c].conjugate().cwiseProduct(ifft2c(st.kspace[c]));
  }
  st.consistent = dc_is_idempotent(fwd, cfg);
  ++st.calls;
}

}  // namespace

ReconResult reconstruct(const Measurements& y, const ForwardConfig& fwd, const ModelWeights& w,
                        const ModelConfig& cfg, bool capture_probes) {
  validate(cfg);
  validate(fwd);
  if (cfg.image_channels != 2 * fwd.coils())
    throw ShapeError("model expects " + std::to_string(cfg.image_channels) + " image channels, operator provides " +
                     std::to_string(2 * fwd.coils()));
  if (static_cast<Index>(w.units.size()) != cfg.stored_units())
    throw ShapeError("weights hold " + std::to_string(w.units.size()) + " units, config needs " +
                     std::to_string(cfg.stored_units()));

  ReconResult result;
  result.zero_filled = adjoint(fwd, y);

  DcState st;
  st.x = result.zero_filled;
  st.kspace = dc_kspace(st.x, y, fwd, cfg.dc);
  st.consistent = dc_is_idempotent(fwd, cfg);

  auto run_unit = [&](const FeatureMap& features, const UnitWeights& uw) {
    UnitOutput out = so_unit_forward(features, uw, cfg.switches, cfg.unit, capture_probes);
    if (capture_probes) result.probes.push_back(std::move(out.probe));
    return std::move(out.y);
  };

  for (Index g = 0; g < cfg.groups; ++g) {
    ComplexField z = st.x;
    if (cfg.residual == ResidualMode::per_unit) {
      for (Index k = 0; k < cfg.units_per_group; ++k) {
        const UnitWeights& uw = w.unit(cfg, g, k);
        const FeatureMap features = extract_features(stack_image(z, fwd), uw.router);
        const FeatureMap update = apply(uw.decode, run_unit(features, uw));
        z += unstack_update(update, fwd);
        if (cfg.dc_per_unit) {
          apply_dc(st, z, y, fwd, cfg);
          z = st.x;
        }
      }
    } else {
      FeatureMap features = extract_features(stack_image(z, fwd), w.unit(cfg, g, 0).router);
      for (Index k = 0; k < cfg.units_per_group; ++k) features = run_unit(features, w.unit(cfg, g, k));
      const FeatureMap update = apply(w.unit(cfg, g, cfg.units_per_group - 1).decode, features);
      z += unstack_update(update, fwd);
    }
    if (!cfg.dc_per_unit || cfg.residual == ResidualMode::per_group) apply_dc(st, z, y, fwd, cfg);
  }

  result.image = std::move(st.x);
  result.final_kspace = std::move(st.kspace);
  result.dc_calls = st.calls;
  return result;
}

// -- weight files -------------------------------------------------------------

namespace {

void put_le32(std::ostream& os, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                         static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
  os.write(bytes, 4);
}

float get_le32(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

std::string expect_line(std::istream& is, const char* field) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError(field, "manifest ends early");
  return line;
}

std::string expect_key(std::istream& is, const std::string& key) {
  const std::string line = expect_line(is, key.c_str());
  if (line.rfind(key + " ", 0) != 0) throw FormatError(key, "expected '" + key + "' line, got '" + line + "'");
  return line.substr(key.size() + 1);
}

long long parse_int(const std::string& text, const char* field) {
  try {
    size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw FormatError(field, "not an integer: '" + text + "'");
  }
}

}  // namespace

void save_weights(const ModelWeights& w, const ModelConfig& cfg, const std::filesystem::path& path) {
  std::ostringstream manifest;
  manifest << kWeightMagic << "\n";
  manifest << "version " << kWeightFormatVersion << "\n";
  manifest << "seed " << cfg.seed << "\n";
  manifest << "config " << to_json(cfg).dump() << "\n";

  size_t blocks = 0;
  std::ostringstream table;
  std::uint64_t offset = 0;
  for_each_block(w, [&](const std::string& name, const auto& m) {
    table << "block " << name << " " << m.rows() << " " << m.cols() << " " << offset << "\n";
    offset += static_cast<std::uint64_t>(m.size()) * 4;
    ++blocks;
  });
  manifest << "blocks " << blocks << "\n" << table.str() << "bytes " << offset << "\nend\n";

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << manifest.str();
  for_each_block(w, [&](const std::string&, const auto& m) {
    // Column-major element order, matching Eigen's default storage.
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) put_le32(os, static_cast<float>(m(i, j)));
  });
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

LoadedWeights load_weights(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");

  if (expect_line(is, "magic") != kWeightMagic) throw FormatError("magic", "not a weight file");
  const long long version = parse_int(expect_key(is, "version"), "version");
  if (version != kWeightFormatVersion)
    throw FormatError("version", "unsupported weight format version " + std::to_string(version));
  const auto seed_text = expect_key(is, "seed");
  const auto seed = static_cast<std::uint64_t>(parse_int(seed_text, "seed"));

  LoadedWeights out;
  try {
    out.config = model_config_from_json(StrictObject(Json::parse(expect_key(is, "config")), "config"));
  } catch (const Json::exception& e) {
    throw FormatError("config", e.what());
  } catch (const ConfigError& e) {
    throw FormatError("config", e.what());
  }
  if (out.config.seed != seed) throw FormatError("seed", "manifest seed disagrees with config seed");

  const long long count = parse_int(expect_key(is, "blocks"), "blocks");
  struct Entry {
    Index rows, cols;
    std::uint64_t offset;
  };
  std::map<std::string, Entry> entries;
  for (long long k = 0; k < count; ++k) {
    std::istringstream line(expect_key(is, "block"));
    std::string name;
    long long rows = 0, cols = 0, offset = 0;
    if (!(line >> name >> rows >> cols >> offset)) throw FormatError("block", "malformed block line");
    entries[name] = {static_cast<Index>(rows), static_cast<Index>(cols), static_cast<std::uint64_t>(offset)};
  }
  const auto bytes = static_cast<std::uint64_t>(parse_int(expect_key(is, "bytes"), "bytes"));
  if (expect_line(is, "end") != "end") throw FormatError("end", "missing end of manifest");

  std::vector<unsigned char> payload((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (payload.size() != bytes)
    throw FormatError("payload", "expected " + std::to_string(bytes) + " bytes, found " + std::to_string(payload.size()));

  out.weights = allocate_weights(out.config);
  size_t visited = 0;
  for_each_block(out.weights, [&](const std::string& name, auto& m) {
    const auto it = entries.find(name);
    if (it == entries.end()) throw FormatError("block " + name, "missing from manifest");
    const Entry& e = it->second;
    if (e.rows != m.rows() || e.cols != m.cols())
      throw FormatError("block " + name, "shape " + std::to_string(e.rows) + "x" + std::to_string(e.cols) +
                                             " does not match config " + std::to_string(m.rows()) + "x" +
                                             std::to_string(m.cols()));
    if (e.offset + static_cast<std::uint64_t>(m.size()) * 4 > payload.size())
      throw FormatError("block " + name, "extends past the payload");
    const unsigned char* p = payload.data() + e.offset;
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i, p += 4) m(i, j) = static_cast<double>(get_le32(p));
    if (!m.allFinite()) throw FormatError("block " + name, "contains NaN or Inf");
    ++visited;
  });
  if (visited != entries.size()) throw FormatError("blocks", "manifest lists blocks the config does not define");
  return out;
}

ModelWeights load_weights(const std::filesystem::path& path, const ModelConfig& expected) {
  LoadedWeights loaded = load_weights(path);
  if (!loaded.config.same_architecture(expected))
    throw FormatError("config", "stored architecture " + to_json(loaded.config).dump() + " does not match " +
                                    to_json(expected).dump());
  return std::move(loaded.weights);
}

}  // namespace ownrecon

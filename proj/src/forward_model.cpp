#include "ownrecon/forward_model.hpp"

#include <cmath>

#include "ownrecon/rng.hpp"

namespace ownrecon {

ForwardConfig single_coil(SampleMask mask) {
  ForwardConfig cfg;
  cfg.mask = std::move(mask);
  cfg.mode = CoilMode::single_coil;
  return cfg;
}

ForwardConfig multi_coil(SampleMask mask, std::vector<ComplexField> coil_maps) {
  ForwardConfig cfg;
  cfg.mask = std::move(mask);
  cfg.coil_maps = std::move(coil_maps);
  cfg.mode = CoilMode::multi_coil;
  validate(cfg);
  return cfg;
}

void validate(const ForwardConfig& cfg) {
  validate(cfg.mask);
  if (cfg.mode == CoilMode::single_coil) return;
  if (cfg.coil_maps.empty()) throw ConfigError("multi-coil mode needs at least one coil map");
  RealImage energy = RealImage::Zero(cfg.height(), cfg.width());
  for (const auto& s : cfg.coil_maps) {
    if (s.rows() != cfg.height() || s.cols() != cfg.width())
      throw ShapeError("coil map dimensions do not match the mask");
    if (!s.allFinite()) throw DataIntegrityError("coil map contains NaN or Inf");
    energy += s.cwiseAbs2();
  }
  const double worst = (energy.array() - 1.0).abs().maxCoeff();
  if (worst > kCoilNormTolerance)
    throw ConfigError("coil maps are not normalized: max |sum |s_c|^2 - 1| = " + std::to_string(worst));
}

namespace {

void require_image(const ForwardConfig& cfg, const ComplexField& image) {
  if (image.rows() != cfg.height() || image.cols() != cfg.width())
    throw ShapeError("image is " + std::to_string(image.rows()) + "x" + std::to_string(image.cols()) +
                     ", operator expects " + std::to_string(cfg.height()) + "x" + std::to_string(cfg.width()));
}

void require_measurements(const ForwardConfig& cfg, const Measurements& y) {
  if (static_cast<Index>(y.coils.size()) != cfg.coils())
    throw ShapeError("measurements carry " + std::to_string(y.coils.size()) + " coils, operator expects " +
                     std::to_string(cfg.coils()));
  for (const auto& k : y.coils)
    if (k.rows() != cfg.height() || k.cols() != cfg.width()) throw ShapeError("measurement k-space size mismatch");
}

// Coil image s_c * x (the image itself in single-coil mode).
ComplexField coil_image(const ForwardConfig& cfg, const ComplexField& image, size_t c) {
  if (cfg.mode == CoilMode::single_coil) return image;
  return cfg.coil_maps[c].cwiseProduct(image);
}

ComplexField masked(const ComplexField& k, const MaskBits& bits) {
  return bits.select(k, ComplexField::Zero(k.rows(), k.cols()));
}

}  // namespace

Measurements forward(const ForwardConfig& cfg, const ComplexField& image) {
  require_image(cfg, image);
  Measurements y;
  y.coils.reserve(static_cast<size_t>(cfg.coils()));
  for (size_t c = 0; c < static_cast<size_t>(cfg.coils()); ++c)
    y.coils.push_back(masked(fft2c(coil_image(cfg, image, c)), cfg.mask.bits));
  return y;
}

ComplexField adjoint(const ForwardConfig& cfg, const Measurements& y) {
  require_measurements(cfg, y);
  if (cfg.mode == CoilMode::single_coil) return ifft2c(masked(y.coils[0], cfg.mask.bits));
  ComplexField x = ComplexField::Zero(cfg.height(), cfg.width());
  for (size_t c = 0; c < y.coils.size(); ++c)
    x += cfg.coil_maps[c].conjugate().cwiseProduct(ifft2c(masked(y.coils[c], cfg.mask.bits)));
  return x;
}

std::vector<ComplexField> dc_kspace(const ComplexField& z, const Measurements& y, const ForwardConfig& cfg,
                                    DcMode mode) {
  require_image(cfg, z);
  require_measurements(cfg, y);
  if (mode.soft && !(mode.weight >= 0.0)) throw ConfigError("soft DC weight must be >= 0");
  std::vector<ComplexField> out;
  out.reserve(y.coils.size());
  for (size_t c = 0; c < y.coils.size(); ++c) {
    ComplexField k = fft2c(coil_image(cfg, z, c));
    if (mode.soft) {
      const ComplexField blended = (k + mode.weight * y.coils[c]) / (1.0 + mode.weight);
      k = cfg.mask.bits.select(blended, k);
    } else {
      k = cfg.mask.bits.select(y.coils[c], k);
    }
    out.push_back(std::move(k));
  }
  return out;
}

ComplexField data_consistency(const ComplexField& z, const Measurements& y, const ForwardConfig& cfg, DcMode mode) {
  const auto kspace = dc_kspace(z, y, cfg, mode);
  if (cfg.mode == CoilMode::single_coil) return ifft2c(kspace[0]);
  ComplexField x = ComplexField::Zero(cfg.height(), cfg.width());
  for (size_t c = 0; c < kspace.size(); ++c) x += cfg.coil_maps[c].conjugate().cwiseProduct(ifft2c(kspace[c]));
  return x;
}

Measurements simulate(const ComplexField& image, const ForwardConfig& cfg, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  Measurements y = forward(cfg, image);
  if (noise_std == 0.0) return y;
  Rng rng(seed);
  const auto& bits = cfg.mask.bits;
  for (auto& k : y.coils) {
    for (Index i = 0; i < k.rows(); ++i) {
      for (Index j = 0; j < k.cols(); ++j) {
        if (!bits(i, j)) continue;
        const double re = rng.gaussian() * noise_std;
        const double im = rng.gaussian() * noise_std;
        k(i, j) += std::complex<double>(re, im);
      }
    }
  }
  return y;
}

}  // namespace ownrecon

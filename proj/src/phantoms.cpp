#include "ownrecon/phantoms.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "ownrecon/rng.hpp"

namespace ownrecon {

std::string to_string(PhantomKind kind) {
  return kind == PhantomKind::shepp_logan ? "shepp_logan" : "smooth_texture";
}

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "shepp_logan") return PhantomKind::shepp_logan;
  if (name == "smooth_texture") return PhantomKind::smooth_texture;
  throw ConfigError("unknown phantom kind '" + name + "'");
}

namespace {

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan: intensity, semi-axes, centre, rotation (degrees).
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

// Pixel centre in [-1, 1] coordinates, y pointing up.
double coord_x(Index j, Index n) { return (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(n) - 1.0; }
double coord_y(Index i, Index n) { return 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n); }

RealImage shepp_logan(Index n) {
  RealImage img = RealImage::Zero(n, n);
  for (const auto& e : kSheppLogan) {
    const double phi = e.phi_deg * std::numbers::pi / 180.0;
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        const double dx = coord_x(j, n) - e.x0;
        const double dy = coord_y(i, n) - e.y0;
        const double xr = dx * cp + dy * sp;
        const double yr = -dx * sp + dy * cp;
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) img(i, j) += e.intensity;
      }
    }
  }
  img = img.cwiseMax(0.0);
  return img / img.maxCoeff();
}

RealImage low_frequency_field(Index n, Rng& rng, int modes, double max_cycles) {
  RealImage f = RealImage::Zero(n, n);
  for (int k = 0; k < modes; ++k) {
    const double fy = rng.uniform(-max_cycles, max_cycles);
    const double fx = rng.uniform(-max_cycles, max_cycles);
    const double amp = rng.uniform(0.2, 1.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        f(i, j) += amp * std::cos(std::numbers::pi * (fy * coord_y(i, n) + fx * coord_x(j, n)) + phase);
  }
  return f;
}

ComplexField smooth_texture(Index n, std::uint64_t seed) {
  Rng rng(seed);
  RealImage mag = low_frequency_field(n, rng, 8, 3.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) mag(i, j) += rng.uniform(-0.15, 0.15);
  mag = (mag.array() - mag.minCoeff()) / (mag.maxCoeff() - mag.minCoeff());
  RealImage phase = low_frequency_field(n, rng, 3, 1.0);
  phase *= 0.5 / std::max(1e-12, phase.cwiseAbs().maxCoeff());

  ComplexField out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = std::polar(mag(i, j), phase(i, j));
  return out;
}

}  // namespace

ComplexField make_phantom(PhantomKind kind, Index size, std::uint64_t seed) {
  if (size < 32 || size % 2 != 0)
    throw ConfigError("phantom size must be even and >= 32, got " + std::to_string(size));
  if (kind == PhantomKind::shepp_logan) return shepp_logan(size).cast<std::complex<double>>();
  return smooth_texture(size, seed);
}

std::vector<ComplexField> synth_coil_maps(Index n_coils, Index size) {
  if (n_coils < 1) throw ConfigError("n_coils must be >= 1");
  if (size < 2) throw ConfigError("coil map size must be >= 2");
  const double centre = static_cast<double>(size) / 2.0;
  const double radius = static_cast<double>(size) / 2.0;
  const double sigma = static_cast<double>(size) / 2.0;

  std::vector<ComplexField> maps;
  RealImage energy = RealImage::Zero(size, size);
  for (Index c = 0; c < n_coils; ++c) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(n_coils);
    const double ay = centre + radius * std::sin(theta);
    const double ax = centre + radius * std::cos(theta);
    const std::complex<double> phase = std::polar(1.0, theta);
    ComplexField s(size, size);
    for (Index i = 0; i < size; ++i) {
      for (Index j = 0; j < size; ++j) {
        const double dy = static_cast<double>(i) + 0.5 - ay;
        const double dx = static_cast<double>(j) + 0.5 - ax;
        s(i, j) = phase * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
    }
    energy += s.cwiseAbs2();
    maps.push_back(std::move(s));
  }
  const RealImage inv = energy.cwiseSqrt().cwiseInverse();
  for (auto& s : maps) s = s.cwiseProduct(inv.cast<std::complex<double>>());
  return maps;
}

}  // namespace ownrecon

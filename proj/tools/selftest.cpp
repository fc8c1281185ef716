// Reduced-size versions of the library's core properties, runnable from the
// installed binary. The full-size checks live in the acceptance suite.

#include <cmath>
#include <functional>
#include <ostream>

#include "cli.hpp"
#include "ownrecon/rng.hpp"

namespace ownrecon::cli {

namespace {

ComplexField random_field(Index h, Index w, Rng& rng) {
  ComplexField f(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) f(i, j) = {rng.gaussian(), rng.gaussian()};
  return f;
}

FeatureMap random_map(Index c, Index h, Index w, Rng& rng) {
  FeatureMap m(c, h, w);
  for (Index k = 0; k < m.data.size(); ++k) m.data.data()[k] = rng.gaussian();
  return m;
}

Measurements random_measurements(const ForwardConfig& fwd, Rng& rng) {
  Measurements y;
  for (Index c = 0; c < fwd.coils(); ++c)
    y.coils.push_back(random_field(fwd.height(), fwd.width(), rng).cwiseProduct(fwd.mask.weights().cast<std::complex<double>>()));
  return y;
}

std::complex<double> measurement_inner(const Measurements& a, const Measurements& b) {
  std::complex<double> s = 0.0;
  for (size_t c = 0; c < a.coils.size(); ++c) s += inner_product(a.coils[c], b.coils[c]);
  return s;
}

double measurement_norm(const Measurements& a) {
  double s = 0.0;
  for (const auto& c : a.coils) s += c.squaredNorm();
  return std::sqrt(s);
}

bool check_fft(Rng& rng) {
  for (Index n : {4, 8, 16, 32}) {
    const ComplexField x = random_field(n, n, rng);
    if ((fft2c(x) - dft2c_reference(x)).cwiseAbs().maxCoeff() >= 1e-10) return false;
  }
  return true;
}

bool check_adjoint(Rng& rng, Index coils) {
  const SampleMask mask = generate_mask({.kind = MaskKind::random, .height = 32, .width = 32, .seed = 5});
  const ForwardConfig fwd = coils == 1 ? single_coil(mask) : multi_coil(mask, synth_coil_maps(coils, 32));
  for (int t = 0; t < 10; ++t) {
    const ComplexField x = random_field(32, 32, rng);
    const Measurements y = random_measurements(fwd, rng);
    const Measurements ax = forward(fwd, x);
    const double err = std::abs(measurement_inner(ax, y) - inner_product(x, adjoint(fwd, y)));
    if (err / (measurement_norm(ax) * measurement_norm(y) + 1e-30) >= 1e-10) return false;
  }
  return true;
}

FeatureMap dense_binomial(const FeatureMap& u) {
  FeatureMap out(u.channels, u.height, u.width);
  for (Index c = 0; c < u.channels; ++c)
    for (Index i = 0; i < u.height; ++i)
      for (Index j = 0; j < u.width; ++j) {
        double s = 0.0;
        for (int a = -2; a <= 2; ++a)
          for (int b = -2; b <= 2; ++b)
            s += kBinomialTaps[a + 2] * kBinomialTaps[b + 2] *
                 u.at(c, reflect_index(i + a, u.height), reflect_index(j + b, u.width));
        out.at(c, i, j) = s;
      }
  return out;
}

bool check_binomial(Rng& rng) {
  for (int t = 0; t < 5; ++t) {
    const FeatureMap u = random_map(4, 16, 16, rng);
    if ((binomial_project(u).data - dense_binomial(u).data).cwiseAbs().maxCoeff() >= 1e-12) return false;
  }
  FeatureMap board(2, 16, 16);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) board.at(0, i, j) = board.at(1, i, j) = ((i + j) % 2 == 0) ? 1.0 : -1.0;
  return binomial_project(board).data.cwiseAbs().maxCoeff() < 1e-12;
}

SsmParams random_params(Index n, const SsmConfig& cfg, Rng& rng) {
  const Index heads = cfg.heads();
  const Index width = cfg.interface_width();
  SsmParams p;
  p.delta.resize(n, heads);
  p.lambda.resize(n, heads);
  p.a.resize(heads);
  p.b.resize(n, width);
  p.c.resize(n, width);
  for (Index k = 0; k < p.delta.size(); ++k) p.delta.data()[k] = rng.uniform(0.01, 0.5);
  for (Index k = 0; k < p.lambda.size(); ++k) p.lambda.data()[k] = rng.uniform01();
  for (Index h = 0; h < heads; ++h) p.a(h) = -rng.uniform(0.1, 2.0);
  for (Index k = 0; k < p.b.size(); ++k) p.b.data()[k] = rng.gaussian() * 0.5;
  for (Index k = 0; k < p.c.size(); ++k) p.c.data()[k] = rng.gaussian() * 0.5;
  p.b_mod = p.b;
  p.c_mod = p.c;
  return p;
}

bool check_scan(Rng& rng) {
  SsmConfig cfg;
  cfg.d_model = 64;
  cfg.expand = 1;
  for (Index n : {64, 256}) {
    RowMatrix<double> u(n, cfg.d_inner());
    for (Index k = 0; k < u.size(); ++k) u.data()[k] = rng.gaussian();
    const SsmParams p = random_params(n, cfg, rng);
    const ScanOutput a = selective_scan_sequential(u, p, cfg);
    const ScanOutput b = selective_scan_chunked(u, p, cfg);
    if ((a.readout - b.readout).cwiseAbs().maxCoeff() >= 1e-9) return false;
    if ((a.states - b.states).cwiseAbs().maxCoeff() >= 1e-9) return false;
  }

  SsmConfig siso;
  siso.d_model = 1;
  siso.expand = 1;
  siso.d_head = 1;
  siso.rank = 1;
  siso.d_state = 1;
  RowMatrix<double> u(2, 1);
  u << 1.0, 0.0;
  SsmParams p;
  p.delta = RowMatrix<double>::Constant(2, 1, 1.0);
  p.lambda = RowMatrix<double>::Constant(2, 1, 0.5);
  p.a = Eigen::VectorXd::Zero(1);
  p.b = p.c = p.b_mod = p.c_mod = RowMatrix<double>::Ones(2, 1);
  for (const auto& out : {selective_scan_sequential(u, p, siso), selective_scan_chunked(u, p, siso)}) {
    if (out.states(0, 0) != 0.5 || out.states(1, 0) != 1.0) return false;
    if (out.readout(0, 0) != 0.5 || out.readout(1, 0) != 1.0) return false;
  }
  return true;
}

ModelConfig small_model() {
  ModelConfig cfg;
  cfg.groups = 1;
  cfg.units_per_group = 1;
  cfg.seed = 11;
  return cfg;
}

bool check_ownership(Rng& rng) {
  const ModelConfig cfg = small_model();
  const ModelWeights w = init_weights(cfg);
  const UnitWeights& uw = w.units[0];
  const Index dm = cfg.unit.ssm.d_model;
  const FeatureMap x = random_map(dm, 8, 8, rng);
  const Eigen::MatrixXd base = content_tokens(x, uw, AblationSwitches{});
  for (int t = 0; t < 10; ++t) {
    FeatureMap xp = x;
    xp.data.bottomRows(dm / 2) += random_map(dm / 2, 8, 8, rng).data;
    if (content_tokens(xp, uw, AblationSwitches{}) != base) return false;
  }

  AblationSwitches closed;
  closed.state_access = false;
  closed.output_outlet = false;
  OwnershipStreams streams = route(x, uw.router);
  const FeatureMap y = so_unit_forward(streams, uw, closed, cfg.unit, false).y;
  streams.evidence.data.setZero();
  return so_unit_forward(streams, uw, closed, cfg.unit, false).y == y;
}

bool check_dc(Rng& rng) {
  const ForwardConfig fwd = single_coil(generate_mask({.height = 32, .width = 32}));
  const Measurements y = random_measurements(fwd, rng);
  const ComplexField z = random_field(32, 32, rng);
  const auto k = dc_kspace(z, y, fwd);
  for (Index i = 0; i < 32; ++i)
    for (Index j = 0; j < 32; ++j)
      if (fwd.mask.bits(i, j) && k[0](i, j) != y.coils[0](i, j)) return false;

  const ComplexField once = data_consistency(z, y, fwd);
  if ((data_consistency(once, y, fwd) - once).cwiseAbs().maxCoeff() >= 1e-12) return false;

  const ComplexField x = random_field(32, 32, rng);
  return (data_consistency(x, forward(fwd, x), fwd) - x).cwiseAbs().maxCoeff() < 1e-12;
}

bool check_leakage(Rng& rng) {
  FeatureMap flat(3, 32, 32);
  flat.data.setConstant(2.5);
  if (outer_band_leakage(flat, 0.25) != 0.0) return false;

  const FeatureMap z = random_map(4, 32, 32, rng);
  FeatureMap scaled = z;
  scaled.data *= 37.0;
  if (std::abs(outer_band_leakage(z, 0.3) - outer_band_leakage(scaled, 0.3)) >= 1e-10) return false;

  double prev = 2.0;
  for (int k = 0; k < 20; ++k) {
    const double v = outer_band_leakage(z, 1.5 * k / 19.0);
    if (v > prev) return false;
    prev = v;
  }

  for (double r : kDefaultCutoffs) {
    double bins = 0.0;
    for (Index i = 0; i < 32; ++i)
      for (Index j = 0; j < 32; ++j) bins += radial_frequency(i, j, 32, 32) > r ? 1.0 : 0.0;
    double mean = 0.0;
    for (int t = 0; t < 16; ++t) mean += outer_band_leakage(random_map(1, 32, 32, rng), r) / 16.0;
    if (std::abs(mean - bins / 1024.0) > 0.02) return false;
  }
  return true;
}

bool check_metrics(Rng& rng) {
  if (psnr_from_mse(0.01, 1.0) != 20.0) return false;
  RealImage x(32, 32);
  for (Index k = 0; k < x.size(); ++k) x.data()[k] = rng.uniform01();
  return std::abs(ssim(x, x, 1.0) - 1.0) < 1e-9;
}

}  // namespace

int selftest(std::ostream& out) {
  Rng rng(2024);
  const std::vector<std::pair<const char*, std::function<bool()>>> checks{
      {"fft matches reference DFT", [&] { return check_fft(rng); }},
      {"adjoint identity, single coil", [&] { return check_adjoint(rng, 1); }},
      {"adjoint identity, 4 coils", [&] { return check_adjoint(rng, 4); }},
      {"separable binomial matches dense 5x5", [&] { return check_binomial(rng); }},
      {"chunked scan matches sequential", [&] { return check_scan(rng); }},
      {"ownership exclusion", [&] { return check_ownership(rng); }},
      {"data consistency", [&] { return check_dc(rng); }},
      {"leakage calibration", [&] { return check_leakage(rng); }},
      {"psnr and ssim", [&] { return check_metrics(rng); }},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      out << "  (" << e.what() << ")\n";
    }
    out << (ok ? "PASS " : "FAIL ") << name << '\n';
    failures += ok ? 0 : 1;
  }
  return failures;
}

}  // namespace ownrecon::cli

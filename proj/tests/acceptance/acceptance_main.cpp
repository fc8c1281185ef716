// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "json.hpp"
#include "ownrecon/diagnostics.hpp"
#include "ownrecon/phantoms.hpp"
#include "ownrecon/rng.hpp"
#include "ownrecon/unroll.hpp"

using namespace ownrecon;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

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
  const auto w = fwd.mask.weights().cast<std::complex<double>>();
  for (Index c = 0; c < fwd.coils(); ++c) y.coils.push_back(random_field(fwd.height(), fwd.width(), rng).cwiseProduct(w));
  return y;
}

// 1. Centered orthonormal FFT against the direct DFT.
Verdict fft_matches_dft() {
  const auto t0 = Clock::now();
  Rng rng(1);
  Verdict v;
  double worst = 0.0;
  for (Index n : {4, 8, 16, 32, 64}) {
    const ComplexField x = random_field(n, n, rng);
    worst = std::max(worst, (fft2c(x) - dft2c_reference(x)).cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(t0);
  v.require(worst < 1e-10, "max error " + fmt(worst));
  v.require(t < 10.0, "took " + fmt(t) + " s");
  if (v.ok) v.detail = "max error " + fmt(worst) + ", " + fmt(t) + " s";
  return v;
}

// 2. <A x, y> = <x, A^H y> for single- and multi-coil operators.
Verdict adjoint_identity() {
  const auto t0 = Clock::now();
  Rng rng(2);
  Verdict v;
  double worst = 0.0;
  const SampleMask mask = generate_mask({.kind = MaskKind::equispaced, .height = 64, .width = 64, .acceleration = 4.0});
  for (const ForwardConfig& fwd : {single_coil(mask), multi_coil(mask, synth_coil_maps(4, 64))}) {
    for (int t = 0; t < 100; ++t) {
      const ComplexField x = random_field(64, 64, rng);
      const Measurements y = random_measurements(fwd, rng);
      const Measurements ax = forward(fwd, x);
      std::complex<double> lhs = 0.0;
      double nax = 0.0, ny = 0.0;
      for (size_t c = 0; c < ax.coils.size(); ++c) {
        lhs += inner_product(ax.coils[c], y.coils[c]);
        nax += ax.coils[c].squaredNorm();
        ny += y.coils[c].squaredNorm();
      }
      const double rel = std::abs(lhs - inner_product(x, adjoint(fwd, y))) / std::sqrt(nax * ny);
      worst = std::max(worst, rel);
    }
  }
  const double t = seconds_since(t0);
  v.require(worst < 1e-10, "relative error " + fmt(worst));
  v.require(t < 30.0, "took " + fmt(t) + " s");
  if (v.ok) v.detail = "relative error " + fmt(worst) + ", " + fmt(t) + " s";
  return v;
}

// 3. Separable binomial equals the dense mirrored 5x5 stencil; it removes a checkerboard.
Verdict binomial_kernel() {
  Rng rng(3);
  Verdict v;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const FeatureMap u = random_map(8, 32, 32, rng);
    const FeatureMap fast = binomial_project(u);
    for (Index c = 0; c < 8; ++c)
      for (Index i = 0; i < 32; ++i)
        for (Index j = 0; j < 32; ++j) {
          double s = 0.0;
          for (int a = -2; a <= 2; ++a)
            for (int b = -2; b <= 2; ++b)
              s += kBinomialTaps[a + 2] * kBinomialTaps[b + 2] * u.at(c, reflect_index(i + a, 32), reflect_index(j + b, 32));
          worst = std::max(worst, std::abs(fast.at(c, i, j) - s));
        }
  }
  FeatureMap board(8, 32, 32);
  for (Index c = 0; c < 8; ++c)
    for (Index i = 0; i < 32; ++i)
      for (Index j = 0; j < 32; ++j) board.at(c, i, j) = ((i + j) % 2 == 0) ? 1.0 : -1.0;
  const double residue = binomial_project(board).data.cwiseAbs().maxCoeff();
  v.require(worst <= 1e-12, "dense mismatch " + fmt(worst));
  v.require(residue <= 1e-12, "checkerboard residue " + fmt(residue));
  if (v.ok) v.detail = "dense mismatch " + fmt(worst) + ", checkerboard residue " + fmt(residue);
  return v;
}

SsmParams random_params(Index n, const SsmConfig& cfg, Rng& rng) {
  SsmParams p;
  p.delta.resize(n, cfg.heads());
  p.lambda.resize(n, cfg.heads());
  p.a.resize(cfg.heads());
  p.b.resize(n, cfg.interface_width());
  p.c.resize(n, cfg.interface_width());
  for (Index k = 0; k < p.delta.size(); ++k) p.delta.data()[k] = rng.uniform(0.001, 0.1);
  for (Index k = 0; k < p.lambda.size(); ++k) p.lambda.data()[k] = rng.uniform01();
  for (Index h = 0; h < cfg.heads(); ++h) p.a(h) = -rng.uniform(0.1, 2.0);
  for (Index k = 0; k < p.b.size(); ++k) p.b.data()[k] = 0.5 * rng.gaussian();
  for (Index k = 0; k < p.c.size(); ++k) p.c.data()[k] = 0.5 * rng.gaussian();
  p.b_mod = p.b;
  p.c_mod = p.c;
  return p;
}

// 4. Chunked scan equals the sequential recurrence; the SISO example is exact.
Verdict scan_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(4);
  Verdict v;
  const SsmConfig cfg;
  double worst = 0.0;
  for (Index n : {64, 1024, 4096}) {
    for (int t = 0; t < 50; ++t) {
      RowMatrix<double> u(n, cfg.d_inner());
      for (Index k = 0; k < u.size(); ++k) u.data()[k] = rng.gaussian();
      const SsmParams p = random_params(n, cfg, rng);
      const ScanOutput a = selective_scan_sequential(u, p, cfg);
      const ScanOutput b = selective_scan_chunked(u, p, cfg);
      worst = std::max({worst, (a.readout - b.readout).cwiseAbs().maxCoeff(), (a.states - b.states).cwiseAbs().maxCoeff()});
    }
  }

  SsmConfig siso;
  siso.d_model = siso.d_head = siso.rank = siso.d_state = siso.expand = 1;
  RowMatrix<double> u(2, 1);
  u << 1.0, 0.0;
  SsmParams p;
  p.delta = RowMatrix<double>::Constant(2, 1, 1.0);
  p.lambda = RowMatrix<double>::Constant(2, 1, 0.5);
  p.a = Eigen::VectorXd::Zero(1);
  p.b = p.c = p.b_mod = p.c_mod = RowMatrix<double>::Ones(2, 1);
  bool siso_ok = true;
  for (const auto& out : {selective_scan_sequential(u, p, siso), selective_scan_chunked(u, p, siso)})
    siso_ok = siso_ok && out.states(0, 0) == 0.5 && out.states(1, 0) == 1.0 && out.readout(0, 0) == 0.5 &&
              out.readout(1, 0) == 1.0;

  const double t = seconds_since(t0);
  v.require(worst < 1e-9, "max difference " + fmt(worst));
  v.require(siso_ok, "SISO example mismatch");
  v.require(t < 60.0, "took " + fmt(t) + " s");
  if (v.ok) v.detail = "max difference " + fmt(worst) + ", SISO exact, " + fmt(t) + " s";
  return v;
}

// 5. Content tokens ignore the evidence pool; closed routes make Y ignore G.
Verdict ownership_exclusion() {
  Rng rng(5);
  Verdict v;
  ModelConfig cfg;
  cfg.groups = 1;
  cfg.units_per_group = 1;
  cfg.seed = 21;
  const ModelWeights w = init_weights(cfg);
  const UnitWeights& uw = w.units[0];
  const Index dm = cfg.unit.ssm.d_model;
  const FeatureMap x = random_map(dm, 16, 16, rng);
  const Eigen::MatrixXd base = content_tokens(x, uw, AblationSwitches{});
  int changed = 0;
  for (int t = 0; t < 100; ++t) {
    FeatureMap xp = x;
    xp.data.bottomRows(dm / 2) += random_map(dm / 2, 16, 16, rng).data * rng.uniform(0.1, 10.0);
    if (content_tokens(xp, uw, AblationSwitches{}) != base) ++changed;
  }

  AblationSwitches closed;
  closed.state_access = false;
  closed.output_outlet = false;
  OwnershipStreams streams = route(x, uw.router);
  const FeatureMap y = so_unit_forward(streams, uw, closed, cfg.unit, false).y;
  streams.evidence.data.setZero();
  const bool y_same = so_unit_forward(streams, uw, closed, cfg.unit, false).y == y;

  v.require(changed == 0, std::to_string(changed) + " of 100 perturbations changed the tokens");
  v.require(y_same, "zeroing G changed Y with both routes closed");
  if (v.ok) v.detail = "100/100 token sets bit-identical, Y bit-identical";
  return v;
}

// 6. Hard DC: exact copy on sampled bins, idempotent, fixed point on consistent data.
Verdict data_consistency_exact() {
  Rng rng(6);
  Verdict v;
  const SampleMask mask = generate_mask({.kind = MaskKind::random, .height = 64, .width = 64, .acceleration = 4.0, .seed = 9});
  double idem = 0.0, fixed = 0.0;
  bool copied = true;
  for (const ForwardConfig& fwd : {single_coil(mask), multi_coil(mask, synth_coil_maps(4, 64))}) {
    const Measurements y = random_measurements(fwd, rng);
    const ComplexField z = random_field(64, 64, rng);
    const auto k = dc_kspace(z, y, fwd);
    for (size_t c = 0; c < k.size(); ++c)
      for (Index i = 0; i < 64; ++i)
        for (Index j = 0; j < 64; ++j) copied = copied && (!mask.bits(i, j) || k[c](i, j) == y.coils[c](i, j));
    if (fwd.coils() == 1) {
      const ComplexField once = data_consistency(z, y, fwd);
      idem = (data_consistency(once, y, fwd) - once).cwiseAbs().maxCoeff();
    }
    const ComplexField x = random_field(64, 64, rng);
    fixed = std::max(fixed, (data_consistency(x, forward(fwd, x), fwd) - x).cwiseAbs().maxCoeff());
  }
  v.require(copied, "sampled bins not copied exactly");
  v.require(idem <= 1e-12, "idempotence error " + fmt(idem));
  v.require(fixed <= 1e-12, "fixed-point error " + fmt(fixed));
  if (v.ok) v.detail = "exact copy, idempotence " + fmt(idem) + ", fixed point " + fmt(fixed);
  return v;
}

// 7. Leakage calibration.
Verdict leakage_calibration() {
  Rng rng(7);
  Verdict v;
  FeatureMap flat(4, 64, 64);
  flat.data.setConstant(3.0);
  double flat_leak = 0.0;
  for (double r : kDefaultCutoffs) flat_leak = std::max(flat_leak, outer_band_leakage(flat, r));
  v.require(flat_leak == 0.0, "constant field leaks " + fmt(flat_leak));

  double worst_noise = 0.0;
  for (double r : kDefaultCutoffs) {
    double bins = 0.0;
    for (Index i = 0; i < 64; ++i)
      for (Index j = 0; j < 64; ++j) bins += radial_frequency(i, j, 64, 64) > r ? 1.0 : 0.0;
    double mean = 0.0;
    for (int t = 0; t < 64; ++t) mean += outer_band_leakage(random_map(1, 64, 64, rng), r) / 64.0;
    worst_noise = std::max(worst_noise, std::abs(mean - bins / 4096.0));
  }
  v.require(worst_noise <= 0.02, "white noise off by " + fmt(worst_noise));

  const FeatureMap z = random_map(4, 64, 64, rng);
  bool monotone = true;
  double prev = 2.0;
  for (int k = 0; k < 20; ++k) {
    const double l = outer_band_leakage(z, std::sqrt(2.0) * k / 19.0);
    monotone = monotone && l <= prev;
    prev = l;
  }
  v.require(monotone, "leakage not monotone in r");

  double scale_err = 0.0;
  for (double s : {1e-3, 7.0, 1e4}) {
    FeatureMap scaled = z;
    scaled.data *= s;
    for (double r : kDefaultCutoffs)
      scale_err = std::max(scale_err, std::abs(outer_band_leakage(scaled, r) - outer_band_leakage(z, r)));
  }
  v.require(scale_err < 1e-10, "scale error " + fmt(scale_err));
  if (v.ok) v.detail = "noise deviation " + fmt(worst_noise) + ", scale error " + fmt(scale_err);
  return v;
}

// 8. Metric anchors.
Verdict metric_anchors() {
  Rng rng(8);
  Verdict v;
  RealImage ref = RealImage::Zero(64, 64);
  ref(0, 0) = 1.0;
  RealImage est = ref;
  for (Index k = 0; k < est.size(); ++k) est.data()[k] += (k % 2 == 0 ? 0.1 : -0.1);
  const double p = psnr(ref, est, 1.0);
  RealImage x(64, 64);
  for (Index k = 0; k < x.size(); ++k) x.data()[k] = rng.uniform01();
  const double s = ssim(x, x, 1.0);
  v.require(std::abs(p - 20.0) < 1e-9, "psnr " + fmt(p));
  v.require(std::abs(s - 1.0) < 1e-9, "ssim " + fmt(s));
  if (v.ok) v.detail = "psnr 20 dB, ssim(x, x) 1";
  return v;
}

RealImage magnitude(const ComplexField& x) { return x.cwiseAbs(); }

// 9. End-to-end reconstruction on a 128 x 128 Shepp-Logan slice at 4x.
Verdict end_to_end() {
  Verdict v;
  const ModelConfig cfg;
  const ComplexField truth = make_phantom(PhantomKind::shepp_logan, 128);
  const ForwardConfig fwd =
      single_coil(generate_mask({.kind = MaskKind::equispaced, .height = 128, .width = 128, .acceleration = 4.0}));
  const Measurements y = simulate(truth, fwd, 0.01, 17);
  const ModelWeights w = init_weights(cfg);

  const auto t0 = Clock::now();
  const ReconResult r = reconstruct(y, fwd, w, cfg);
  const double t = seconds_since(t0);
  v.require(t < 60.0, "took " + fmt(t) + " s");
  v.require(static_cast<Index>(r.probes.size()) == cfg.total_units(), std::to_string(r.probes.size()) + " probes");

  bool exact = true;
  for (Index i = 0; i < 128; ++i)
    for (Index j = 0; j < 128; ++j) exact = exact && (!fwd.mask.bits(i, j) || r.final_kspace[0](i, j) == y.coils[0](i, j));
  v.require(exact, "sampled k-space not reproduced exactly");

  const ReconResult again = reconstruct(y, fwd, w, cfg, false);
  v.require(again.image == r.image, "repeat run differs");

  ModelWeights silent = w;
  zero_decoders(silent);
  const ReconResult zero = reconstruct(y, fwd, silent, cfg, false);
  const RealImage ref = magnitude(truth);
  const double pz = psnr(ref, magnitude(zero.image));
  const double p0 = psnr(ref, magnitude(zero.zero_filled));
  v.require(pz == p0, "zero-decode psnr " + fmt(pz) + " vs zero-filled " + fmt(p0));
  if (v.ok)
    v.detail = fmt(t) + " s, " + std::to_string(r.probes.size()) + " probes, exact k-space, repeatable, zero-decode psnr " +
               fmt(pz) + " dB";
  return v;
}

// 10. Ablation: every variant reports both cutoffs; the residency violation changes content tokens.
Verdict ablation() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "ownrecon_acceptance_ablate";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const nlohmann::json config{{"case", "acceptance"},
                              {"phantom", {{"kind", "shepp_logan"}, {"size", 32}}},
                              {"mask", {{"kind", "equispaced"}, {"acceleration", 4.0}}},
                              {"noise", {{"std", 0.01}, {"seed", 1}}},
                              {"output_dir", (dir / "out").string()}};
  std::ofstream(dir / "run.json") << config.dump(2);
  std::ostringstream out, err;
  const int code = cli::run({"ablate", "--config", (dir / "run.json").string()}, out, err);
  v.require(code == 0, "ablate exited " + std::to_string(code) + ": " + err.str());
  if (code != 0) return v;

  std::ifstream rs(dir / "out" / "report.json");
  const auto report = nlohmann::json::parse(rs);
  std::set<std::pair<std::string, double>> cells;
  bool finite = true;
  for (const auto& row : report) {
    cells.insert({row["variant"].get<std::string>(), row["r"].get<double>()});
    for (const char* key : {"hleak", "rleak", "eta"}) finite = finite && std::isfinite(row[key].get<double>());
  }
  std::ifstream ss(dir / "out" / "ablation.json");
  const auto summary = nlohmann::json::parse(ss);
  const bool differs = summary["content_token_check"]["differs"].get<bool>();
  v.require(report.size() == 16 && cells.size() == 16, std::to_string(cells.size()) + " distinct (variant, r) rows");
  v.require(finite, "non-finite leakage value");
  v.require(differs, "residency violation left content tokens unchanged");
  if (v.ok)
    v.detail = "8 variants x 2 cutoffs, token max |diff| " +
               fmt(summary["content_token_check"]["max_abs_diff"].get<double>());
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"fft matches direct DFT", fft_matches_dft},
      {"adjoint identity", adjoint_identity},
      {"binomial kernel", binomial_kernel},
      {"chunked scan equivalence", scan_equivalence},
      {"ownership exclusion", ownership_exclusion},
      {"data consistency", data_consistency_exact},
      {"leakage calibration", leakage_calibration},
      {"psnr and ssim anchors", metric_anchors},
      {"end-to-end reconstruction", end_to_end},
      {"ablation report", ablation},
  };
  int failures = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::cout << (v.ok ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first << " (" << v.detail
              << ")" << std::endl;
    failures += v.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

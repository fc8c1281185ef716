#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "ownrecon/field_io.hpp"

namespace ownrecon::cli {

namespace fs = std::filesystem;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::usage: return kUsage;
    case ErrorKind::io: return kIo;
    case ErrorKind::format: return kFormat;
    case ErrorKind::shape: return kShape;
    case ErrorKind::data_integrity: return kDataIntegrity;
    case ErrorKind::capability: return kCapability;
    case ErrorKind::domain: return kDomain;
  }
  return kInternal;
}

// -- run config -----------------------------------------------------------------

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : base / p; }

fs::path default_output_dir() {
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

}  // namespace

RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
  StrictObject obj(j, "");
  RunConfig c;
  c.case_name = obj.get<std::string>("case", c.case_name);

  StrictObject ph = obj.object("phantom");
  c.phantom.kind = parse_phantom_kind(ph.get<std::string>("kind", "shepp_logan"));
  c.phantom.size = ph.get<Index>("size", c.phantom.size);
  c.phantom.seed = ph.get<std::uint64_t>("seed", c.phantom.seed);
  ph.finish();

  c.coils = obj.get<Index>("coils", c.coils);
  if (c.coils < 1) throw ConfigError("'coils' must be >= 1");

  // Sizes default to the phantom, image channels to the coil count.
  Json mask = j.contains("mask") ? j.at("mask") : Json::object();
  if (!mask.is_object()) throw ConfigError("'mask' must be an object");
  if (!mask.contains("height")) mask["height"] = c.phantom.size;
  if (!mask.contains("width")) mask["width"] = c.phantom.size;
  obj.object("mask");
  c.mask = mask_spec_from_json(StrictObject(mask, "mask"));
  if (c.mask.height != c.phantom.size || c.mask.width != c.phantom.size)
    throw ConfigError("'mask' size must match 'phantom.size'");

  Json model = j.contains("model") ? j.at("model") : Json::object();
  if (!model.is_object()) throw ConfigError("'model' must be an object");
  if (!model.contains("image_channels")) model["image_channels"] = 2 * c.coils;
  obj.object("model");
  c.model = model_config_from_json(StrictObject(model, "model"));

  StrictObject noise = obj.object("noise");
  c.noise_std = noise.get<double>("std", c.noise_std);
  c.noise_seed = noise.get<std::uint64_t>("seed", c.noise_seed);
  noise.finish();
  if (!(c.noise_std >= 0.0)) throw ConfigError("'noise.std' must be >= 0");

  c.slices = obj.get<Index>("slices", c.slices);
  if (c.slices < 1) throw ConfigError("'slices' must be >= 1");

  const auto out = obj.optional<std::string>("output_dir");
  c.output_dir = out ? resolve(*out, base_dir) : default_output_dir();
  if (const auto wp = obj.optional<std::string>("weights_path")) c.weights_path = resolve(*wp, base_dir);
  c.save_weights = obj.get<bool>("save_weights", c.save_weights);
  c.zero_decode = obj.get<bool>("zero_decode", c.zero_decode);
  c.write_probes = obj.get<bool>("write_probes", c.write_probes);
  obj.finish();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

// -- pipeline -------------------------------------------------------------------

ModelWeights run_weights(const RunConfig& cfg) {
  ModelWeights w = cfg.weights_path ? load_weights(*cfg.weights_path, cfg.model) : init_weights(cfg.model);
  if (cfg.zero_decode) zero_decoders(w);
  return w;
}

namespace {

ForwardConfig make_operator(const RunConfig& cfg) {
  SampleMask mask = generate_mask(cfg.mask);
  if (cfg.coils == 1) return single_coil(std::move(mask));
  return multi_coil(std::move(mask), synth_coil_maps(cfg.coils, cfg.phantom.size));
}

SliceResult run_one_slice(const RunConfig& cfg, const ForwardConfig& fwd, const ModelWeights& w, Index s,
                          bool capture_probes) {
  SliceResult r;
  const auto offset = static_cast<std::uint64_t>(s);
  r.truth = make_phantom(cfg.phantom.kind, cfg.phantom.size, cfg.phantom.seed + offset);
  const Measurements y = simulate(r.truth, fwd, cfg.noise_std, cfg.noise_seed + offset);
  r.recon = reconstruct(y, fwd, w, cfg.model, capture_probes);

  const RealImage ref = magnitude(r.truth);
  const double peak = ref.maxCoeff();
  const RealImage est = magnitude(r.recon.image);
  const RealImage zf = magnitude(r.recon.zero_filled);
  r.psnr = psnr(ref, est, peak);
  r.ssim = ssim(ref, est, peak);
  r.zero_filled_psnr = psnr(ref, zf, peak);
  r.zero_filled_ssim = ssim(ref, zf, peak);
  return r;
}

template <typename Fn>
void for_each_index(Index n, unsigned jobs, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (Index i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<SliceResult> run_slices_impl(const RunConfig& cfg, const ModelWeights& w, unsigned jobs,
                                         bool capture_probes) {
  const ForwardConfig fwd = make_operator(cfg);
  std::vector<SliceResult> results(static_cast<size_t>(cfg.slices));
  for_each_index(cfg.slices, jobs,
                 [&](Index s) { results[static_cast<size_t>(s)] = run_one_slice(cfg, fwd, w, s, capture_probes); });
  return results;
}

}  // namespace

std::vector<SliceResult> run_slices(const RunConfig& cfg, const ModelWeights& weights, unsigned jobs) {
  return run_slices_impl(cfg, weights, jobs, true);
}

std::vector<AblationVariant> ablation_variants() {
  AblationSwitches so;  // full ownership layout
  AblationSwitches plain{.use_sor = false, .state_access = false, .output_outlet = false};
  AblationSwitches router_only{.state_access = false, .output_outlet = false};
  AblationSwitches no_access{.state_access = false};
  AblationSwitches no_outlet{.output_outlet = false};
  AblationSwitches residency{.content_residency_violation = true};
  AblationSwitches tied_ad{.tie_a_delta = true};
  AblationSwitches tied_bc{.tie_b_c = true};
  return {{"mamba_regularizer", plain}, {"sor_router", router_only},  {"no_state_access", no_access},
          {"no_output_outlet", no_outlet}, {"content_residency", residency}, {"so_mamba", so},
          {"tied_a_delta", tied_ad},    {"tied_b_c", tied_bc}};
}

// -- subcommands ----------------------------------------------------------------

namespace {

std::string variant_label(const AblationSwitches& sw) {
  for (const auto& v : ablation_variants())
    if (v.switches == sw) return v.name;
  return "custom";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

fs::path slice_dir(const fs::path& out, Index s) { return out / ("slice" + std::to_string(s)); }

void write_probes(const fs::path& dir, const std::vector<UnitProbe>& probes) {
  ensure_dir(dir);
  for (size_t u = 0; u < probes.size(); ++u) {
    write_field(dir / ("unit" + std::to_string(u) + "_hidden.fld"), to_field_file(probes[u].hidden_grid));
    write_field(dir / ("unit" + std::to_string(u) + "_readout.fld"), to_field_file(probes[u].readout_grid));
  }
}

std::vector<UnitProbe> read_probes(const fs::path& dir) {
  std::vector<UnitProbe> probes;
  for (size_t u = 0;; ++u) {
    const fs::path hidden = dir / ("unit" + std::to_string(u) + "_hidden.fld");
    const fs::path readout = dir / ("unit" + std::to_string(u) + "_readout.fld");
    if (!fs::exists(hidden) && !fs::exists(readout)) break;
    probes.push_back({feature_map(read_field(hidden)), feature_map(read_field(readout))});
  }
  return probes;
}

std::vector<ReportRow> report_rows(const std::string& case_name, const std::string& variant,
                                   const LeakageReport& report) {
  std::vector<ReportRow> rows;
  for (const auto& row : report.per_case) rows.push_back({case_name, variant, row});
  return rows;
}

LeakageReport leakage_of(const std::vector<SliceResult>& results) {
  std::vector<std::vector<UnitProbe>> slices;
  for (const auto& r : results) slices.push_back(r.recon.probes);
  return leakage_report(slices, kDefaultCutoffs);
}

void write_reports(const fs::path& dir, const std::vector<ReportRow>& rows) {
  ensure_dir(dir);
  write_text(dir / "report.csv", report_csv(rows));
  write_text(dir / "report.json", report_json(rows));
}

int cmd_phantom(const std::string& kind, Index size, std::uint64_t seed, const std::string& out_arg,
                std::ostream& out) {
  const fs::path path = out_arg.empty() ? default_output_dir() / "phantom.fld" : fs::path(out_arg);
  const ComplexField x = make_phantom(parse_phantom_kind(kind), size, seed);
  write_field(path, to_field_file(x));
  out << "wrote " << path.string() << " (" << size << "x" << size << ")\n";
  return kOk;
}

struct MaskArgs {
  std::string kind = "equispaced";
  Index width = 128;
  Index height = 0;
  double af = 4.0;
  std::optional<double> center_frac;
  std::optional<int> spokes;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_mask(const MaskArgs& a, std::ostream& out) {
  MaskSpec spec;
  spec.kind = parse_mask_kind(a.kind);
  spec.width = a.width;
  spec.height = a.height > 0 ? a.height : a.width;
  spec.acceleration = a.af;
  spec.center_fraction = a.center_frac;
  spec.spokes = a.spokes;
  spec.seed = a.seed;
  const SampleMask mask = generate_mask(spec);

  out << "sampled columns:";
  for (Index c : mask.sampled_columns()) out << ' ' << c;
  out << "\nsampled fraction: " << mask.sampled_fraction() << '\n';
  if (!a.out.empty()) {
    write_field(a.out, to_field_file(mask));
    out << "wrote " << a.out << '\n';
  }
  return kOk;
}

struct SimulateArgs {
  std::string image;
  std::string mask;
  Index coils = 1;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.coils < 1) throw UsageError("--coils must be >= 1");
  const ComplexField x = complex_field(read_field(a.image));
  SampleMask mask = sample_mask(read_field(a.mask));
  require_same_shape(x, ComplexField(mask.height, mask.width), "simulate image vs mask");
  const ForwardConfig fwd = a.coils == 1 ? single_coil(std::move(mask))
                                         : multi_coil(std::move(mask), synth_coil_maps(a.coils, x.rows()));
  const Measurements y = simulate(x, fwd, a.noise_std, a.seed);
  const fs::path path = a.out.empty() ? default_output_dir() / "kspace.fld" : fs::path(a.out);
  write_field(path, to_field_file(y.coils));
  out << "wrote " << path.string() << " (" << y.coils.size() << " coil(s))\n";
  return kOk;
}

nlohmann::ordered_json slice_metrics(const SliceResult& r, Index s) {
  nlohmann::ordered_json j;
  j["slice"] = s;
  j["psnr"] = r.psnr;
  j["ssim"] = r.ssim;
  j["zero_filled_psnr"] = r.zero_filled_psnr;
  j["zero_filled_ssim"] = r.zero_filled_ssim;
  j["probes"] = r.recon.probes.size();
  j["dc_calls"] = r.recon.dc_calls;
  return j;
}

RunConfig config_with_out(const std::string& config_path, const std::string& out_arg) {
  RunConfig cfg = load_run_config(config_path);
  if (!out_arg.empty()) cfg.output_dir = out_arg;
  return cfg;
}

int cmd_recon(const std::string& config_path, const std::string& out_arg, unsigned jobs, std::ostream& out) {
  const RunConfig cfg = config_with_out(config_path, out_arg);
  const ModelWeights w = run_weights(cfg);
  const auto results = run_slices_impl(cfg, w, jobs, true);

  ensure_dir(cfg.output_dir);
  nlohmann::ordered_json metrics;
  metrics["case"] = cfg.case_name;
  metrics["variant"] = variant_label(cfg.model.switches);
  metrics["slices"] = nlohmann::ordered_json::array();
  for (size_t s = 0; s < results.size(); ++s) {
    const auto& r = results[s];
    const fs::path dir = slice_dir(cfg.output_dir, static_cast<Index>(s));
    ensure_dir(dir);
    write_field(dir / "x_hat.fld", to_field_file(r.recon.image));
    write_field(dir / "zero_filled.fld", to_field_file(r.recon.zero_filled));
    write_field(dir / "truth.fld", to_field_file(r.truth));
    if (cfg.write_probes) write_probes(dir / "probes", r.recon.probes);
    metrics["slices"].push_back(slice_metrics(r, static_cast<Index>(s)));
    out << "slice " << s << ": psnr " << r.psnr << " dB, ssim " << r.ssim << " (zero-filled " << r.zero_filled_psnr
        << " dB, " << r.zero_filled_ssim << "), " << r.recon.probes.size() << " probes\n";
  }
  if (cfg.save_weights) save_weights(w, cfg.model, cfg.output_dir / "weights.bin");
  write_text(cfg.output_dir / "metrics.json", metrics.dump(2) + "\n");
  out << "wrote " << cfg.output_dir.string() << '\n';
  return kOk;
}

int cmd_diagnose(const std::string& config_path, const std::string& probe_dir, const std::string& case_name,
                 const std::string& variant, const std::string& out_arg, unsigned jobs, std::ostream& out) {
  if (config_path.empty() == probe_dir.empty()) throw UsageError("diagnose needs exactly one of --config or --probes");
  std::vector<ReportRow> rows;
  fs::path out_dir;
  if (!config_path.empty()) {
    const RunConfig cfg = config_with_out(config_path, out_arg);
    out_dir = cfg.output_dir;
    const auto results = run_slices_impl(cfg, run_weights(cfg), jobs, true);
    rows = report_rows(cfg.case_name, variant_label(cfg.model.switches), leakage_of(results));
  } else {
    // A recon output directory: slice<k>/probes/unit<u>_{hidden,readout}.fld
    out_dir = out_arg.empty() ? default_output_dir() : fs::path(out_arg);
    std::vector<std::vector<UnitProbe>> slices;
    for (Index s = 0; fs::exists(slice_dir(probe_dir, s) / "probes"); ++s)
      slices.push_back(read_probes(slice_dir(probe_dir, s) / "probes"));
    if (slices.empty()) throw IoError("no slice<k>/probes directories under '" + probe_dir + "'");
    rows = report_rows(case_name, variant, leakage_report(slices, kDefaultCutoffs));
  }
  write_reports(out_dir, rows);
  out << report_csv(rows);
  return kOk;
}

int cmd_ablate(const std::string& config_path, const std::string& out_arg, unsigned jobs, std::ostream& out) {
  const RunConfig base = config_with_out(config_path, out_arg);
  const ModelWeights w = run_weights(base);

  std::vector<ReportRow> rows;
  nlohmann::ordered_json summary;
  summary["case"] = base.case_name;
  summary["variants"] = nlohmann::ordered_json::array();
  for (const auto& v : ablation_variants()) {
    RunConfig cfg = base;
    cfg.model.switches = v.switches;
    const auto results = run_slices_impl(cfg, w, jobs, true);
    const auto vrows = report_rows(cfg.case_name, v.name, leakage_of(results));
    rows.insert(rows.end(), vrows.begin(), vrows.end());

    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (const auto& r : results) {
      psnr_sum += r.psnr;
      ssim_sum += r.ssim;
    }
    const double n = static_cast<double>(results.size());
    nlohmann::ordered_json j;
    j["variant"] = v.name;
    j["switches"] = to_json(v.switches);
    j["psnr"] = psnr_sum / n;
    j["ssim"] = ssim_sum / n;
    summary["variants"].push_back(std::move(j));
    out << v.name << ": psnr " << psnr_sum / n << " dB, ssim " << ssim_sum / n << '\n';
  }

  // Non-identity check: content tokens of the first unit on the first slice's
  // zero-filled image, default wiring against the residency violation.
  {
    const ForwardConfig fwd = make_operator(base);
    const ComplexField truth = make_phantom(base.phantom.kind, base.phantom.size, base.phantom.seed);
    const ComplexField x0 = adjoint(fwd, simulate(truth, fwd, base.noise_std, base.noise_seed));
    const UnitWeights& uw = w.unit(base.model, 0, 0);
    const FeatureMap features = extract_features(stack_image(x0, fwd), uw.router);
    AblationSwitches violation;
    violation.content_residency_violation = true;
    const Eigen::MatrixXd u_default = content_tokens(features, uw, AblationSwitches{});
    const Eigen::MatrixXd u_violation = content_tokens(features, uw, violation);
    const double diff = (u_default - u_violation).cwiseAbs().maxCoeff();
    summary["content_token_check"] = {{"differs", diff > 0.0}, {"max_abs_diff", diff}};
    out << "content residency changes content tokens: " << (diff > 0.0 ? "yes" : "no") << " (max |diff| " << diff
        << ")\n";
  }

  write_reports(base.output_dir, rows);
  write_text(base.output_dir / "ablation.json", summary.dump(2) + "\n");
  out << "wrote " << rows.size() << " rows to " << (base.output_dir / "report.csv").string() << '\n';
  return kOk;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ownership-routed state-space regularizer for unrolled MRI reconstruction", "ownrecon"};
  app.require_subcommand(1);
  int status = kOk;

  auto* phantom = app.add_subcommand("phantom", "Write a ground-truth phantom (.fld)");
  std::string ph_kind = "shepp_logan", ph_out;
  Index ph_size = 128;
  std::uint64_t ph_seed = 0;
  phantom->add_option("--kind", ph_kind, "shepp_logan or smooth_texture")->capture_default_str();
  phantom->add_option("--size", ph_size, "Side length (even, >= 32)")->capture_default_str();
  phantom->add_option("--seed", ph_seed, "Texture seed")->capture_default_str();
  phantom->add_option("--out", ph_out, "Output file");
  phantom->callback([&] { status = guarded(err, [&] { return cmd_phantom(ph_kind, ph_size, ph_seed, ph_out, out); }); });

  auto* mask = app.add_subcommand("mask", "Generate a sampling mask");
  MaskArgs ma;
  mask->add_option("--kind", ma.kind, "equispaced, random or radial")->capture_default_str();
  mask->add_option("--width", ma.width, "Width (phase-encode columns)")->capture_default_str();
  mask->add_option("--height", ma.height, "Height (defaults to width)");
  mask->add_option("--af", ma.af, "Acceleration factor")->capture_default_str();
  mask->add_option("--center-frac", ma.center_frac, "Fully sampled center fraction");
  mask->add_option("--spokes", ma.spokes, "Radial spoke count");
  mask->add_option("--seed", ma.seed, "Seed for random masks")->capture_default_str();
  mask->add_option("--out", ma.out, "Write the mask (.fld)");
  mask->callback([&] { status = guarded(err, [&] { return cmd_mask(ma, out); }); });

  auto* sim = app.add_subcommand("simulate", "Forward model plus noise");
  SimulateArgs sa;
  sim->add_option("--image", sa.image, "Complex image (.fld)")->required();
  sim->add_option("--mask", sa.mask, "Mask (.fld)")->required();
  sim->add_option("--coils", sa.coils, "Synthetic coil count")->capture_default_str();
  sim->add_option("--noise-std", sa.noise_std, "Noise std per real/imag component")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Noise seed")->capture_default_str();
  sim->add_option("--out", sa.out, "Output k-space file");
  sim->callback([&] { status = guarded(err, [&] { return cmd_simulate(sa, out); }); });

  std::string config, out_dir;
  unsigned jobs = 1;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--jobs", jobs, "Slices reconstructed in parallel")->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* recon = app.add_subcommand("recon", "Reconstruct every slice of a run config");
  recon->add_option("--config", config, "Run config (JSON)")->required();
  add_run_options(recon);
  recon->callback([&] { status = guarded(err, [&] { return cmd_recon(config, out_dir, jobs, out); }); });

  auto* diag = app.add_subcommand("diagnose", "Two-level leakage report");
  std::string probe_dir, case_name = "probes", variant = "custom";
  diag->add_option("--config", config, "Run config to reconstruct and probe");
  diag->add_option("--probes", probe_dir, "recon output directory holding slice<k>/probes");
  diag->add_option("--case", case_name, "Case label for --probes")->capture_default_str();
  diag->add_option("--variant", variant, "Variant label for --probes")->capture_default_str();
  add_run_options(diag);
  diag->callback([&] {
    status = guarded(err, [&] { return cmd_diagnose(config, probe_dir, case_name, variant, out_dir, jobs, out); });
  });

  auto* ablate = app.add_subcommand("ablate", "Ownership-path and tying variants over one config");
  ablate->add_option("--config", config, "Run config (JSON)")->required();
  add_run_options(ablate);
  ablate->callback([&] { status = guarded(err, [&] { return cmd_ablate(config, out_dir, jobs, out); }); });

  auto* self = app.add_subcommand("selftest", "Check the core properties and print pass/fail per property");
  self->callback([&] {
    status = guarded(err, [&] { return selftest(out) == 0 ? int{kOk} : int{kCheckFailed}; });
  });

  std::vector<std::string> argv_store{"ownrecon"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  return status;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv + std::min(argc, 1), argv + argc), std::cout, std::cerr);
}

}  // namespace ownrecon::cli

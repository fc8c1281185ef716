#include "ownrecon/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace ownrecon {

double radial_frequency(Index k, Index l, Index height, Index width) {
  const double fy = static_cast<double>(k - height / 2) / static_cast<double>(height);
  const double fx = static_cast<double>(l - width / 2) / static_cast<double>(width);
  return 2.0 * std::sqrt(fy * fy + fx * fx);
}

template <typename Scalar>
std::vector<double> outer_band_leakage(const FeatureMapT<Scalar>& z, std::span<const double> cutoffs) {
  validate(z);
  for (double r : cutoffs)
    if (!(r >= 0.0)) throw ConfigError("leakage cutoff must be >= 0");
  if (z.height < 2 || z.width < 2) throw ShapeError("leakage needs a grid of at least 2x2");

  RealImage rho(z.height, z.width);
  for (Index k = 0; k < z.height; ++k)
    for (Index l = 0; l < z.width; ++l) rho(k, l) = radial_frequency(k, l, z.height, z.width);
  std::vector<RowMatrix<bool>> outer;
  outer.reserve(cutoffs.size());
  for (double r : cutoffs) outer.push_back((rho.array() > r).matrix());

  double total = 0.0;
  std::vector<double> band(cutoffs.size(), 0.0);
  ComplexField plane(z.height, z.width);
  for (Index c = 0; c < z.channels; ++c) {
    plane.real() = z.plane(c).template cast<double>();
    plane.imag().setZero();
    const RealImage power = fft2c(plane).cwiseAbs2();
    total += power.sum();
    for (size_t q = 0; q < cutoffs.size(); ++q) band[q] += outer[q].select(power, 0.0).sum();
  }

  std::vector<double> out(cutoffs.size(), 0.0);
  if (total == 0.0) return out;
  const double denom = total * (1.0 + kLeakageEpsilon);
  for (size_t q = 0; q < cutoffs.size(); ++q) out[q] = band[q] / denom;
  return out;
}

template <typename Scalar>
double outer_band_leakage(const FeatureMapT<Scalar>& z, double cutoff) {
  const double c[1] = {cutoff};
  return outer_band_leakage(z, std::span<const double>(c, 1))[0];
}

template double outer_band_leakage<double>(const FeatureMapT<double>&, double);
template double outer_band_leakage<float>(const FeatureMapT<float>&, double);
template std::vector<double> outer_band_leakage<double>(const FeatureMapT<double>&, std::span<const double>);
template std::vector<double> outer_band_leakage<float>(const FeatureMapT<float>&, std::span<const double>);

LeakageReport leakage_report(const std::vector<std::vector<UnitProbe>>& slices, std::span<const double> cutoffs) {
  if (slices.empty()) throw UsageError("leakage report needs at least one slice of probes");
  if (cutoffs.empty()) throw UsageError("leakage report needs at least one cutoff");
  LeakageReport report;
  const size_t nc = cutoffs.size();
  std::vector<double> case_h(nc, 0.0), case_r(nc, 0.0);

  for (size_t s = 0; s < slices.size(); ++s) {
    const auto& probes = slices[s];
    if (probes.empty()) throw UsageError("slice " + std::to_string(s) + " has no probes");
    std::vector<double> slice_h(nc, 0.0), slice_r(nc, 0.0);
    for (size_t u = 0; u < probes.size(); ++u) {
      const auto h = outer_band_leakage(probes[u].hidden_grid, cutoffs);
      const auto r = outer_band_leakage(probes[u].readout_grid, cutoffs);
      for (size_t q = 0; q < nc; ++q) {
        report.per_unit.push_back(
            {static_cast<Index>(s), static_cast<Index>(u), {cutoffs[q], h[q], r[q], expression_ratio(h[q], r[q])}});
        slice_h[q] += h[q];
        slice_r[q] += r[q];
      }
    }
    std::vector<LeakageRow> rows;
    for (size_t q = 0; q < nc; ++q) {
      const double h = slice_h[q] / static_cast<double>(probes.size());
      const double r = slice_r[q] / static_cast<double>(probes.size());
      rows.push_back({cutoffs[q], h, r, expression_ratio(h, r)});
      case_h[q] += h;
      case_r[q] += r;
    }
    report.per_slice.push_back(std::move(rows));
  }
  for (size_t q = 0; q < nc; ++q) {
    const double h = case_h[q] / static_cast<double>(slices.size());
    const double r = case_r[q] / static_cast<double>(slices.size());
    report.per_case.push_back({cutoffs[q], h, r, expression_ratio(h, r)});
  }
  return report;
}

LeakageReport leakage_report(std::span<const UnitProbe> probes, std::span<const double> cutoffs) {
  if (probes.empty()) throw UsageError("leakage report needs at least one probe");
  return leakage_report(std::vector<std::vector<UnitProbe>>{std::vector<UnitProbe>(probes.begin(), probes.end())},
                        cutoffs);
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string report_csv(std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << "case,variant,r,hleak,rleak,eta\n";
  for (const auto& r : rows)
    os << r.case_name << ',' << r.variant << ',' << format_number(r.row.cutoff) << ',' << format_number(r.row.hleak)
       << ',' << format_number(r.row.rleak) << ',' << format_number(r.row.eta) << '\n';
  return os.str();
}

std::string report_json(std::span<const ReportRow> rows) {
  // ordered_json keeps the CSV column order.
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["case"] = r.case_name;
    j["variant"] = r.variant;
    j["r"] = r.row.cutoff;
    j["hleak"] = r.row.hleak;
    j["rleak"] = r.row.rleak;
    j["eta"] = r.row.eta;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

// -- metrics --------------------------------------------------------------------

double psnr_from_mse(double mse, double peak) {
  if (!(peak > 0.0)) throw ConfigError("PSNR peak must be > 0");
  if (!(mse >= 0.0)) throw DataIntegrityError("MSE must be a finite non-negative number");
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double psnr(const RealImage& reference, const RealImage& estimate, double peak) {
  if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols())
    throw ShapeError("psnr: image dimensions differ");
  const double mse = (reference - estimate).squaredNorm() / static_cast<double>(reference.size());
  return psnr_from_mse(mse, peak);
}

double psnr(const RealImage& reference, const RealImage& estimate) {
  return psnr(reference, estimate, reference.maxCoeff());
}

namespace {

// 'valid' separable filtering with a 1-D kernel on both axes.
RealImage filter_valid(const RealImage& img, const Eigen::VectorXd& k) {
  const Index n = k.size();
  const Index h = img.rows() - n + 1;
  const Index w = img.cols() - n + 1;
  RealImage horizontal(img.rows(), w);
  for (Index j = 0; j < w; ++j) horizontal.col(j) = img.middleCols(j, n) * k;
  RealImage out(h, w);
  for (Index i = 0; i < h; ++i) out.row(i) = k.transpose() * horizontal.middleRows(i, n);
  return out;
}

}  // namespace

double ssim(const RealImage& reference, const RealImage& estimate, double peak, const SsimOptions& opt) {
  if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols())
    throw ShapeError("ssim: image dimensions differ");
  if (opt.window < 1 || opt.window > reference.rows() || opt.window > reference.cols())
    throw ConfigError("ssim window " + std::to_string(opt.window) + " does not fit a " +
                      std::to_string(reference.rows()) + "x" + std::to_string(reference.cols()) + " image");
  if (!(peak > 0.0)) throw ConfigError("SSIM peak must be > 0");

  Eigen::VectorXd k(opt.window);
  const double mid = static_cast<double>(opt.window - 1) / 2.0;
  for (Index i = 0; i < opt.window; ++i) {
    const double d = static_cast<double>(i) - mid;
    k(i) = std::exp(-d * d / (2.0 * opt.sigma * opt.sigma));
  }
  k /= k.sum();

  const double c1 = (opt.k1 * peak) * (opt.k1 * peak);
  const double c2 = (opt.k2 * peak) * (opt.k2 * peak);
  const RealImage mu_x = filter_valid(reference, k);
  const RealImage mu_y = filter_valid(estimate, k);
  const RealImage xx = filter_valid(reference.cwiseProduct(reference), k);
  const RealImage yy = filter_valid(estimate.cwiseProduct(estimate), k);
  const RealImage xy = filter_valid(reference.cwiseProduct(estimate), k);

  const auto mx = mu_x.array();
  const auto my = mu_y.array();
  const auto var_x = xx.array() - mx.square();
  const auto var_y = yy.array() - my.square();
  const auto cov = xy.array() - mx * my;
  const auto map = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx.square() + my.square() + c1) * (var_x + var_y + c2));
  return map.mean();
}

double ssim(const RealImage& reference, const RealImage& estimate) {
  return ssim(reference, estimate, reference.maxCoeff());
}

}  // namespace ownrecon

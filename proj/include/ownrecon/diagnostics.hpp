#pragma once

#include <span>
#include <string>
#include <vector>

#include "ownrecon/field.hpp"
#include "ownrecon/so_unit.hpp"

namespace ownrecon {

/// Relative floor on the leakage denominator: total power is scaled by
/// (1 + kLeakageEpsilon), which keeps the ratio scale invariant.
inline constexpr double kLeakageEpsilon = 1e-8;

/// Cutoffs reported by default.
inline const std::vector<double> kDefaultCutoffs{0.25, 0.35};

/// Normalized radial frequency of bin (k, l) on an H x W centered grid:
/// rho = 2 sqrt(fy^2 + fx^2), f = (index - N/2) / N. rho is 1 at the axis
/// Nyquist edge and sqrt(2) in the corners.
double radial_frequency(Index k, Index l, Index height, Index width);

/// Fraction of spectral power beyond cutoff r, summed over channels:
///   sum_{rho > r} |F Z_d|^2 / ((1 + eps) sum |F Z_d|^2)
/// Zero for an all-zero map.
template <typename Scalar>
double outer_band_leakage(const FeatureMapT<Scalar>& z, double cutoff);

/// Leakage at several cutoffs with one transform per channel.
template <typename Scalar>
std::vector<double> outer_band_leakage(const FeatureMapT<Scalar>& z, std::span<const double> cutoffs);

/// eta = rleak / (hleak + eps).
inline double expression_ratio(double hleak, double rleak, double epsilon = kLeakageEpsilon) {
  return rleak / (hleak + epsilon);
}

struct LeakageRow {
  double cutoff = 0.0;
  double hleak = 0.0;
  double rleak = 0.0;
  double eta = 0.0;
};

struct UnitLeakage {
  Index slice = 0;
  Index unit = 0;
  LeakageRow row;
};

/// Leakage for every probed unit plus the averages. Units are averaged within
/// a slice, slices within the case; eta at an aggregate level is the ratio of
/// the aggregated hleak / rleak.
struct LeakageReport {
  std::vector<UnitLeakage> per_unit;
  std::vector<std::vector<LeakageRow>> per_slice;  // [slice][cutoff]
  std::vector<LeakageRow> per_case;                // [cutoff]
  double epsilon = kLeakageEpsilon;
};

/// One slice worth of probes.
LeakageReport leakage_report(std::span<const UnitProbe> probes, std::span<const double> cutoffs);

/// Several slices of the same case; every slice must hold at least one probe.
LeakageReport leakage_report(const std::vector<std::vector<UnitProbe>>& slices, std::span<const double> cutoffs);

/// Report rows in the fixed column order case, variant, r, hleak, rleak, eta.
struct ReportRow {
  std::string case_name;
  std::string variant;
  LeakageRow row;
};

std::string report_csv(std::span<const ReportRow> rows);
std::string report_json(std::span<const ReportRow> rows);

// -- image metrics ------------------------------------------------------------

/// PSNR reported for identical images.
inline constexpr double kPsnrCap = 300.0;

/// 10 log10(peak^2 / mse), capped at kPsnrCap.
double psnr_from_mse(double mse, double peak);

double psnr(const RealImage& reference, const RealImage& estimate, double peak);

/// PSNR with the peak taken as the reference maximum.
double psnr(const RealImage& reference, const RealImage& estimate);

struct SsimOptions {
  Index window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over all window positions fully inside the image (Gaussian
/// window, no padding).
double ssim(const RealImage& reference, const RealImage& estimate, double peak, const SsimOptions& opt = {});

double ssim(const RealImage& reference, const RealImage& estimate);

}  // namespace ownrecon

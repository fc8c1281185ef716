#include "ownrecon/sor_router.hpp"

#include <string>

namespace ownrecon {

FeatureMap extract_features(const FeatureMap& x, const RouterWeights& w) {
  if (x.channels != w.phi.in_channels())
    throw ShapeError("feature extractor expects " + std::to_string(w.phi.in_channels()) + " input channels, got " +
                     std::to_string(x.channels));
  FeatureMap out = apply(w.phi, x);
  out.data = silu(out.data);
  return out;
}

namespace {

void require_min_extent(const FeatureMap& u, Index min_extent, const char* what) {
  if (u.height < min_extent || u.width < min_extent)
    throw ShapeError(std::string(what) + " needs spatial dims >= " + std::to_string(min_extent) + ", got " +
                     std::to_string(u.height) + "x" + std::to_string(u.width));
}

FeatureMap vertical_pass(const FeatureMap& u) {
  const Index h = u.height;
  const Index w = u.width;
  FeatureMap out(u.channels, h, w);
  for (Index c = 0; c < u.channels; ++c) {
    auto src = u.plane(c);
    auto dst = out.plane(c);
    for (Index i = 0; i < h; ++i) {
      dst.row(i).setZero();
      for (Index t = -2; t <= 2; ++t) dst.row(i) += kBinomialTaps[static_cast<size_t>(t + 2)] * src.row(reflect_index(i + t, h));
    }
  }
  return out;
}

}  // namespace

FeatureMap binomial_horizontal(const FeatureMap& u) {
  require_min_extent(u, 3, "binomial projection");
  const Index h = u.height;
  const Index w = u.width;
  FeatureMap out(u.channels, h, w);
  for (Index c = 0; c < u.channels; ++c) {
    auto src = u.plane(c);
    auto dst = out.plane(c);
    for (Index j = 0; j < w; ++j) {
      dst.col(j).setZero();
      for (Index t = -2; t <= 2; ++t) dst.col(j) += kBinomialTaps[static_cast<size_t>(t + 2)] * src.col(reflect_index(j + t, w));
    }
  }
  return out;
}

FeatureMap binomial_project(const FeatureMap& u) {
  require_min_extent(u, 3, "binomial projection");
  return vertical_pass(binomial_horizontal(u));
}

FeatureMap decimate2(const FeatureMap& u) {
  if (u.height % 2 != 0 || u.width % 2 != 0)
    throw ShapeError("2x compaction needs even dimensions, got " + std::to_string(u.height) + "x" +
                     std::to_string(u.width));
  FeatureMap out(u.channels, u.height / 2, u.width / 2);
  for (Index c = 0; c < u.channels; ++c)
    out.plane(c) = u.plane(c)(Eigen::seq(0, Eigen::last, 2), Eigen::seq(0, Eigen::last, 2));
  return out;
}

namespace {

// 1-D restoration matrix (2n x n) with the weights documented in the header.
Eigen::MatrixXd restoration_matrix(Index n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, n);
  for (Index j = 0; j < n; ++j) {
    // even fine sample 2j
    if (j == 0) {
      m(0, 0) = 1.0;
    } else {
      m(2 * j, j - 1) = 0.25;
      m(2 * j, j) = 0.75;
    }
    // odd fine sample 2j + 1
    if (j == n - 1) {
      m(2 * j + 1, j) = 1.0;
    } else {
      m(2 * j + 1, j) = 0.75;
      m(2 * j + 1, j + 1) = 0.25;
    }
  }
  return m;
}

}  // namespace

FeatureMap upsample_bilinear2(const FeatureMap& u) {
  const Eigen::MatrixXd rows = restoration_matrix(u.height);
  const Eigen::MatrixXd cols = restoration_matrix(u.width);
  FeatureMap out(u.channels, 2 * u.height, 2 * u.width);
  for (Index c = 0; c < u.channels; ++c) out.plane(c).noalias() = rows * u.plane(c) * cols.transpose();
  return out;
}

FeatureMap carrier_project(const FeatureMap& u_car) {
  require_min_extent(u_car, 4, "carrier projection");
  return upsample_bilinear2(decimate2(binomial_project(u_car)));
}

OwnershipStreams route(const FeatureMap& x, const RouterWeights& w, RouteTrace* trace) {
  if (x.channels % 2 != 0) throw ConfigError("router needs an even channel count, got " + std::to_string(x.channels));
  const Index half = x.channels / 2;
  FeatureMap u_car = apply(w.proj_car, slice_channels(x, 0, half));
  FeatureMap u_nr = apply(w.proj_nr, slice_channels(x, half, half));

  OwnershipStreams s;
  s.carrier = carrier_project(u_car);
  FeatureMap rejected = u_car;
  rejected.data -= s.carrier.data;
  s.evidence = u_nr;
  s.evidence.data += rejected.data;

  if (trace) {
    trace->carrier_pool = std::move(u_car);
    trace->evidence_pool = std::move(u_nr);
    trace->carrier_rejected = std::move(rejected);
  }
  return s;
}

}  // namespace ownrecon

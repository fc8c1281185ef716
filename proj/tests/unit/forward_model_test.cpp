#include <gtest/gtest.h>

#include "ownrecon/forward_model.hpp"
#include "ownrecon/phantoms.hpp"
#include "test_support.hpp"

using namespace ownrecon;
using ownrecon::testing::random_field;
using ownrecon::testing::random_measurements;

namespace {

SampleMask mask(Index n, MaskKind kind = MaskKind::random, std::uint64_t seed = 9) {
  MaskSpec s;
  s.kind = kind;
  s.height = n;
  s.width = n;
  s.seed = seed;
  return generate_mask(s);
}

std::complex<double> inner(const Measurements& a, const Measurements& b) {
  std::complex<double> s = 0.0;
  for (size_t c = 0; c < a.coils.size(); ++c) s += inner_product(a.coils[c], b.coils[c]);
  return s;
}

double norm(const Measurements& a) {
  double s = 0.0;
  for (const auto& k : a.coils) s += k.squaredNorm();
  return std::sqrt(s);
}

class ForwardModes : public ::testing::TestWithParam<Index> {
 protected:
  ForwardConfig make(Index n) const {
    const Index coils = GetParam();
    return coils == 1 ? single_coil(mask(n)) : multi_coil(mask(n), synth_coil_maps(coils, n));
  }
};

}  // namespace

TEST_P(ForwardModes, AdjointIdentity) {
  const ForwardConfig fwd = make(32);
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const ComplexField x = random_field(32, 32, rng);
    const Measurements y = random_measurements(fwd, rng);
    const Measurements ax = forward(fwd, x);
    const double err = std::abs(inner(ax, y) - inner_product(x, adjoint(fwd, y)));
    EXPECT_LT(err / (norm(ax) * norm(y)), 1e-12);
  }
}

TEST_P(ForwardModes, ForwardIsLinear) {
  const ForwardConfig fwd = make(16);
  Rng rng(11);
  const ComplexField a = random_field(16, 16, rng), b = random_field(16, 16, rng);
  const std::complex<double> s(0.3, -1.2);
  const Measurements lhs = forward(fwd, a + s * b);
  const Measurements fa = forward(fwd, a), fb = forward(fwd, b);
  for (size_t c = 0; c < lhs.coils.size(); ++c)
    EXPECT_LT((lhs.coils[c] - fa.coils[c] - s * fb.coils[c]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(ForwardModes, ForwardIsZeroOffMask) {
  const ForwardConfig fwd = make(16);
  Rng rng(12);
  const Measurements y = forward(fwd, random_field(16, 16, rng));
  for (const auto& k : y.coils)
    for (Index i = 0; i < 16; ++i)
      for (Index j = 0; j < 16; ++j)
        if (!fwd.mask.bits(i, j)) {
          EXPECT_EQ(k(i, j), std::complex<double>(0.0, 0.0));
        }
}

TEST_P(ForwardModes, DcFixedPointOnConsistentData) {
  const ForwardConfig fwd = make(32);
  Rng rng(13);
  const ComplexField x = random_field(32, 32, rng);
  EXPECT_LT((data_consistency(x, forward(fwd, x), fwd) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(ForwardModes, DcKspaceCopiesMeasurementsExactly) {
  const ForwardConfig fwd = make(32);
  Rng rng(14);
  const Measurements y = random_measurements(fwd, rng);
  const auto k = dc_kspace(random_field(32, 32, rng), y, fwd);
  for (size_t c = 0; c < k.size(); ++c)
    for (Index i = 0; i < 32; ++i)
      for (Index j = 0; j < 32; ++j)
        if (fwd.mask.bits(i, j)) {
          ASSERT_EQ(k[c](i, j), y.coils[c](i, j));
        }
}

INSTANTIATE_TEST_SUITE_P(Coils, ForwardModes, ::testing::Values(1, 4));

TEST(DataConsistency, SingleCoilIdempotent) {
  const ForwardConfig fwd = single_coil(mask(32));
  Rng rng(15);
  const Measurements y = random_measurements(fwd, rng);
  const ComplexField once = data_consistency(random_field(32, 32, rng), y, fwd);
  EXPECT_LT((data_consistency(once, y, fwd) - once).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DataConsistency, UnsampledBinsKeepTheIterate) {
  const ForwardConfig fwd = single_coil(mask(16));
  Rng rng(16);
  const ComplexField z = random_field(16, 16, rng);
  const auto k = dc_kspace(z, random_measurements(fwd, rng), fwd);
  const ComplexField fz = fft2c(z);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j)
      if (!fwd.mask.bits(i, j)) {
        EXPECT_EQ(k[0](i, j), fz(i, j));
      }
}

TEST(DataConsistency, SoftBlendFormula) {
  const ForwardConfig fwd = single_coil(mask(16));
  Rng rng(17);
  const ComplexField z = random_field(16, 16, rng);
  const Measurements y = random_measurements(fwd, rng);
  const double w = 3.0;
  const auto k = dc_kspace(z, y, fwd, DcMode::soft_weighted(w));
  const ComplexField fz = fft2c(z);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) {
      const std::complex<double> expect = fwd.mask.bits(i, j) ? (fz(i, j) + w * y.coils[0](i, j)) / (1.0 + w) : fz(i, j);
      EXPECT_LT(std::abs(k[0](i, j) - expect), 1e-14);
    }
  EXPECT_THROW(dc_kspace(z, y, fwd, DcMode::soft_weighted(-1.0)), ConfigError);
}

TEST(DataConsistency, FullMaskReturnsMeasuredImage) {
  const ForwardConfig fwd = single_coil(full_mask(16, 16));
  Rng rng(18);
  const ComplexField x = random_field(16, 16, rng);
  const ComplexField out = data_consistency(random_field(16, 16, rng), forward(fwd, x), fwd);
  EXPECT_LT((out - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simulate, NoiseOnlyOnSampledBinsAndSeeded) {
  const ForwardConfig fwd = single_coil(mask(16));
  const ComplexField x = ComplexField::Zero(16, 16);
  const Measurements a = simulate(x, fwd, 0.1, 5);
  const Measurements b = simulate(x, fwd, 0.1, 5);
  const Measurements c = simulate(x, fwd, 0.1, 6);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) {
      if (fwd.mask.bits(i, j))
        EXPECT_NE(a.coils[0](i, j), std::complex<double>(0.0, 0.0));
      else
        EXPECT_EQ(a.coils[0](i, j), std::complex<double>(0.0, 0.0));
    }
}

TEST(Simulate, DrawOrderIsRowMajorRealThenImaginary) {
  const ForwardConfig fwd = single_coil(mask(16));
  const Measurements y = simulate(ComplexField::Zero(16, 16), fwd, 1.0, 42);
  Rng rng(42);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) {
      if (!fwd.mask.bits(i, j)) continue;
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      ASSERT_EQ(y.coils[0](i, j), std::complex<double>(re, im));
    }
}

TEST(ForwardConfigTest, RejectsBadCoilMaps) {
  auto maps = synth_coil_maps(4, 16);
  maps[2] *= 2.0;
  EXPECT_THROW(validate(multi_coil(mask(16), maps)), ConfigError);
  EXPECT_THROW(validate(multi_coil(mask(16), synth_coil_maps(4, 8))), ShapeError);
  EXPECT_THROW(validate(multi_coil(mask(16), {})), ConfigError);
}

TEST(ForwardConfigTest, ShapeMismatchesThrow) {
  const ForwardConfig fwd = single_coil(mask(16));
  EXPECT_THROW(forward(fwd, ComplexField::Zero(8, 8)), ShapeError);
  Measurements two;
  two.coils = {ComplexField::Zero(16, 16), ComplexField::Zero(16, 16)};
  EXPECT_THROW(adjoint(fwd, two), ShapeError);
}

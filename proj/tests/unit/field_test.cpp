#include <gtest/gtest.h>

#include <cmath>

#include "ownrecon/field.hpp"
#include "test_support.hpp"

using namespace ownrecon;
using ownrecon::testing::naive_dft2c;
using ownrecon::testing::random_field;

TEST(Fft, MatchesDirectDefinition) {
  Rng rng(1);
  for (Index n : {4, 8, 16}) {
    const ComplexField x = random_field(n, n, rng);
    EXPECT_LT((fft2c(x) - naive_dft2c(x)).cwiseAbs().maxCoeff(), 1e-12) << n;
  }
}

TEST(Fft, RectangularMatchesDirectDefinition) {
  Rng rng(2);
  const ComplexField x = random_field(6, 10, rng);
  EXPECT_LT((fft2c(x) - naive_dft2c(x)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((dft2c_reference(x) - naive_dft2c(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fft, ReferenceMatrixMatchesDirectDefinition) {
  Rng rng(3);
  const ComplexField x = random_field(16, 16, rng);
  EXPECT_LT((dft2c_reference(x) - naive_dft2c(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fft, InverseRoundTripAndUnitarity) {
  Rng rng(4);
  const ComplexField x = random_field(32, 48, rng);
  const ComplexField k = fft2c(x);
  EXPECT_NEAR(k.norm(), x.norm(), 1e-10);
  EXPECT_LT((ifft2c(k) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fft, ConstantImageIsCenterSpike) {
  const ComplexField x = ComplexField::Constant(8, 8, {2.0, 0.0});
  const ComplexField k = fft2c(x);
  EXPECT_NEAR(k(4, 4).real(), 2.0 * 8.0, 1e-12);
  ComplexField rest = k;
  rest(4, 4) = 0.0;
  EXPECT_LT(rest.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fft, SinglePrecisionTracksDouble) {
  Rng rng(5);
  const ComplexField x = random_field(16, 16, rng);
  const ComplexFieldF kf = fft2c(ComplexFieldF(x.cast<std::complex<float>>()));
  EXPECT_LT((kf.cast<std::complex<double>>() - fft2c(x)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Fft, ReferenceRefusesLargeGrids) {
  const ComplexField x = ComplexField::Zero(kReferenceDftMaxSize + 2, 4);
  EXPECT_THROW(dft2c_reference(x), CapabilityError);
}

TEST(Field, ValidateRejectsNonFinite) {
  ComplexField x = ComplexField::Zero(4, 4);
  x(1, 2) = {std::nan(""), 0.0};
  EXPECT_THROW(validate(x), DataIntegrityError);
}

TEST(Field, InnerProductOfDisjointSupportsIsZero) {
  ComplexField a = ComplexField::Zero(2, 2), b = ComplexField::Zero(2, 2);
  a(0, 0) = {1.0, 2.0};
  b(1, 1) = {3.0, -1.0};
  EXPECT_EQ(inner_product(a, b), std::complex<double>(0.0, 0.0));
}

TEST(Field, InnerProductConjugatesFirstArgument) {
  ComplexField a(1, 1), b(1, 1);
  a(0, 0) = {0.0, 1.0};
  b(0, 0) = {0.0, 1.0};
  EXPECT_EQ(inner_product(a, b), std::complex<double>(1.0, 0.0));
}

TEST(Field, FeatureMapPlaneIsRowMajorView) {
  FeatureMap m(2, 3, 4);
  m.at(1, 2, 3) = 7.0;
  EXPECT_EQ(m.plane(1)(2, 3), 7.0);
  EXPECT_EQ(m.data(1, 2 * 4 + 3), 7.0);
}

#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "ownrecon/errors.hpp"

namespace ownrecon {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// H x W complex grid, row-major. Carries images, coil images and k-space.
template <typename Scalar>
using ComplexFieldT = RowMatrix<std::complex<Scalar>>;
using ComplexField = ComplexFieldT<double>;
using ComplexFieldF = ComplexFieldT<float>;

/// Real image (magnitude images for metrics).
using RealImage = RowMatrix<double>;

/// C x H x W real feature grid. `data` holds one channel plane per row, so a
/// per-pixel channel map is a single matrix product `W * data`.
template <typename Scalar>
struct FeatureMapT {
  Index channels = 0;
  Index height = 0;
  Index width = 0;
  RowMatrix<Scalar> data;

  FeatureMapT() = default;
  FeatureMapT(Index c, Index h, Index w) : channels(c), height(h), width(w), data(RowMatrix<Scalar>::Zero(c, h * w)) {}

  Index pixels() const { return height * width; }

  Scalar& at(Index c, Index i, Index j) { return data(c, i * width + j); }
  Scalar at(Index c, Index i, Index j) const { return data(c, i * width + j); }

  /// View of one channel as an H x W row-major map.
  auto plane(Index c) { return Eigen::Map<RowMatrix<Scalar>>(data.row(c).data(), height, width); }
  auto plane(Index c) const { return Eigen::Map<const RowMatrix<Scalar>>(data.row(c).data(), height, width); }

  template <typename Other>
  FeatureMapT<Other> cast() const {
    FeatureMapT<Other> out;
    out.channels = channels;
    out.height = height;
    out.width = width;
    out.data = data.template cast<Other>();
    return out;
  }

  bool operator==(const FeatureMapT& o) const {
    return channels == o.channels && height == o.height && width == o.width && data == o.data;
  }
};

using FeatureMap = FeatureMapT<double>;
using FeatureMapF = FeatureMapT<float>;

/// Throws DataIntegrityError / ShapeError when the field breaks its invariants.
template <typename Scalar>
void validate(const ComplexFieldT<Scalar>& field) {
  if (field.rows() < 2 || field.cols() < 2)
    throw ShapeError("complex field must be at least 2x2, got " + std::to_string(field.rows()) + "x" +
                     std::to_string(field.cols()));
  if (!field.allFinite()) throw DataIntegrityError("complex field contains NaN or Inf");
}

template <typename Scalar>
void validate(const FeatureMapT<Scalar>& map) {
  if (map.data.rows() != map.channels || map.data.cols() != map.height * map.width)
    throw ShapeError("feature map data does not match channels x height x width");
  if (!map.data.allFinite()) throw DataIntegrityError("feature map contains NaN or Inf");
}

void require_same_shape(const ComplexField& a, const ComplexField& b, const char* what);
void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* what);

// -- Fourier transforms ------------------------------------------------------
//
// Centered, orthonormal 2-D DFT. The zero frequency sits at (H/2, W/2) (integer
// division) and both directions scale by 1/sqrt(HW):
//
//   X[k,l] = 1/sqrt(HW) sum_{n,m} x[n,m] exp(-2 pi i ((k-cH)(n-cH)/H + (l-cW)(m-cW)/W))
//
// Any size >= 2 is supported; the transform is unitary.

ComplexField fft2c(const ComplexField& field);
ComplexField ifft2c(const ComplexField& kspace);

/// Single-precision entry points; arithmetic runs in double.
ComplexFieldF fft2c(const ComplexFieldF& field);
ComplexFieldF ifft2c(const ComplexFieldF& kspace);

/// Largest side accepted by the direct-summation reference.
inline constexpr Index kReferenceDftMaxSize = 64;

/// Direct-summation reference of fft2c (dense DFT matrices on each axis).
/// Throws CapabilityError above kReferenceDftMaxSize.
ComplexField dft2c_reference(const ComplexField& field);

/// sum conj(a) * b over all entries.
std::complex<double> inner_product(const ComplexField& a, const ComplexField& b);

/// Euclidean norm over all entries.
inline double norm2(const ComplexField& a) { return a.norm(); }

/// Element-wise magnitude.
inline RealImage magnitude(const ComplexField& a) { return a.cwiseAbs(); }

}  // namespace ownrecon

#include "ownrecon/field.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace ownrecon {

void require_same_shape(const ComplexField& a, const ComplexField& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* what) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width)
    throw ShapeError(std::string(what) + ": feature map dimensions differ");
}

namespace {

using cd = std::complex<double>;

// Centered 1-D transform along one axis: ifftshift, FFT, fftshift.
class CenteredAxis {
 public:
  explicit CenteredAxis(Index n) : n_(n), center_(n / 2), in_(n), out_(n) {
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
  }

  template <typename Get, typename Put>
  void run(bool inverse, Get&& get, Put&& put) {
    for (Index i = 0; i < n_; ++i) in_[i] = get((i + center_) % n_);
    if (inverse)
      fft_.inv(out_, in_);
    else
      fft_.fwd(out_, in_);
    for (Index k = 0; k < n_; ++k) put(k, out_[(k - center_ + n_) % n_]);
  }

 private:
  Index n_;
  Index center_;
  std::vector<cd> in_;
  std::vector<cd> out_;
  Eigen::FFT<double> fft_;
};

ComplexField centered_transform(const ComplexField& field, bool inverse) {
  validate(field);
  const Index h = field.rows();
  const Index w = field.cols();
  ComplexField out(h, w);

  CenteredAxis rows(w);
  for (Index i = 0; i < h; ++i)
    rows.run(
        inverse, [&](Index j) { return field(i, j); }, [&](Index j, cd v) { out(i, j) = v; });

  CenteredAxis cols(h);
  std::vector<cd> column(h);
  for (Index j = 0; j < w; ++j) {
    for (Index i = 0; i < h; ++i) column[i] = out(i, j);
    cols.run(
        inverse, [&](Index i) { return column[i]; }, [&](Index i, cd v) { out(i, j) = v; });
  }
  out *= 1.0 / std::sqrt(static_cast<double>(h * w));
  return out;
}

// Centered DFT matrix F[k,n] = exp(sign 2 pi i (k-c)(n-c)/N) / sqrt(N). The
// phase index is reduced modulo N in integers before the trig call.
Eigen::MatrixXcd centered_dft_matrix(Index n, double sign) {
  const Index c = n / 2;
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index k = 0; k < n; ++k) {
    for (Index m = 0; m < n; ++m) {
      Index p = ((k - c) * (m - c)) % n;
      if (p < 0) p += n;
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(n);
      f(k, m) = cd(std::cos(angle), std::sin(angle)) * scale;
    }
  }
  return f;
}

}  // namespace

ComplexField fft2c(const ComplexField& field) { return centered_transform(field, false); }

ComplexField ifft2c(const ComplexField& kspace) { return centered_transform(kspace, true); }

ComplexFieldF fft2c(const ComplexFieldF& field) {
  validate(field);
  return fft2c(ComplexField(field.cast<cd>())).cast<std::complex<float>>();
}

ComplexFieldF ifft2c(const ComplexFieldF& kspace) {
  validate(kspace);
  return ifft2c(ComplexField(kspace.cast<cd>())).cast<std::complex<float>>();
}

ComplexField dft2c_reference(const ComplexField& field) {
  if (field.rows() > kReferenceDftMaxSize || field.cols() > kReferenceDftMaxSize)
    throw CapabilityError("reference DFT is limited to " + std::to_string(kReferenceDftMaxSize) + " per side");
  validate(field);
  const Eigen::MatrixXcd fh = centered_dft_matrix(field.rows(), -1.0);
  const Eigen::MatrixXcd fw = centered_dft_matrix(field.cols(), -1.0);
  // Rows transform along width, columns along height: X = F_H x F_W^T.
  return fh * field * fw.transpose();
}

std::complex<double> inner_product(const ComplexField& a, const ComplexField& b) {
  require_same_shape(a, b, "inner_product");
  // Eigen's dot conjugates the left operand.
  return a.reshaped().dot(b.reshaped());
}

}  // namespace ownrecon

#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "ownrecon/field.hpp"

namespace ownrecon {

/// Affine map y = W x + b. On a FeatureMap it acts per pixel on the channel
/// vector (a 1x1 convolution); on a token matrix (tokens x features) it acts
/// per row.
struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  Linear() = default;
  Linear(Index out, Index in) : weight(Eigen::MatrixXd::Zero(out, in)), bias(Eigen::VectorXd::Zero(out)) {}

  Index in_features() const { return weight.cols(); }
  Index out_features() const { return weight.rows(); }

  bool operator==(const Linear& o) const { return weight == o.weight && bias == o.bias; }
};

FeatureMap apply(const Linear& layer, const FeatureMap& x);

/// tokens: N x in, returns N x out.
Eigen::MatrixXd apply_rows(const Linear& layer, const Eigen::MatrixXd& tokens);

/// Dense 3x3 convolution, zero padding, stride 1. weight is out x (in * 9),
/// column index = (in_channel * 3 + dy) * 3 + dx.
struct Conv3x3 {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  Conv3x3() = default;
  Conv3x3(Index out, Index in) : weight(Eigen::MatrixXd::Zero(out, in * 9)), bias(Eigen::VectorXd::Zero(out)) {}

  Index in_channels() const { return weight.cols() / 9; }
  Index out_channels() const { return weight.rows(); }

  bool operator==(const Conv3x3& o) const { return weight == o.weight && bias == o.bias; }
};

FeatureMap apply(const Conv3x3& layer, const FeatureMap& x);

/// Depthwise 3x3 convolution, zero padding. weight is channels x 9.
struct DepthwiseConv3x3 {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  DepthwiseConv3x3() = default;
  explicit DepthwiseConv3x3(Index channels)
      : weight(Eigen::MatrixXd::Zero(channels, 9)), bias(Eigen::VectorXd::Zero(channels)) {}

  bool operator==(const DepthwiseConv3x3& o) const { return weight == o.weight && bias == o.bias; }
};

FeatureMap apply(const DepthwiseConv3x3& layer, const FeatureMap& x);

inline double silu(double v) { return v / (1.0 + std::exp(-v)); }
inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
inline double softplus(double v) { return v > 20.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

template <typename Derived>
auto silu(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](double v) { return silu(v); });
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

/// Channel-wise concatenation [a; b].
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

/// Channels [first, first + count).
FeatureMap slice_channels(const FeatureMap& x, Index first, Index count);

}  // namespace ownrecon

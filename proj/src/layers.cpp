#include "ownrecon/layers.hpp"

#include <string>

namespace ownrecon {

FeatureMap apply(const Linear& layer, const FeatureMap& x) {
  if (layer.in_features() != x.channels)
    throw ShapeError("linear layer expects " + std::to_string(layer.in_features()) + " channels, got " +
                     std::to_string(x.channels));
  FeatureMap out(layer.out_features(), x.height, x.width);
  out.data.noalias() = layer.weight * x.data;
  out.data.colwise() += layer.bias;
  return out;
}

Eigen::MatrixXd apply_rows(const Linear& layer, const Eigen::MatrixXd& tokens) {
  if (layer.in_features() != tokens.cols())
    throw ShapeError("linear layer expects " + std::to_string(layer.in_features()) + " features, got " +
                     std::to_string(tokens.cols()));
  Eigen::MatrixXd out = tokens * layer.weight.transpose();
  out.rowwise() += layer.bias.transpose();
  return out;
}

namespace {

// Column matrix of zero-padded 3x3 neighbourhoods: (C * 9) x (H * W).
RowMatrix<double> im2col3x3(const FeatureMap& x) {
  const Index h = x.height;
  const Index w = x.width;
  RowMatrix<double> cols = RowMatrix<double>::Zero(x.channels * 9, h * w);
  for (Index c = 0; c < x.channels; ++c) {
    for (Index dy = 0; dy < 3; ++dy) {
      for (Index dx = 0; dx < 3; ++dx) {
        const Index row = (c * 3 + dy) * 3 + dx;
        for (Index i = 0; i < h; ++i) {
          const Index si = i + dy - 1;
          if (si < 0 || si >= h) continue;
          for (Index j = 0; j < w; ++j) {
            const Index sj = j + dx - 1;
            if (sj < 0 || sj >= w) continue;
            cols(row, i * w + j) = x.data(c, si * w + sj);
          }
        }
      }
    }
  }
  return cols;
}

}  // namespace

FeatureMap apply(const Conv3x3& layer, const FeatureMap& x) {
  if (layer.in_channels() != x.channels || layer.weight.cols() % 9 != 0)
    throw ShapeError("conv3x3 expects " + std::to_string(layer.in_channels()) + " channels, got " +
                     std::to_string(x.channels));
  FeatureMap out(layer.out_channels(), x.height, x.width);
  out.data.noalias() = layer.weight * im2col3x3(x);
  out.data.colwise() += layer.bias;
  return out;
}

FeatureMap apply(const DepthwiseConv3x3& layer, const FeatureMap& x) {
  if (layer.weight.rows() != x.channels || layer.weight.cols() != 9)
    throw ShapeError("depthwise conv expects " + std::to_string(layer.weight.rows()) + " channels, got " +
                     std::to_string(x.channels));
  const Index h = x.height;
  const Index w = x.width;
  FeatureMap out(x.channels, h, w);
  for (Index c = 0; c < x.channels; ++c) {
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        double acc = layer.bias(c);
        for (Index dy = 0; dy < 3; ++dy) {
          const Index si = i + dy - 1;
          if (si < 0 || si >= h) continue;
          for (Index dx = 0; dx < 3; ++dx) {
            const Index sj = j + dx - 1;
            if (sj < 0 || sj >= w) continue;
            acc += layer.weight(c, dy * 3 + dx) * x.data(c, si * w + sj);
          }
        }
        out.data(c, i * w + j) = acc;
      }
    }
  }
  return out;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  if (a.height != b.height || a.width != b.width) throw ShapeError("concat_channels: spatial dimensions differ");
  FeatureMap out(a.channels + b.channels, a.height, a.width);
  out.data.topRows(a.channels) = a.data;
  out.data.bottomRows(b.channels) = b.data;
  return out;
}

FeatureMap slice_channels(const FeatureMap& x, Index first, Index count) {
  if (first < 0 || count < 0 || first + count > x.channels) throw ShapeError("slice_channels: range out of bounds");
  FeatureMap out(count, x.height, x.width);
  out.data = x.data.middleRows(first, count);
  return out;
}

}  // namespace ownrecon

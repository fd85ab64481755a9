#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/nn/tensor.hpp"

namespace specsense::nn {

inline constexpr double kLogitClamp = 30.0;

/// Dot product with four interleaved partial sums. The summation order is fixed,
/// so results are reproducible, and the independent chains vectorise.
inline double dot(const double* a, const double* b, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (std::size_t k = 0; k < 4; ++k) s[k] += a[i + k] * b[i + k];
  for (; i < n; ++i) s[0] += a[i] * b[i];
  return (s[0] + s[1]) + (s[2] + s[3]);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Output probability; the logit is clamped to +-30 first so p stays strictly inside (0, 1).
inline double probability_from_logit(double z) { return sigmoid(std::clamp(z, -kLogitClamp, kLogitClamp)); }

/// Binary cross-entropy of sigmoid(z) against y, evaluated as softplus(z) - y z.
inline double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

/// d/dz of bce_with_logit.
inline double bce_grad(double z, double y) { return sigmoid(z) - y; }

/// Non-overlapping average pooling; trailing rows/columns that do not fill a window are dropped.
inline Matrix<double> avg_pool(const Matrix<double>& in, std::size_t ph, std::size_t pw) {
  if (ph == 0 || pw == 0) throw Error(Errc::InvalidArgument, "pool window must be non-empty");
  const std::size_t oh = in.rows() / ph, ow = in.cols() / pw;
  Matrix<double> out(oh, ow, 0.0);
  const double inv = 1.0 / static_cast<double>(ph * pw);
  for (std::size_t r = 0; r < oh * ph; ++r)
    for (std::size_t c = 0; c < ow * pw; ++c) out(r / ph, c / pw) += in(r, c);
  for (double& v : out.data()) v *= inv;
  return out;
}

/// Averages the C channels of an H x W x C activation (C fastest) into one H x W map.
inline void channel_average_pool(std::span<const double> in, std::size_t channels, std::span<double> out) {
  const double inv = 1.0 / static_cast<double>(channels);
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double* v = in.data() + p * channels;
    double s = 0.0;
    for (std::size_t c = 0; c < channels; ++c) s += v[c];
    out[p] = s * inv;
  }
}

/// Backward of channel_average_pool: each input cell receives 1/C of its output cell's gradient.
inline void channel_average_pool_backward(std::span<const double> grad_out, std::size_t channels,
                                          std::span<double> grad_in) {
  const double inv = 1.0 / static_cast<double>(channels);
  for (std::size_t p = 0; p < grad_out.size(); ++p) {
    const double g = grad_out[p] * inv;
    for (std::size_t c = 0; c < channels; ++c) grad_in[p * channels + c] = g;
  }
}

inline Tensor<double> channel_average_pool(const Tensor<double>& in) {
  if (in.rank() != 3 || in.shape[2] == 0) throw Error(Errc::ShapeMismatch, "expected an H x W x C tensor with C >= 1");
  Tensor<double> out({in.shape[0], in.shape[1]});
  channel_average_pool(in.values, in.shape[2], out.values);
  return out;
}

/// Inverted-dropout scales: 0 with probability p, otherwise 1 / (1 - p).
inline void dropout_mask(std::span<double> mask, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 / (1.0 - p);
  for (double& m : mask) m = u(rng) < p ? 0.0 : keep;
}

/// Affine input normalisation applied before the first layer.
struct InputNorm {
  double shift = 0.0;
  double scale = 1.0;
  double apply(double v) const { return (v - shift) / scale; }
};

/// Dropout source for a training-mode forward pass.
struct Dropout {
  double p = 0.5;
  std::mt19937_64* rng = nullptr;
};

}  // namespace specsense::nn

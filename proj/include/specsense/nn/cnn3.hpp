#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/nn/init.hpp"
#include "specsense/nn/layers.hpp"
#include "specsense/nn/tensor.hpp"
#include "specsense/spectrogram.hpp"

namespace specsense::nn {

// avg-pool 10x2 -> conv 3x3x20 + ReLU -> channel average -> fc 150 + ReLU -> dropout -> fc 1 -> sigmoid
struct Cnn3 {
  static constexpr std::size_t kPoolT = 10, kPoolF = 2;
  static constexpr std::size_t kInH = kChannelRows / kPoolT;  // 13
  static constexpr std::size_t kInW = kChannelCols / kPoolF;  // 23
  static constexpr std::size_t kK = 3;
  static constexpr std::size_t kFilters = 20;
  static constexpr std::size_t kConvH = kInH - kK + 1;  // 11
  static constexpr std::size_t kConvW = kInW - kK + 1;  // 21
  static constexpr std::size_t kFlat = kConvH * kConvW;  // 231
  static constexpr std::size_t kHidden = 150;

  enum Slot : std::size_t { ConvW, ConvB, Fc1W, Fc1B, Fc2W, Fc2B };

  using Input = Matrix<double>;  // pooled 13 x 23, un-normalised

  ParamSet params;
  InputNorm norm;

  Cnn3() {
    // conv.w is [ky][kx][filter]; fc1.w is [out][in].
    params.add("conv.w", {kK, kK, kFilters}, InitKind::XavierUniform, kK * kK, kK * kK * kFilters);
    params.add("conv.b", {kFilters}, InitKind::Zero);
    params.add("fc1.w", {kHidden, kFlat}, InitKind::TruncatedNormal);
    params.add("fc1.b", {kHidden}, InitKind::Zero);
    params.add("fc2.w", {1, kHidden}, InitKind::TruncatedNormal);
    params.add("fc2.b", {1}, InitKind::Zero);
  }

  static Input prepare(const ChannelSlice& ch) {
    if (ch.values.rows() != kChannelRows || ch.values.cols() != kChannelCols)
      throw Error(Errc::ShapeMismatch, "CNN-3 expects a 134 x 46 channel slice");
    return avg_pool(ch.values, kPoolT, kPoolF);
  }

  struct Workspace {
    std::array<double, kInH * kInW> in{};
    std::array<double, kFlat * kFilters> conv_z{};  // [y][x][filter]
    std::array<double, kFlat * kFilters> conv_a{};
    std::array<double, kFlat> pooled{};
    std::array<double, kHidden> z1{}, h1{}, mask{}, d1{};
    bool dropped = false;
    double z2 = 0.0;
    // backward scratch
    std::array<double, kFlat> dpooled{};
    std::array<double, kFlat * kFilters> dconv{};
  };

  /// Returns the logit.
  double forward(const Input& x, Workspace& ws, const Dropout* drop = nullptr) const {
    if (x.rows() != kInH || x.cols() != kInW) throw Error(Errc::ShapeMismatch, "CNN-3 expects a 13 x 23 pooled input");
    for (std::size_t i = 0; i < kInH * kInW; ++i) ws.in[i] = norm.apply(x.data()[i]);

    const auto w = params.view(ConvW);
    const auto b = params.view(ConvB);
    for (std::size_t y = 0; y < kConvH; ++y)
      for (std::size_t xx = 0; xx < kConvW; ++xx) {
        double* out = &ws.conv_z[(y * kConvW + xx) * kFilters];
        for (std::size_t c = 0; c < kFilters; ++c) out[c] = b[c];
        for (std::size_t ky = 0; ky < kK; ++ky)
          for (std::size_t kx = 0; kx < kK; ++kx) {
            const double v = ws.in[(y + ky) * kInW + xx + kx];
            const double* wk = &w[(ky * kK + kx) * kFilters];
            for (std::size_t c = 0; c < kFilters; ++c) out[c] += v * wk[c];
          }
      }
    for (std::size_t i = 0; i < ws.conv_z.size(); ++i) ws.conv_a[i] = std::max(ws.conv_z[i], 0.0);
    channel_average_pool(ws.conv_a, kFilters, ws.pooled);

    const auto w1 = params.view(Fc1W);
    const auto b1 = params.view(Fc1B);
    for (std::size_t j = 0; j < kHidden; ++j) {
      const double s = b1[j] + dot(&w1[j * kFlat], ws.pooled.data(), kFlat);
      ws.z1[j] = s;
      ws.h1[j] = std::max(s, 0.0);
    }
    ws.dropped = drop && drop->rng && drop->p > 0.0;
    if (ws.dropped) {
      dropout_mask(ws.mask, drop->p, *drop->rng);
      for (std::size_t j = 0; j < kHidden; ++j) ws.d1[j] = ws.h1[j] * ws.mask[j];
    } else {
      ws.d1 = ws.h1;
    }
    const auto w2 = params.view(Fc2W);
    const double z2 = params.view(Fc2B)[0] + dot(w2.data(), ws.d1.data(), kHidden);
    ws.z2 = z2;
    return z2;
  }

  /// Accumulates dL/dtheta into `grad` given dL/dlogit. When `touched` is given,
  /// the ranges of `grad` that may have been written are appended to it.
  void backward(Workspace& ws, double dz2, std::vector<double>& grad, std::vector<Range>* touched = nullptr) const {
    const auto& s = params.slots();
    const auto w1 = params.view(Fc1W);
    const auto w2 = params.view(Fc2W);

    grad[s[Fc2B].offset] += dz2;
    double* gw2 = &grad[s[Fc2W].offset];
    for (std::size_t j = 0; j < kHidden; ++j) gw2[j] += dz2 * ws.d1[j];
    if (touched) touched->push_back({s[Fc2W].offset, s[Fc2B].offset + 1});

    ws.dpooled.fill(0.0);
    double* gw1 = &grad[s[Fc1W].offset];
    double* gb1 = &grad[s[Fc1B].offset];
    for (std::size_t j = 0; j < kHidden; ++j) {
      double dz1 = dz2 * w2[j];
      if (ws.dropped) dz1 *= ws.mask[j];
      if (!(ws.z1[j] > 0.0) || dz1 == 0.0) continue;
      gb1[j] += dz1;
      double* grow = gw1 + j * kFlat;
      const double* wrow = &w1[j * kFlat];
      for (std::size_t i = 0; i < kFlat; ++i) {
        grow[i] += dz1 * ws.pooled[i];
        ws.dpooled[i] += dz1 * wrow[i];
      }
      if (touched) {
        touched->push_back({s[Fc1W].offset + j * kFlat, s[Fc1W].offset + (j + 1) * kFlat});
        touched->push_back({s[Fc1B].offset + j, s[Fc1B].offset + j + 1});
      }
    }

    channel_average_pool_backward(ws.dpooled, kFilters, ws.dconv);
    for (std::size_t i = 0; i < ws.dconv.size(); ++i)
      if (!(ws.conv_z[i] > 0.0)) ws.dconv[i] = 0.0;

    double* gw = &grad[s[ConvW].offset];
    double* gb = &grad[s[ConvB].offset];
    for (std::size_t y = 0; y < kConvH; ++y)
      for (std::size_t xx = 0; xx < kConvW; ++xx) {
        const double* d = &ws.dconv[(y * kConvW + xx) * kFilters];
        for (std::size_t c = 0; c < kFilters; ++c) gb[c] += d[c];
        for (std::size_t ky = 0; ky < kK; ++ky)
          for (std::size_t kx = 0; kx < kK; ++kx) {
            const double v = ws.in[(y + ky) * kInW + xx + kx];
            double* gk = gw + (ky * kK + kx) * kFilters;
            for (std::size_t c = 0; c < kFilters; ++c) gk[c] += v * d[c];
          }
      }
    if (touched) touched->push_back({s[ConvW].offset, s[ConvB].offset + kFilters});
  }

  /// Sign pattern of every ReLU input; two evaluations with equal patterns lie on the same linear piece.
  void relu_pattern(const Workspace& ws, std::vector<std::uint8_t>& p) const {
    p.clear();
    for (double v : ws.conv_z) p.push_back(v > 0.0);
    for (double v : ws.z1) p.push_back(v > 0.0);
  }

  void initialize(std::uint64_t seed) { nn::initialize(params, seed); }
};

inline Cnn3 init_cnn3(std::uint64_t seed) {
  Cnn3 net;
  net.initialize(seed);
  return net;
}

/// Probability for one channel. In train mode dropout is drawn from `dropout_seed`.
inline double cnn3_forward(const Cnn3& net, const ChannelSlice& ch, bool train_mode = false,
                           std::uint64_t dropout_seed = 0, double dropout_p = 0.5) {
  Cnn3::Workspace ws;
  std::mt19937_64 rng(dropout_seed);
  const Dropout drop{dropout_p, &rng};
  return probability_from_logit(net.forward(Cnn3::prepare(ch), ws, train_mode ? &drop : nullptr));
}

/// Unclamped logit; a strictly increasing function of the probability, used as the ranking score.
inline double cnn3_logit(const Cnn3& net, const ChannelSlice& ch) {
  Cnn3::Workspace ws;
  return net.forward(Cnn3::prepare(ch), ws);
}

}  // namespace specsense::nn

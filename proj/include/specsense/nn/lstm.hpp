#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/nn/init.hpp"
#include "specsense/nn/layers.hpp"
#include "specsense/nn/tensor.hpp"
#include "specsense/spectrogram.hpp"

namespace specsense::nn {

// One LSTM cell unrolled over the 134 time rows of a channel slice (46 inputs per
// step), followed by fc 50 + ReLU -> fc 1 -> sigmoid on the last step's output.
// With `residual`, each step's output is h_t plus the previous step's output.
// In training mode the recurrent input o_{t-1} passes through dropout.
struct Lstm {
  static constexpr std::size_t kIn = kChannelCols;
  static constexpr std::size_t kSteps = kChannelRows;
  static constexpr std::size_t kFc = 50;

  enum Slot : std::size_t { GateW, GateB, Fc1W, Fc1B, Fc2W, Fc2B };

  using Input = Matrix<double>;  // 134 x 46, un-normalised

  std::size_t hidden = 64;
  bool residual = true;
  ParamSet params;
  InputNorm norm;

  explicit Lstm(std::size_t h = 64, bool residual_mode = true) : hidden(h), residual(residual_mode) {
    if (h == 0) throw Error(Errc::InvalidConfig, "hidden size must be positive");
    // Gate rows are stacked i, f, g, o; columns are [x_t ; o_{t-1}].
    params.add("gate.w", {4 * h, kIn + h}, InitKind::XavierUniform, kIn + h, h);
    params.add("gate.b", {4 * h}, InitKind::Zero);
    params.add("fc1.w", {kFc, h}, InitKind::TruncatedNormal);
    params.add("fc1.b", {kFc}, InitKind::Zero);
    params.add("fc2.w", {1, kFc}, InitKind::TruncatedNormal);
    params.add("fc2.b", {1}, InitKind::Zero);
  }

  static Input prepare(const ChannelSlice& ch) {
    if (ch.values.rows() != kChannelRows || ch.values.cols() != kChannelCols)
      throw Error(Errc::ShapeMismatch, "LSTM expects a 134 x 46 channel slice");
    return ch.values;
  }

  struct Workspace {
    std::size_t H = 0;
    std::size_t T = 0;
    std::vector<double> in;    // T x (46 + H)
    std::vector<double> gate;  // T x 4H, post-activation
    std::vector<double> c;     // (T + 1) x H, row 0 is c_{-1} = 0
    std::vector<double> tc;    // T x H, tanh(c_t)
    std::vector<double> out;   // (T + 1) x H, row 0 is o_{-1} = 0
    std::vector<double> mask;  // T x H
    bool dropped = false;
    std::vector<double> z1, h1;
    double z2 = 0.0;
    std::vector<double> dout, dc, da, din;  // backward scratch

    void resize(std::size_t h, std::size_t t) {
      if (H == h && T == t) return;
      H = h;
      T = t;
      in.assign(t * (kIn + h), 0.0);
      gate.assign(t * 4 * h, 0.0);
      c.assign((t + 1) * h, 0.0);
      tc.assign(t * h, 0.0);
      out.assign((t + 1) * h, 0.0);
      mask.assign(t * h, 1.0);
      z1.assign(kFc, 0.0);
      h1.assign(kFc, 0.0);
      dout.assign(h, 0.0);
      dc.assign(h, 0.0);
      da.assign(4 * h, 0.0);
      din.assign(kIn + h, 0.0);
    }
  };

  double forward(const Input& x, Workspace& ws, const Dropout* drop = nullptr) const {
    if (x.cols() != kIn || x.rows() == 0) throw Error(Errc::ShapeMismatch, "LSTM input rows must have 46 values");
    const std::size_t H = hidden, T = x.rows(), W = kIn + H;
    ws.resize(H, T);
    ws.dropped = drop && drop->rng && drop->p > 0.0;
    const auto w = params.view(GateW);
    const auto b = params.view(GateB);

    for (std::size_t t = 0; t < T; ++t) {
      double* in = &ws.in[t * W];
      for (std::size_t k = 0; k < kIn; ++k) in[k] = norm.apply(x(t, k));
      const double* prev = &ws.out[t * H];
      double* m = &ws.mask[t * H];
      if (ws.dropped) dropout_mask({m, H}, drop->p, *drop->rng);
      else std::fill(m, m + H, 1.0);
      for (std::size_t k = 0; k < H; ++k) in[kIn + k] = prev[k] * m[k];

      double* g = &ws.gate[t * 4 * H];
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double s = b[r] + dot(&w[r * W], in, W);
        g[r] = r / H == 2 ? std::tanh(s) : sigmoid(s);
      }
      const double* cp = &ws.c[t * H];
      double* cn = &ws.c[(t + 1) * H];
      double* tc = &ws.tc[t * H];
      double* on = &ws.out[(t + 1) * H];
      for (std::size_t k = 0; k < H; ++k) {
        const double i = g[k], f = g[H + k], gg = g[2 * H + k], o = g[3 * H + k];
        cn[k] = f * cp[k] + i * gg;
        tc[k] = std::tanh(cn[k]);
        on[k] = o * tc[k] + (residual ? prev[k] : 0.0);
      }
    }

    const double* last = &ws.out[T * H];
    const auto w1 = params.view(Fc1W);
    const auto b1 = params.view(Fc1B);
    for (std::size_t j = 0; j < kFc; ++j) {
      const double s = b1[j] + dot(&w1[j * H], last, H);
      ws.z1[j] = s;
      ws.h1[j] = std::max(s, 0.0);
    }
    const auto w2 = params.view(Fc2W);
    const double z2 = params.view(Fc2B)[0] + dot(w2.data(), ws.h1.data(), kFc);
    ws.z2 = z2;
    return z2;
  }

  void backward(Workspace& ws, double dz2, std::vector<double>& grad, std::vector<Range>* touched = nullptr) const {
    const std::size_t H = hidden, T = ws.T, W = kIn + H;
    const auto& s = params.slots();
    const auto w = params.view(GateW);
    const auto w1 = params.view(Fc1W);
    const auto w2 = params.view(Fc2W);

    grad[s[Fc2B].offset] += dz2;
    double* gw2 = &grad[s[Fc2W].offset];
    double* gw1 = &grad[s[Fc1W].offset];
    double* gb1 = &grad[s[Fc1B].offset];
    std::fill(ws.dout.begin(), ws.dout.end(), 0.0);
    const double* last = &ws.out[T * H];
    for (std::size_t j = 0; j < kFc; ++j) {
      gw2[j] += dz2 * ws.h1[j];
      const double dz1 = ws.z1[j] > 0.0 ? dz2 * w2[j] : 0.0;
      if (dz1 == 0.0) continue;
      gb1[j] += dz1;
      for (std::size_t k = 0; k < H; ++k) {
        gw1[j * H + k] += dz1 * last[k];
        ws.dout[k] += dz1 * w1[j * H + k];
      }
    }

    double* gw = &grad[s[GateW].offset];
    double* gb = &grad[s[GateB].offset];
    std::fill(ws.dc.begin(), ws.dc.end(), 0.0);
    for (std::size_t t = T; t-- > 0;) {
      const double* g = &ws.gate[t * 4 * H];
      const double* cp = &ws.c[t * H];
      const double* tc = &ws.tc[t * H];
      const double* in = &ws.in[t * W];
      const double* m = &ws.mask[t * H];
      for (std::size_t k = 0; k < H; ++k) {
        const double i = g[k], f = g[H + k], gg = g[2 * H + k], o = g[3 * H + k];
        const double dh = ws.dout[k];
        const double dc = ws.dc[k] + dh * o * (1.0 - tc[k] * tc[k]);
        ws.da[k] = dc * gg * i * (1.0 - i);
        ws.da[H + k] = dc * cp[k] * f * (1.0 - f);
        ws.da[2 * H + k] = dc * i * (1.0 - gg * gg);
        ws.da[3 * H + k] = dh * tc[k] * o * (1.0 - o);
        ws.dc[k] = dc * f;
      }
      std::fill(ws.din.begin() + kIn, ws.din.end(), 0.0);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double d = ws.da[r];
        if (d == 0.0) continue;
        gb[r] += d;
        double* grow = gw + r * W;
        const double* wrow = &w[r * W];
        for (std::size_t k = 0; k < W; ++k) grow[k] += d * in[k];
        for (std::size_t k = kIn; k < W; ++k) ws.din[k] += d * wrow[k];
      }
      // dL/do_{t-1}: through the recurrent input (masked) and, if residual, the skip path.
      for (std::size_t k = 0; k < H; ++k)
        ws.dout[k] = ws.din[kIn + k] * m[k] + (residual ? ws.dout[k] : 0.0);
    }
    if (touched) touched->push_back({0, params.size()});
  }

  void relu_pattern(const Workspace& ws, std::vector<std::uint8_t>& p) const {
    p.clear();
    for (double v : ws.z1) p.push_back(v > 0.0);
  }

  void initialize(std::uint64_t seed) { nn::initialize(params, seed); }
};

inline Lstm init_lstm(std::uint64_t seed, std::size_t hidden = 64, bool residual = true) {
  Lstm net(hidden, residual);
  net.initialize(seed);
  return net;
}

inline double lstm_forward(const Lstm& net, const ChannelSlice& ch, bool train_mode = false,
                           std::uint64_t dropout_seed = 0, double dropout_p = 0.5) {
  Lstm::Workspace ws;
  std::mt19937_64 rng(dropout_seed);
  const Dropout drop{dropout_p, &rng};
  return probability_from_logit(net.forward(Lstm::prepare(ch), ws, train_mode ? &drop : nullptr));
}

inline double lstm_logit(const Lstm& net, const ChannelSlice& ch) {
  Lstm::Workspace ws;
  return net.forward(Lstm::prepare(ch), ws);
}

}  // namespace specsense::nn

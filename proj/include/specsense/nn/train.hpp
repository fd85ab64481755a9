#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/eval/froc.hpp"
#include "specsense/nn/cnn3.hpp"
#include "specsense/nn/layers.hpp"
#include "specsense/nn/lstm.hpp"
#include "specsense/nn/optim.hpp"

namespace specsense::nn {

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adagrad;
  double learning_rate = 1e-4;
  std::size_t epochs = 1000;
  double dropout_p = 0.5;
  std::uint64_t seed = 0;
  bool standardize_inputs = true;
  std::function<void(std::size_t epoch, double mean_loss)> on_epoch;

  void validate() const {
    if (!(learning_rate > 0.0)) throw Error(Errc::InvalidConfig, "learning_rate must be positive");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw Error(Errc::InvalidConfig, "dropout_p must be in [0, 1)");
  }
};

template <typename Net>
struct TrainResult {
  Net net;
  std::vector<double> loss_history;  // mean training loss per epoch
};

/// Mean and standard deviation over every cell of every input.
template <typename Input>
InputNorm fit_input_norm(const std::vector<Input>& inputs) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& x : inputs)
    for (double v : x.data()) {
      sum += v;
      sq += v * v;
      ++n;
    }
  if (n == 0) return {};
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(sq / static_cast<double>(n) - mean * mean, 0.0);
  return {mean, var > 1e-12 ? std::sqrt(var) : 1.0};
}

/// Pure stochastic training (batch size 1) of an already initialised network.
/// Shuffling and dropout draw from streams derived from cfg.seed.
template <typename Net>
TrainResult<Net> train_network(Net net, const std::vector<typename Net::Input>& inputs, const std::vector<int>& labels,
                               const TrainConfig& cfg) {
  cfg.validate();
  if (inputs.empty()) throw Error(Errc::EmptyTrainingSet, "no training examples");
  if (labels.size() != inputs.size()) throw Error(Errc::DimensionMismatch, "label count differs from example count");
  for (int l : labels)
    if (l != 0 && l != 1) throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
  if (cfg.standardize_inputs) net.norm = fit_input_norm(inputs);

  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 1));
  std::mt19937_64 dropout_rng(mix_seed(cfg.seed, 2));
  const Dropout drop{cfg.dropout_p, &dropout_rng};
  Optimizer opt({cfg.optimizer, cfg.learning_rate}, net.params.size());
  std::vector<double> grad(net.params.size(), 0.0);
  std::vector<Range> touched;
  auto ws = std::make_unique<typename Net::Workspace>();

  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  TrainResult<Net> result{std::move(net), {}};
  Net& model = result.net;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const double y = labels[idx];
      const double z = model.forward(inputs[idx], *ws, &drop);
      const double loss = bce_with_logit(z, y);
      if (!std::isfinite(loss))
        throw Error(Errc::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) + ", example " +
                                             std::to_string(idx) + " (logit " + std::to_string(z) + ")");
      total += loss;
      touched.clear();
      model.backward(*ws, bce_grad(z, y), grad, &touched);
      opt.step(model.params.values(), grad, touched);
    }
    const double mean = total / static_cast<double>(inputs.size());
    result.loss_history.push_back(mean);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean);
  }
  return result;
}

template <typename Net>
std::vector<typename Net::Input> prepare_all(std::span<const ChannelSlice> slices) {
  std::vector<typename Net::Input> out;
  out.reserve(slices.size());
  for (const auto& s : slices) out.push_back(Net::prepare(s));
  return out;
}

inline TrainResult<Cnn3> train_cnn3(std::span<const ChannelSlice> slices, const std::vector<int>& labels,
                                    const TrainConfig& cfg) {
  return train_network(init_cnn3(mix_seed(cfg.seed, 0)), prepare_all<Cnn3>(slices), labels, cfg);
}

inline TrainResult<Lstm> train_lstm(std::span<const ChannelSlice> slices, const std::vector<int>& labels,
                                    const TrainConfig& cfg, std::size_t hidden = 64, bool residual = true) {
  return train_network(init_lstm(mix_seed(cfg.seed, 0), hidden, residual), prepare_all<Lstm>(slices), labels, cfg);
}

template <typename Net>
double predict_logit(const Net& net, const typename Net::Input& x) {
  auto ws = std::make_unique<typename Net::Workspace>();
  return net.forward(x, *ws);
}

template <typename Net>
double loss_of(const Net& net, const typename Net::Input& x, double y, typename Net::Workspace& ws) {
  return bce_with_logit(net.forward(x, ws), y);
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t n_params = 0;
  std::size_t n_checked = 0;
  std::size_t n_kink_skipped = 0;  // a ReLU changed side inside [theta - eps, theta + eps]
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// Compares the analytic gradient of the cross-entropy loss with central
/// differences for every parameter. Dropout is off. A parameter whose
/// perturbation moves any ReLU input across zero is counted in n_kink_skipped
/// instead of being compared, since the loss is not differentiable there.
template <typename Net>
GradCheckResult grad_check(const Net& net, const typename Net::Input& x, int label, double eps = 1e-5) {
  const double y = label;
  Net probe = net;
  auto ws = std::make_unique<typename Net::Workspace>();
  const double z = probe.forward(x, *ws);
  std::vector<std::uint8_t> base_pattern, pattern;
  probe.relu_pattern(*ws, base_pattern);
  std::vector<double> grad(probe.params.size(), 0.0);
  probe.backward(*ws, bce_grad(z, y), grad);

  GradCheckResult r;
  r.n_params = grad.size();
  auto& w = probe.params.values();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double saved = w[k];
    w[k] = saved + eps;
    const double lp = loss_of(probe, x, y, *ws);
    probe.relu_pattern(*ws, pattern);
    bool kink = pattern != base_pattern;
    w[k] = saved - eps;
    const double lm = loss_of(probe, x, y, *ws);
    probe.relu_pattern(*ws, pattern);
    kink = kink || pattern != base_pattern;
    w[k] = saved;
    if (kink) {
      ++r.n_kink_skipped;
      continue;
    }
    ++r.n_checked;
    const double gn = (lp - lm) / (2.0 * eps);
    const double e = relative_error(grad[k], gn);
    if (r.n_checked == 1 || e > r.max_rel_error) {
      r.max_rel_error = e;
      r.worst_index = k;
      r.worst_analytic = grad[k];
      r.worst_numeric = gn;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Multiple random initialisations

struct InitSummary {
  std::uint64_t seed = 0;
  double froc_auc = 0.0;
  eval::FrocCurve curve;
  std::vector<double> loss_history;
};

template <typename Net>
struct SweepResult {
  std::vector<InitSummary> inits;
  eval::FrocEnvelope envelope;
  std::size_t best = 0;
  Net best_net;
};

/// Trains `n_inits` copies of `prototype` from independent seeds, scores the
/// test channels with each, and keeps the instance with the largest normalised
/// FROC-AUC (first on ties). `test_meta` supplies id, centre and label for each
/// test input; its scores are overwritten with logits.
template <typename Net>
SweepResult<Net> multi_init_sweep(const Net& prototype, const std::vector<typename Net::Input>& train_x,
                                  const std::vector<int>& train_y, const std::vector<typename Net::Input>& test_x,
                                  std::vector<eval::ScoredChannel> test_meta, const TrainConfig& cfg,
                                  std::size_t n_inits) {
  if (n_inits < 1) throw Error(Errc::InvalidArgument, "n_inits must be at least 1");
  if (test_x.size() != test_meta.size()) throw Error(Errc::DimensionMismatch, "test inputs and metadata differ in size");
  SweepResult<Net> out{{}, {}, 0, prototype};
  std::vector<eval::FrocCurve> curves;
  for (std::size_t k = 0; k < n_inits; ++k) {
    TrainConfig c = cfg;
    c.seed = mix_seed(cfg.seed, 1000 + k);
    Net net = prototype;
    net.initialize(mix_seed(c.seed, 0));
    auto trained = train_network(std::move(net), train_x, train_y, c);
    auto ws = std::make_unique<typename Net::Workspace>();
    for (std::size_t i = 0; i < test_x.size(); ++i) test_meta[i].score = trained.net.forward(test_x[i], *ws);
    InitSummary s;
    s.seed = c.seed;
    s.curve = eval::froc_curve(test_meta);
    s.froc_auc = eval::froc_auc_normalized(s.curve);
    s.loss_history = std::move(trained.loss_history);
    if (k == 0 || s.froc_auc > out.inits[out.best].froc_auc) {
      out.best = k;
      out.best_net = std::move(trained.net);
    }
    curves.push_back(s.curve);
    out.inits.push_back(std::move(s));
  }
  out.envelope = eval::froc_envelope(curves);
  return out;
}

}  // namespace specsense::nn

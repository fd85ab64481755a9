#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/nn/tensor.hpp"

namespace specsense::nn {

enum class OptimizerKind { Sgd, Adagrad, Adam };

inline const char* to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adagrad: return "adagrad";
    case OptimizerKind::Adam: return "adam";
  }
  return "?";
}

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adagrad") return OptimizerKind::Adagrad;
  if (s == "adam") return OptimizerKind::Adam;
  throw Error(Errc::InvalidConfig, "unknown optimizer " + s);
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adagrad;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Applies one update and zeroes the gradient entries it consumed. `touched`
/// lists the only ranges of `grad` that may be non-zero; SGD and Adagrad leave
/// parameters with zero gradient unchanged, so they only visit those ranges.
/// Adam's moments decay every step and it always sweeps the whole buffer.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, std::size_t n) : cfg_(cfg) {
    if (!(cfg.lr > 0.0)) throw Error(Errc::InvalidConfig, "learning rate must be positive");
    if (cfg.kind == OptimizerKind::Adagrad) g2_.assign(n, 0.0);
    if (cfg.kind == OptimizerKind::Adam) {
      m_.assign(n, 0.0);
      v_.assign(n, 0.0);
    }
  }

  void step(std::vector<double>& w, std::vector<double>& grad, std::span<const Range> touched) {
    ++t_;
    switch (cfg_.kind) {
      case OptimizerKind::Sgd:
        for (const Range& r : touched)
          for (std::size_t i = r.begin; i < r.end; ++i) {
            w[i] -= cfg_.lr * grad[i];
            grad[i] = 0.0;
          }
        break;
      case OptimizerKind::Adagrad:
        for (const Range& r : touched)
          for (std::size_t i = r.begin; i < r.end; ++i) {
            const double g = grad[i];
            if (g == 0.0) continue;
            g2_[i] += g * g;
            w[i] -= cfg_.lr * g / (std::sqrt(g2_[i]) + cfg_.eps);
            grad[i] = 0.0;
          }
        break;
      case OptimizerKind::Adam: {
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < w.size(); ++i) {
          const double g = grad[i];
          m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
          v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
          w[i] -= cfg_.lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
          grad[i] = 0.0;
        }
        break;
      }
    }
  }

  std::size_t steps() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::vector<double> g2_, m_, v_;
  std::size_t t_ = 0;
};

}  // namespace specsense::nn

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "specsense/nn/tensor.hpp"

namespace specsense::nn {

/// Standard normal truncated to [-bound, bound] by rejection.
inline double truncated_normal(std::mt19937_64& rng, double bound = 2.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const double v = n(rng);
    if (std::abs(v) <= bound) return v;
  }
}

inline double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Fills every slot according to its InitKind. Slots are visited in declaration
/// order from one stream, so the result depends only on the layout and the seed.
inline void initialize(ParamSet& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < p.slots().size(); ++i) {
    const ParamSlot& s = p.slot(i);
    auto v = p.view(i);
    switch (s.init) {
      case InitKind::Zero:
        for (double& x : v) x = 0.0;
        break;
      case InitKind::XavierUniform: {
        const double b = xavier_bound(s.fan_in, s.fan_out);
        std::uniform_real_distribution<double> u(-b, b);
        for (double& x : v) x = u(rng);
        break;
      }
      case InitKind::TruncatedNormal:
        for (double& x : v) x = truncated_normal(rng);
        break;
    }
  }
}

}  // namespace specsense::nn

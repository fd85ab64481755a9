#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "specsense/common.hpp"

namespace specsense::ml {

struct GmmComponent {
  double weight = 0.5;
  std::vector<double> mean;
  std::vector<double> var;
};

struct GmmModel {
  std::array<GmmComponent, 2> components;
  std::size_t positive_component = 1;
  bool degenerate = false;  // some variance sat on the floor
  std::size_t iterations = 0;
  std::vector<double> log_likelihood;  // total, one entry per EM iteration
};

struct GmmOptions {
  std::size_t max_iter = 500;
  double tol = 1e-6;  // per-sample mean log-likelihood gain
  double var_floor = 1e-6;
};

inline double gmm_log_density(const GmmComponent& c, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - c.mean[j];
    s += std::log(2.0 * std::numbers::pi * c.var[j]) + d * d / c.var[j];
  }
  return -0.5 * s;
}

/// Returns {posterior of the positive component, posterior of the other}; they sum to one.
inline std::pair<double, double> gmm_posteriors(const GmmModel& m, std::span<const double> x) {
  if (x.size() != m.components[0].mean.size()) throw Error(Errc::DimensionMismatch, "feature length mismatch");
  const std::size_t p = m.positive_component;
  const std::size_t q = 1 - p;
  const double lp = std::log(m.components[p].weight) + gmm_log_density(m.components[p], x);
  const double lq = std::log(m.components[q].weight) + gmm_log_density(m.components[q], x);
  const double post = 1.0 / (1.0 + std::exp(lq - lp));
  return {post, 1.0 - post};
}

inline double gmm_score(const GmmModel& m, std::span<const double> x) { return gmm_posteriors(m, x).first; }

/// Two-component diagonal-covariance EM. Components are mapped to labels afterwards:
/// the component whose claimed points have the larger positive fraction scores SPN-43.
inline GmmModel gmm_fit(const Matrix<double>& x, const std::vector<int>& labels, std::uint64_t seed,
                        const GmmOptions& opt = {}) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw Error(Errc::EmptyTrainingSet, "GMM needs at least two samples");
  if (labels.size() != n) throw Error(Errc::DimensionMismatch, "label count differs from sample count");

  std::vector<double> gmean(d, 0.0), gvar(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) gmean[j] += x(i, j);
  for (double& v : gmean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double t = x(i, j) - gmean[j];
      gvar[j] += t * t;
    }
  for (double& v : gvar) v = std::max(v / static_cast<double>(n), opt.var_floor);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t a = pick(rng);
  std::size_t b = pick(rng);
  for (int tries = 0; tries < 64 && (b == a || std::equal(x.row(a).begin(), x.row(a).end(), x.row(b).begin())); ++tries)
    b = pick(rng);
  if (b == a) b = (a + 1) % n;

  GmmModel m;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto row = x.row(k == 0 ? a : b);
    m.components[k].weight = 0.5;
    m.components[k].mean.assign(row.begin(), row.end());
    m.components[k].var = gvar;
  }

  std::vector<double> resp(n);  // responsibility of component 1
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    // E-step
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double l0 = std::log(m.components[0].weight) + gmm_log_density(m.components[0], x.row(i));
      const double l1 = std::log(m.components[1].weight) + gmm_log_density(m.components[1], x.row(i));
      const double mx = std::max(l0, l1);
      const double lse = mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
      resp[i] = std::exp(l1 - lse);
      ll += lse;
    }
    m.log_likelihood.push_back(ll);
    m.iterations = it + 1;
    if (it > 0 && (ll - prev) / static_cast<double>(n) < opt.tol) break;
    prev = ll;

    // M-step
    m.degenerate = false;
    for (std::size_t k = 0; k < 2; ++k) {
      auto& c = m.components[k];
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += k ? resp[i] : 1.0 - resp[i];
      nk = std::max(nk, 1e-300);
      std::fill(c.mean.begin(), c.mean.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = k ? resp[i] : 1.0 - resp[i];
        const auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) c.mean[j] += r * row[j];
      }
      for (double& v : c.mean) v /= nk;
      std::fill(c.var.begin(), c.var.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = k ? resp[i] : 1.0 - resp[i];
        const auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) {
          const double t = row[j] - c.mean[j];
          c.var[j] += r * t * t;
        }
      }
      for (double& v : c.var) {
        v /= nk;
        if (!(v > opt.var_floor)) {
          v = opt.var_floor;
          m.degenerate = true;
        }
      }
      c.weight = std::clamp(nk / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
    }
  }

  // Label mapping by hard assignment.
  std::array<double, 2> claimed{0, 0}, claimed_pos{0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = resp[i] > 0.5 ? 1 : 0;
    claimed[k] += 1;
    claimed_pos[k] += labels[i] ? 1 : 0;
  }
  const double f0 = claimed[0] > 0 ? claimed_pos[0] / claimed[0] : 0.0;
  const double f1 = claimed[1] > 0 ? claimed_pos[1] / claimed[1] : 0.0;
  m.positive_component = f1 >= f0 ? 1 : 0;
  return m;
}

}  // namespace specsense::ml

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "specsense/common.hpp"

namespace specsense::stats {

struct CcdfBand {
  std::vector<double> grid;   // sorted distinct sample values
  std::vector<double> ccdf;   // fraction of samples strictly above grid[i]
  std::vector<double> lower;  // ccdf - eps, clipped
  std::vector<double> upper;  // ccdf + eps, clipped
  std::size_t n = 0;
  double alpha = 0.05;
  double eps = 0.0;
};

/// Dvoretzky-Kiefer-Wolfowitz half-width for a simultaneous (1 - alpha) band.
inline double dkw_epsilon(std::size_t n, double alpha) {
  if (n == 0) throw Error(Errc::InvalidArgument, "DKW needs at least one sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must be in (0,1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

inline CcdfBand empirical_ccdf_with_dkw(std::vector<double> samples, double alpha = 0.05) {
  CcdfBand b;
  b.n = samples.size();
  b.alpha = alpha;
  b.eps = dkw_epsilon(b.n, alpha);
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double c = static_cast<double>(samples.size() - j) / n;
    b.grid.push_back(samples[i]);
    b.ccdf.push_back(c);
    b.lower.push_back(std::max(0.0, c - b.eps));
    b.upper.push_back(std::min(1.0, c + b.eps));
    i = j;
  }
  return b;
}

/// Empirical CCDF of the band at any x (right-continuous step function).
inline double ccdf_at(const CcdfBand& b, double x) {
  const auto it = std::upper_bound(b.grid.begin(), b.grid.end(), x);
  if (it == b.grid.begin()) return 1.0;
  return b.ccdf[static_cast<std::size_t>(it - b.grid.begin()) - 1];
}

/// Fixed-bandwidth Gaussian kernel density estimate.
class GaussianKde {
 public:
  GaussianKde(std::vector<double> samples, double bandwidth = 1.0) : xs_(std::move(samples)), h_(bandwidth) {
    if (xs_.empty()) throw Error(Errc::InvalidArgument, "KDE needs at least one sample");
    if (!(h_ > 0.0)) throw Error(Errc::InvalidArgument, "bandwidth must be positive");
    std::sort(xs_.begin(), xs_.end());  // summation order independent of input order
  }

  double operator()(double x) const {
    const double norm = 1.0 / (static_cast<double>(xs_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
    double s = 0.0;
    for (double xi : xs_) {
      const double u = (x - xi) / h_;
      s += std::exp(-0.5 * u * u);
    }
    return s * norm;
  }

  double bandwidth() const { return h_; }
  std::size_t size() const { return xs_.size(); }

 private:
  std::vector<double> xs_;
  double h_;
};

inline GaussianKde gaussian_kde(std::vector<double> samples, double bandwidth = 1.0) {
  return GaussianKde(std::move(samples), bandwidth);
}

}  // namespace specsense::stats

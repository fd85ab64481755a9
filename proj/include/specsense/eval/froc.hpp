#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/eval/roc.hpp"
#include "specsense/synth.hpp"

namespace specsense::eval {

struct FrocCurve {
  std::vector<CurvePoint> points;  // x = mean FPs per spectrogram, y = detection fraction
  std::size_t n_spectrograms = 0;
  std::size_t n_present = 0;
  std::size_t n_absent = 0;

  /// Largest reachable abscissa: absent channels per spectrogram.
  double normalizer() const {
    return n_spectrograms ? static_cast<double>(n_absent) / static_cast<double>(n_spectrograms) : 0.0;
  }
};

/// Localisation is by channel identity: a true positive is a present-labelled
/// channel scored above the threshold, every other flag is a false positive.
inline FrocCurve froc_curve(std::span<const ScoredChannel> scored) {
  if (scored.empty()) throw Error(Errc::InvalidArgument, "no scored channels");
  FrocCurve c;
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<double> pos, neg;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) throw Error(Errc::InvalidArgument, "scores must be finite");
    ids.emplace(s.spectrogram_id, ids.size());
    (s.present ? pos : neg).push_back(s.score);
  }
  c.n_spectrograms = ids.size();
  c.n_present = pos.size();
  c.n_absent = neg.size();
  if (pos.empty()) throw Error(Errc::NoSignals, "detection fraction undefined without present channels");

  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  std::vector<double> all(pos);
  all.insert(all.end(), neg.begin(), neg.end());
  std::size_t ip = 0, in = 0;
  const double n_spec = static_cast<double>(c.n_spectrograms);
  const double n_pos = static_cast<double>(pos.size());
  for (double t : sweep_thresholds(std::move(all))) {
    while (ip < pos.size() && pos[ip] > t) ++ip;
    while (in < neg.size() && neg[in] > t) ++in;
    c.points.push_back({t, static_cast<double>(in) / n_spec, static_cast<double>(ip) / n_pos});
  }
  return c;
}

/// Trapezoidal area divided by the maximum abscissa. With no absent channels the
/// curve collapses onto x = 0 and the final detection fraction (1) is returned.
inline double froc_auc_normalized(const FrocCurve& c) {
  const double norm = c.normalizer();
  if (norm <= 0.0) return c.points.empty() ? 0.0 : c.points.back().y;
  return std::clamp(trapezoid_area(c.points) / norm, 0.0, 1.0);
}

struct BootstrapInterval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> replicates;
};

/// Linear-interpolation sample quantile of sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(Errc::InvalidArgument, "quantile of empty sample");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Percentile bootstrap of the normalised FROC-AUC. Spectrograms are the
/// resampling unit; `strata` maps each spectrogram id to its stratum so the
/// per-stratum counts are preserved. Replicate b draws from seed stream b.
inline BootstrapInterval bootstrap_froc_ci(std::span<const ScoredChannel> scored,
                                           const std::map<std::string, std::size_t>& strata, std::size_t B = 2000,
                                           double alpha = 0.05, std::uint64_t seed = 0) {
  if (B < 100) throw Error(Errc::InvalidArgument, "bootstrap needs B >= 100");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    auto [it, fresh] = members.try_emplace(scored[i].spectrogram_id);
    if (fresh) order.push_back(scored[i].spectrogram_id);
    it->second.push_back(i);
  }
  std::vector<std::size_t> tags;
  for (const auto& id : order) {
    const auto it = strata.find(id);
    if (it == strata.end()) throw Error(Errc::InvalidArgument, "no stratum for spectrogram " + id);
    tags.push_back(it->second);
  }

  BootstrapInterval out;
  out.point = froc_auc_normalized(froc_curve(scored));
  out.replicates.reserve(B);
  std::vector<ScoredChannel> resampled;
  for (std::size_t b = 0; b < B; ++b) {
    resampled.clear();
    std::size_t k = 0;
    for (std::size_t idx : synth::stratified_bootstrap_indices(tags, mix_seed(seed, b))) {
      // A spectrogram drawn twice counts as two spectrograms.
      const std::string rid = order[idx] + "#" + std::to_string(k++);
      for (std::size_t i : members[order[idx]]) {
        ScoredChannel c = scored[i];
        c.spectrogram_id = rid;
        resampled.push_back(std::move(c));
      }
    }
    double v;
    try {
      v = froc_auc_normalized(froc_curve(resampled));
    } catch (const Error& e) {
      if (e.code() != Errc::NoSignals) throw;
      v = 0.0;
    }
    out.replicates.push_back(v);
  }
  std::vector<double> sorted = out.replicates;
  std::sort(sorted.begin(), sorted.end());
  out.lo = sorted_quantile(sorted, alpha / 2.0);
  out.hi = sorted_quantile(sorted, 1.0 - alpha / 2.0);
  return out;
}

/// Pointwise min/max of several FROC curves, each read as the step function
/// y(x) = max{ y_j : x_j <= x }, on the union of all abscissae.
struct FrocEnvelope {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
};

// Both coordinates are non-decreasing along the sweep, so the last point with
// x_j <= x carries the maximum.
inline double froc_step_value(const FrocCurve& c, double x) {
  const auto it = std::upper_bound(c.points.begin(), c.points.end(), x,
                                   [](double v, const CurvePoint& p) { return v < p.x; });
  return it == c.points.begin() ? 0.0 : std::prev(it)->y;
}

inline FrocEnvelope froc_envelope(std::span<const FrocCurve> curves) {
  FrocEnvelope e;
  for (const auto& c : curves)
    for (const auto& p : c.points) e.x.push_back(p.x);
  std::sort(e.x.begin(), e.x.end());
  e.x.erase(std::unique(e.x.begin(), e.x.end()), e.x.end());
  e.lo.assign(e.x.size(), 1.0);
  e.hi.assign(e.x.size(), 0.0);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < e.x.size(); ++i) {
      const double y = froc_step_value(c, e.x[i]);
      e.lo[i] = std::min(e.lo[i], y);
      e.hi[i] = std::max(e.hi[i], y);
    }
  return e;
}

}  // namespace specsense::eval

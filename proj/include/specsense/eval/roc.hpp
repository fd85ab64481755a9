#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "specsense/common.hpp"

namespace specsense::eval {

struct ScoredChannel {
  std::string spectrogram_id;
  double channel_center = 0.0;  // Hz
  double score = 0.0;
  bool present = false;
};

// One operating point. For ROC x = FPR, y = TPR; for FROC x = mean FPs per
// spectrogram, y = detection fraction. A channel is flagged when score > threshold.
struct CurvePoint {
  double threshold = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct RocCurve {
  std::vector<CurvePoint> points;
};

struct SplitScores {
  std::vector<double> pos;
  std::vector<double> neg;
};

inline SplitScores split_scores(std::span<const ScoredChannel> scored) {
  SplitScores s;
  for (const auto& c : scored) {
    if (!std::isfinite(c.score)) throw Error(Errc::InvalidArgument, "scores must be finite");
    (c.present ? s.pos : s.neg).push_back(c.score);
  }
  return s;
}

inline void require_both_classes(const SplitScores& s) {
  if (s.pos.empty() || s.neg.empty()) throw Error(Errc::DegenerateLabels, "need at least one positive and one negative");
}

/// Thresholds swept by every curve: the distinct scores in descending order, then -inf.
inline std::vector<double> sweep_thresholds(std::vector<double> scores) {
  std::sort(scores.begin(), scores.end(), std::greater<>());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  scores.push_back(-std::numeric_limits<double>::infinity());
  return scores;
}

inline RocCurve roc_curve(const SplitScores& s) {
  require_both_classes(s);
  std::vector<double> pos = s.pos, neg = s.neg;
  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  std::vector<double> all(pos);
  all.insert(all.end(), neg.begin(), neg.end());

  RocCurve c;
  std::size_t ip = 0, in = 0;
  const double m = static_cast<double>(pos.size()), n = static_cast<double>(neg.size());
  for (double t : sweep_thresholds(std::move(all))) {
    while (ip < pos.size() && pos[ip] > t) ++ip;
    while (in < neg.size() && neg[in] > t) ++in;
    c.points.push_back({t, static_cast<double>(in) / n, static_cast<double>(ip) / m});
  }
  return c;
}

inline RocCurve roc_curve(std::span<const ScoredChannel> scored) { return roc_curve(split_scores(scored)); }

/// Mann-Whitney form: ties between a positive and a negative earn half credit.
/// The numerator is accumulated in half-units so it is an exact integer.
inline double roc_auc(const SplitScores& s) {
  require_both_classes(s);
  std::vector<double> neg = s.neg;
  std::sort(neg.begin(), neg.end());
  double twice = 0.0;
  for (double p : s.pos) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(lo, neg.end(), p);
    twice += 2.0 * static_cast<double>(lo - neg.begin()) + static_cast<double>(hi - lo);
  }
  return twice / (2.0 * static_cast<double>(s.pos.size()) * static_cast<double>(neg.size()));
}

inline double roc_auc(std::span<const ScoredChannel> scored) { return roc_auc(split_scores(scored)); }

/// Trapezoidal area under any piecewise-linear curve given in sweep order.
inline double trapezoid_area(std::span<const CurvePoint> pts) {
  double a = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) a += (pts[i].x - pts[i - 1].x) * (pts[i].y + pts[i - 1].y) / 2.0;
  return a;
}

struct AucInterval {
  double auc = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double se = 0.0;
};

inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

/// DeLong variance with a logit-transformed interval. An AUC of exactly 0 or 1
/// is pulled in to (eps, 1 - eps), eps = 1 / (2mn), before taking the logit.
inline AucInterval delong_ci(const SplitScores& s, double alpha = 0.05) {
  require_both_classes(s);
  const std::size_t m = s.pos.size(), n = s.neg.size();
  if (m < 2 || n < 2) throw Error(Errc::DegenerateLabels, "DeLong needs at least two of each class");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must be in (0,1)");

  std::vector<double> pos = s.pos, neg = s.neg;
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  auto placement = [](const std::vector<double>& other, double v) {
    const auto lo = std::lower_bound(other.begin(), other.end(), v);
    const auto hi = std::upper_bound(lo, other.end(), v);
    return (static_cast<double>(lo - other.begin()) + 0.5 * static_cast<double>(hi - lo)) /
           static_cast<double>(other.size());
  };
  std::vector<double> v10(m), v01(n);
  for (std::size_t i = 0; i < m; ++i) v10[i] = placement(neg, s.pos[i]);
  // For a negative, the fraction of positives above it (ties half).
  for (std::size_t j = 0; j < n; ++j) v01[j] = 1.0 - placement(pos, s.neg[j]);

  auto mean = [](const std::vector<double>& v) {
    double t = 0.0;
    for (double x : v) t += x;
    return t / static_cast<double>(v.size());
  };
  auto var = [](const std::vector<double>& v, double mu) {
    double t = 0.0;
    for (double x : v) t += (x - mu) * (x - mu);
    return t / static_cast<double>(v.size() - 1);
  };
  AucInterval r;
  r.auc = roc_auc(s);
  const double s10 = var(v10, mean(v10));
  const double s01 = var(v01, mean(v01));
  r.se = std::sqrt(s10 / static_cast<double>(m) + s01 / static_cast<double>(n));

  const double eps = 1.0 / (2.0 * static_cast<double>(m) * static_cast<double>(n));
  const double a = std::clamp(r.auc, eps, 1.0 - eps);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double centre = std::log(a / (1.0 - a));
  const double half = z * r.se / (a * (1.0 - a));
  auto expit = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  r.lo = std::min(expit(centre - half), r.auc);
  r.hi = std::max(expit(centre + half), std::min(r.auc, 1.0 - eps));
  return r;
}

inline AucInterval delong_ci(std::span<const ScoredChannel> scored, double alpha = 0.05) {
  return delong_ci(split_scores(scored), alpha);
}

}  // namespace specsense::eval

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/eval/roc.hpp"

namespace specsense::eval {

enum class RateKind { Fpr, Tpr };

struct RateTarget {
  RateKind kind = RateKind::Fpr;
  double q = 0.01;
};

struct ThresholdChoice {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// FPR mode: smallest swept threshold whose FPR <= q.
/// TPR mode: largest swept threshold whose TPR >= q.
/// The sweep always ends at -inf (everything flagged), so every q in [0, 1] is reachable.
inline ThresholdChoice threshold_for_rate(const SplitScores& s, RateTarget target) {
  require_both_classes(s);
  if (!(target.q >= 0.0 && target.q <= 1.0)) throw Error(Errc::Unachievable, "rate target outside [0, 1]");
  const RocCurve roc = roc_curve(s);
  const auto& pts = roc.points;  // thresholds descending, FPR and TPR ascending
  if (target.kind == RateKind::Fpr) {
    for (std::size_t i = pts.size(); i-- > 0;)
      if (pts[i].x <= target.q) return {pts[i].threshold, pts[i].x, pts[i].y};
  } else {
    for (const auto& p : pts)
      if (p.y >= target.q) return {p.threshold, p.x, p.y};
  }
  throw Error(Errc::Unachievable, "no swept threshold meets the target");
}

inline ThresholdChoice threshold_for_rate(std::span<const ScoredChannel> scored, RateTarget target) {
  return threshold_for_rate(split_scores(scored), target);
}

}  // namespace specsense::eval

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/eval/roc.hpp"

namespace specsense::stats {

inline constexpr double kMinutesPerObservation = 10.0;
inline constexpr double kHistogramMaxMinutes = 120.0;
inline constexpr std::size_t kHistogramBins = 12;  // 10, 20, ..., 120 minutes

struct Observation {
  std::size_t index = 0;  // capture number; consecutive captures are 10 minutes apart
  bool occupied = false;
};

struct ChannelTimeline {
  double channel_center = 0.0;  // Hz
  std::vector<Observation> observations;

  void validate() const {
    for (std::size_t i = 1; i < observations.size(); ++i)
      if (observations[i].index <= observations[i - 1].index)
        throw Error(Errc::InvalidArgument, "timeline indices must be strictly increasing");
  }
};

struct RunHistogram {
  std::vector<std::size_t> counts = std::vector<std::size_t>(kHistogramBins, 0);  // bin k holds runs of (k+1)*10 min
  std::size_t overflow = 0;                                                     // runs longer than 120 min
  std::vector<double> durations;                                                // every run, minutes, in order

  double total_minutes() const {
    double t = 0.0;
    for (double d : durations) t += d;
    return t;
  }
};

struct OccupancyIntervals {
  RunHistogram occupied;
  RunHistogram vacant;
};

/// Maximal runs of equal state, each lasting (run length) x 10 minutes. Runs
/// touching either end of the window are counted in full.
inline OccupancyIntervals occupancy_intervals(const ChannelTimeline& tl) {
  tl.validate();
  if (tl.observations.empty()) throw Error(Errc::InvalidArgument, "timeline has no observations");
  OccupancyIntervals out;
  auto close = [&](bool state, std::size_t len) {
    RunHistogram& h = state ? out.occupied : out.vacant;
    const double minutes = static_cast<double>(len) * kMinutesPerObservation;
    h.durations.push_back(minutes);
    if (len > kHistogramBins) ++h.overflow;
    else ++h.counts[len - 1];
  };
  bool state = tl.observations.front().occupied;
  std::size_t len = 0;
  for (const auto& o : tl.observations) {
    if (o.occupied != state) {
      close(state, len);
      state = o.occupied;
      len = 0;
    }
    ++len;
  }
  close(state, len);
  return out;
}

struct RatioEstimate {
  double ratio = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width = 0.0;  // before clipping
  std::size_t n = 0;
};

/// Occupied fraction with a normal-approximation interval p +- z sqrt(p(1-p)/n), clipped to [0, 1].
inline RatioEstimate occupancy_ratio(const ChannelTimeline& tl, double alpha = 0.05) {
  tl.validate();
  if (tl.observations.empty()) throw Error(Errc::InvalidArgument, "timeline has no observations");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must be in (0,1)");
  RatioEstimate r;
  r.n = tl.observations.size();
  std::size_t occ = 0;
  for (const auto& o : tl.observations) occ += o.occupied;
  r.ratio = static_cast<double>(occ) / static_cast<double>(r.n);
  const double z = eval::normal_quantile(1.0 - alpha / 2.0);
  r.half_width = z * std::sqrt(r.ratio * (1.0 - r.ratio) / static_cast<double>(r.n));
  r.lo = std::max(0.0, r.ratio - r.half_width);
  r.hi = std::min(1.0, r.ratio + r.half_width);
  return r;
}

}  // namespace specsense::stats

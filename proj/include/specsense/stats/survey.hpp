#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/spectrogram.hpp"
#include "specsense/stats/occupancy.hpp"

namespace specsense::stats {

/// One capture of the survey: the channel slices of a spectrogram plus, on
/// synthetic data, the true SPN-43 labels.
struct SurveyCapture {
  std::size_t index = 0;
  std::vector<ChannelSlice> channels;
  std::vector<bool> truth;  // empty when unknown
};

struct SurveyResult {
  std::vector<ChannelTimeline> timelines;            // one per channel, in channel order
  std::vector<std::vector<double>> absent_power;     // per channel, dBm/MHz of the centre bin
  std::size_t captures = 0;
  std::size_t true_present = 0;           // channel-captures labelled present (label audit)
  std::size_t true_present_excluded = 0;  // ... of which the detector declared present

  std::vector<double> pooled_absent_power() const {
    std::vector<double> all;
    for (const auto& v : absent_power) all.insert(all.end(), v.begin(), v.end());
    return all;
  }
};

/// Declares a channel present when its score exceeds `threshold`.
template <class Score>
struct ThresholdDecider {
  Score score;
  double threshold;
  bool operator()(const SurveyCapture& cap, std::size_t k) const { return score(cap.channels[k]) > threshold; }
};

template <class Score>
ThresholdDecider<Score> threshold_decider(Score score, double threshold) {
  return {std::move(score), threshold};
}

/// Reads the ground truth carried by synthetic captures.
struct OracleDecider {
  bool operator()(const SurveyCapture& cap, std::size_t k) const {
    if (k >= cap.truth.size()) throw Error(Errc::InvalidArgument, "oracle decider needs labelled captures");
    return cap.truth[k];
  }
};

inline std::size_t center_bin_column() { return kChannelCols / 2; }

/// Runs `decide` over `n_captures` captures produced by `capture_at(i)`, in
/// order. Channels declared present feed the occupancy timelines; channels
/// declared absent contribute every time row of their centre bin to the power
/// sample set.
template <class Source, class Decide>
SurveyResult apply_classifier_survey(std::size_t n_captures, Source&& capture_at, Decide&& decide,
                                     const CalibrationParams& cal = {}) {
  SurveyResult out;
  for (std::size_t i = 0; i < n_captures; ++i) {
    const SurveyCapture cap = capture_at(i);
    if (i == 0) {
      out.timelines.resize(cap.channels.size());
      out.absent_power.resize(cap.channels.size());
      for (std::size_t k = 0; k < cap.channels.size(); ++k) out.timelines[k].channel_center = cap.channels[k].center_freq;
    } else if (cap.channels.size() != out.timelines.size()) {
      throw Error(Errc::ShapeMismatch, "captures disagree on the channel count");
    }
    if (!out.timelines.empty() && !out.timelines[0].observations.empty() &&
        cap.index <= out.timelines[0].observations.back().index)
      throw Error(Errc::InvalidArgument, "capture indices must be strictly increasing");

    for (std::size_t k = 0; k < cap.channels.size(); ++k) {
      const ChannelSlice& ch = cap.channels[k];
      const bool present = decide(cap, k);
      out.timelines[k].observations.push_back({cap.index, present});
      if (k < cap.truth.size() && cap.truth[k]) {
        ++out.true_present;
        out.true_present_excluded += present;
      }
      if (present) continue;
      if (ch.units != Units::Dbm) throw Error(Errc::InvalidArgument, "survey expects calibrated dBm slices");
      const std::size_t col = center_bin_column();
      for (std::size_t r = 0; r < ch.values.rows(); ++r)
        out.absent_power[k].push_back(to_dbm_per_mhz(ch.values(r, col), cal));
    }
    ++out.captures;
  }
  return out;
}

}  // namespace specsense::stats

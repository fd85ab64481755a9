#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/spectrogram.hpp"

namespace specsense::detect {

struct SweepTemplate {
  std::vector<std::uint8_t> mask;
  double period = 3.85;
  double on_duration = 0.455;
  double bin_duration = 0.455;
  int phase_bins = 0;

  std::size_t on_count() const {
    std::size_t n = 0;
    for (auto m : mask) n += m;
    return n;
  }
};

struct EdConfig {
  std::size_t center_bins = 3;
  bool use_dbm_normalization = true;

  void validate() const {
    if (center_bins % 2 == 0 || center_bins > kChannelCols)
      throw Error(Errc::InvalidConfig, "center_bins must be odd and <= 46");
  }
};

/// First of the `n` centre columns of a 46-wide slice: column 23 is the centre,
/// so n = 3 selects 22, 23, 24.
inline std::size_t center_first_column(std::size_t n) { return kChannelCols / 2 - n / 2; }

inline SweepTemplate build_sweep_template(double period, double on_duration, double bin_duration, std::size_t n_time,
                                          int phase_bins) {
  if (!(on_duration > 0.0) || !(period > on_duration) || !(bin_duration > 0.0))
    throw Error(Errc::InvalidPeriod, "need period > on_duration > 0");
  SweepTemplate t;
  t.period = period;
  t.on_duration = on_duration;
  t.bin_duration = bin_duration;
  t.phase_bins = phase_bins;
  t.mask.assign(n_time, 0);
  const long width = std::max(1L, std::lround(on_duration / bin_duration));
  for (std::size_t k = 0;; ++k) {
    const long start = std::lround(static_cast<double>(k) * period / bin_duration) + phase_bins;
    if (start >= static_cast<long>(n_time)) break;
    for (long w = 0; w < width; ++w) {
      const long idx = start + w;
      if (idx >= 0 && idx < static_cast<long>(n_time)) t.mask[static_cast<std::size_t>(idx)] = 1;
    }
  }
  return t;
}

/// Per-row power (mW) summed over the centre columns.
inline std::vector<double> center_time_profile(const ChannelSlice& ch, const EdConfig& cfg) {
  const std::size_t first = center_first_column(cfg.center_bins);
  std::vector<double> profile(ch.values.rows(), 0.0);
  for (std::size_t r = 0; r < ch.values.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = first; c < first + cfg.center_bins; ++c)
      sum += cfg.use_dbm_normalization ? dbm_to_mw(ch.values(r, c)) : ch.values(r, c);
    profile[r] = sum;
  }
  return profile;
}

inline double energy_detect_score(const ChannelSlice& ch, const EdConfig& cfg = {}) {
  if (ch.units != Units::Dbm) throw Error(Errc::UnitsNotCalibrated, "energy detection needs a dBm slice");
  cfg.validate();
  double score = 0.0;
  for (double v : center_time_profile(ch, cfg)) score += v;
  return score;
}

/// Phase in [0, round(period / bin_duration)) maximising the masked sum; ties go to the smaller phase.
inline int align_template(const SweepTemplate& tpl, std::span<const double> time_profile) {
  const long n_phase = std::max(1L, std::lround(tpl.period / tpl.bin_duration));
  int best = 0;
  double best_sum = -1.0;
  for (long p = 0; p < n_phase; ++p) {
    const SweepTemplate shifted =
        build_sweep_template(tpl.period, tpl.on_duration, tpl.bin_duration, time_profile.size(), static_cast<int>(p));
    double sum = 0.0;
    for (std::size_t r = 0; r < time_profile.size(); ++r)
      if (shifted.mask[r]) sum += time_profile[r];
    if (sum > best_sum) {
      best_sum = sum;
      best = static_cast<int>(p);
    }
  }
  return best;
}

inline double si_energy_detect_score(const ChannelSlice& ch, const EdConfig& cfg = {}, double period = 3.85,
                                     double on_duration = 0.455, double bin_duration = 0.455) {
  if (ch.units != Units::Dbm) throw Error(Errc::UnitsNotCalibrated, "energy detection needs a dBm slice");
  cfg.validate();
  const std::vector<double> profile = center_time_profile(ch, cfg);
  const SweepTemplate base = build_sweep_template(period, on_duration, bin_duration, profile.size(), 0);
  const int phase = align_template(base, profile);
  const SweepTemplate aligned = build_sweep_template(period, on_duration, bin_duration, profile.size(), phase);
  double score = 0.0;
  for (std::size_t r = 0; r < profile.size(); ++r)
    if (aligned.mask[r]) score += profile[r];
  return score;
}

}  // namespace specsense::detect

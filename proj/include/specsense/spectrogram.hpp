#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "specsense/common.hpp"

namespace specsense {

inline constexpr std::size_t kChannelRows = 134;
inline constexpr std::size_t kChannelCols = 46;
inline constexpr double kChannelSpacingHz = 10e6;
inline constexpr double kDbmFloor = -300.0;  // stands in for log10(0)

struct StftConfig {
  std::size_t window_len = 1024;
  std::size_t flat_len = 800;
  std::size_t taper_len = 112;
  std::size_t hop = 912;
  double epoch_duration = 0.455;
  double sample_rate = 225e6;

  void validate() const {
    if (window_len == 0 || flat_len + 2 * taper_len != window_len)
      throw Error(Errc::InvalidConfig, "flat_len + 2*taper_len must equal window_len");
    if (hop < 1) throw Error(Errc::InvalidConfig, "hop must be >= 1");
    if (!(epoch_duration > 0.0) || !(sample_rate > 0.0))
      throw Error(Errc::InvalidConfig, "epoch_duration and sample_rate must be positive");
    if (segments_per_epoch() < 1)
      throw Error(Errc::InvalidConfig, "epoch shorter than one hop");
  }

  /// Segment starts per epoch; partial trailing epochs are dropped.
  std::size_t segments_per_epoch() const {
    return static_cast<std::size_t>(std::floor(epoch_duration * sample_rate / static_cast<double>(hop)));
  }
};

enum class Units { RawAmplitude, Dbm };

struct Spectrogram {
  Matrix<double> values;  // [n_time x n_freq]
  double time_bin_duration = 0.455;
  double freq_bin_width = 225e6 / 1024.0;
  double start_freq = 0.0;  // center frequency of column 0
  Units units = Units::RawAmplitude;
  std::size_t window_len = 1024;

  std::size_t n_time() const { return values.rows(); }
  std::size_t n_freq() const { return values.cols(); }
  double bin_center(std::size_t col) const { return start_freq + static_cast<double>(col) * freq_bin_width; }
};

struct CalibrationParams {
  double front_end_gain = 1.0;
  double cal_factor = 1.0;
  double load_ohms = 50.0;
  double enbw_dbmhz = -6.2;

  void validate() const {
    if (!(front_end_gain > 0.0) || !(cal_factor > 0.0) || !(load_ohms > 0.0))
      throw Error(Errc::InvalidConfig, "calibration gains and load must be positive");
  }
};

/// 134 x 46 dBm sub-matrix of one 10 MHz channel.
struct ChannelSlice {
  Matrix<double> values{kChannelRows, kChannelCols};
  double center_freq = 0.0;
  std::string parent_id;
  double first_bin_freq = 0.0;  // center frequency of column 0
  double bin_width = 225e6 / 1024.0;
  Units units = Units::Dbm;

  /// Column whose bin center is nearest the channel center (ties to the lower column).
  std::size_t center_column() const {
    const double pos = (center_freq - first_bin_freq) / bin_width;
    const double lo = std::floor(pos);
    std::size_t col = static_cast<std::size_t>(std::max(0.0, (pos - lo) > 0.5 ? lo + 1 : lo));
    return std::min(col, kChannelCols - 1);
  }
};

enum class FeatureMode { Full6164, TimeAgg134, CenterBins268 };

inline std::size_t feature_length(FeatureMode m) {
  switch (m) {
    case FeatureMode::Full6164: return kChannelRows * kChannelCols;
    case FeatureMode::TimeAgg134: return kChannelRows;
    case FeatureMode::CenterBins268: return 2 * kChannelRows;
  }
  return 0;
}

struct FeatureVector {
  std::vector<double> values;
  FeatureMode mode = FeatureMode::Full6164;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

// ---------------------------------------------------------------------------
// STFT max-hold

/// Flat-top window with cosine-squared tapers at both ends.
inline std::vector<double> flat_top_taper_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.window_len, 1.0);
  const double t = static_cast<double>(cfg.taper_len);
  for (std::size_t n = 0; n < cfg.taper_len; ++n) {
    const double s = std::sin(std::numbers::pi * (static_cast<double>(n) + 0.5) / (2.0 * t));
    w[n] = s * s;
    w[cfg.window_len - 1 - n] = s * s;
  }
  return w;
}

struct MaxHoldShape {
  std::size_t n_segments = 0;
  std::size_t segments_per_epoch = 0;
  std::size_t n_time = 0;
  std::size_t n_freq = 0;
};

inline MaxHoldShape max_hold_shape(std::size_t n_samples, const StftConfig& cfg) {
  cfg.validate();
  MaxHoldShape s;
  s.n_freq = cfg.window_len;
  s.segments_per_epoch = cfg.segments_per_epoch();
  if (n_samples >= cfg.window_len) s.n_segments = (n_samples - cfg.window_len) / cfg.hop + 1;
  s.n_time = s.n_segments / s.segments_per_epoch;
  return s;
}

namespace detail {

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

class ForwardDft {
 public:
  explicit ForwardDft(std::size_t n)
      : n_(n),
        in_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ForwardDft(const ForwardDft&) = delete;
  ForwardDft& operator=(const ForwardDft&) = delete;
  ~ForwardDft() { fftw_destroy_plan(plan_); }

  fftw_complex* input() { return in_.get(); }
  const fftw_complex* output() const { return out_.get(); }
  void execute() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  std::unique_ptr<fftw_complex, FftwDeleter> in_;
  std::unique_ptr<fftw_complex, FftwDeleter> out_;
  fftw_plan plan_;
};

}  // namespace detail

/// Windowed STFT magnitudes with a max-hold over each epoch.
///
/// Columns are in ascending baseband frequency (DC at column window_len/2),
/// so column k is centred on (k - window_len/2) * sample_rate / window_len.
inline Spectrogram compute_max_hold_spectrogram(std::span<const std::complex<double>> iq, const StftConfig& cfg) {
  cfg.validate();
  if (iq.size() < cfg.window_len) throw Error(Errc::InputTooShort, "fewer samples than one STFT window");
  const MaxHoldShape shape = max_hold_shape(iq.size(), cfg);
  if (shape.n_time == 0) throw Error(Errc::InputTooShort, "fewer segments than one epoch");

  const std::size_t n = cfg.window_len;
  const std::vector<double> window = flat_top_taper_window(cfg);
  detail::ForwardDft dft(n);

  Spectrogram out;
  out.values = Matrix<double>(shape.n_time, n, 0.0);
  out.freq_bin_width = cfg.sample_rate / static_cast<double>(n);
  out.time_bin_duration = static_cast<double>(shape.segments_per_epoch * cfg.hop) / cfg.sample_rate;
  out.start_freq = -static_cast<double>(n / 2) * out.freq_bin_width;
  out.units = Units::RawAmplitude;
  out.window_len = n;

  for (std::size_t t = 0; t < shape.n_time; ++t) {
    auto row = out.values.row(t);
    for (std::size_t s = 0; s < shape.segments_per_epoch; ++s) {
      const std::size_t start = (t * shape.segments_per_epoch + s) * cfg.hop;
      fftw_complex* in = dft.input();
      for (std::size_t i = 0; i < n; ++i) {
        in[i][0] = iq[start + i].real() * window[i];
        in[i][1] = iq[start + i].imag() * window[i];
      }
      dft.execute();
      const fftw_complex* X = dft.output();
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = (k + n / 2) % n;  // fftshift
        const double mag = std::hypot(X[src][0], X[src][1]);
        row[k] = std::max(row[k], mag);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

inline double raw_to_dbm(double raw, std::size_t window_len, const CalibrationParams& cal) {
  if (!(raw > 0.0)) return kDbmFloor;
  const double v = raw / static_cast<double>(window_len) / cal.front_end_gain * cal.cal_factor;
  const double watts = v * v / (2.0 * cal.load_ohms);
  return 10.0 * std::log10(watts) + 30.0;
}

inline Spectrogram to_dbm(const Spectrogram& spec, const CalibrationParams& cal) {
  if (spec.units == Units::Dbm) throw Error(Errc::AlreadyCalibrated, "spectrogram already in dBm");
  cal.validate();
  Spectrogram out = spec;
  for (double& v : out.values.data()) v = raw_to_dbm(v, spec.window_len, cal);
  out.units = Units::Dbm;
  return out;
}

inline double to_dbm_per_mhz(double dbm, const CalibrationParams& cal) { return dbm - cal.enbw_dbmhz; }

// ---------------------------------------------------------------------------
// Channels

/// First column of the 46-bin window whose midpoint is nearest `center` (ties to the lower index).
inline long channel_first_column(const Spectrogram& spec, double center) {
  const double pos = (center - spec.start_freq) / spec.freq_bin_width;
  const double half = static_cast<double>(kChannelCols - 1) / 2.0;  // 22.5
  const double s = pos - half;
  const double lo = std::floor(s);
  return static_cast<long>((s - lo) > 0.5 ? lo + 1 : lo);
}

/// Channel centres at every 10 MHz multiple in the closed band.
inline std::vector<double> channel_centers(double band_start, double band_end) {
  std::vector<double> centers;
  const double tol = 1e-6;
  const long first = static_cast<long>(std::ceil(band_start / kChannelSpacingHz - tol));
  const long last = static_cast<long>(std::floor(band_end / kChannelSpacingHz + tol));
  for (long m = first; m <= last; ++m) centers.push_back(static_cast<double>(m) * kChannelSpacingHz);
  return centers;
}

inline ChannelSlice extract_channel(const Spectrogram& spec, double center, const std::string& parent_id = {}) {
  if (spec.n_time() < kChannelRows) throw Error(Errc::TooFewTimeRows, "spectrogram has fewer than 134 time rows");
  const long first = channel_first_column(spec, center);
  if (first < 0 || static_cast<std::size_t>(first) + kChannelCols > spec.n_freq())
    throw Error(Errc::BandOutsideSpectrogram, "channel at " + std::to_string(center) + " Hz outside spectrogram");
  ChannelSlice ch;
  ch.center_freq = center;
  ch.parent_id = parent_id;
  ch.bin_width = spec.freq_bin_width;
  ch.units = spec.units;
  ch.first_bin_freq = spec.bin_center(static_cast<std::size_t>(first));
  for (std::size_t r = 0; r < kChannelRows; ++r)
    for (std::size_t c = 0; c < kChannelCols; ++c) ch.values(r, c) = spec.values(r, static_cast<std::size_t>(first) + c);
  return ch;
}

inline std::vector<ChannelSlice> extract_channels(const Spectrogram& spec, double band_start, double band_end,
                                                  const std::string& parent_id = {}) {
  if (spec.n_time() < kChannelRows) throw Error(Errc::TooFewTimeRows, "spectrogram has fewer than 134 time rows");
  const double lo_edge = spec.start_freq - spec.freq_bin_width / 2.0;
  const double hi_edge = spec.bin_center(spec.n_freq() - 1) + spec.freq_bin_width / 2.0;
  if (band_end < band_start || band_start < lo_edge || band_end > hi_edge)
    throw Error(Errc::BandOutsideSpectrogram, "band not covered by spectrogram");
  std::vector<ChannelSlice> out;
  for (double c : channel_centers(band_start, band_end)) out.push_back(extract_channel(spec, c, parent_id));
  return out;
}

// ---------------------------------------------------------------------------
// Feature preprocessing

inline constexpr std::size_t kCenterPairFirst = 22;  // columns 22 and 23 of 46

inline FeatureVector preprocess_channel(const ChannelSlice& ch, FeatureMode mode) {
  FeatureVector fv;
  fv.mode = mode;
  switch (mode) {
    case FeatureMode::Full6164:
      fv.values.assign(ch.values.data().begin(), ch.values.data().end());
      break;
    case FeatureMode::TimeAgg134:
      fv.values.resize(kChannelRows);
      for (std::size_t r = 0; r < kChannelRows; ++r) {
        double sum = 0.0;
        for (double v : ch.values.row(r)) sum += dbm_to_mw(v);
        fv.values[r] = sum;
      }
      break;
    case FeatureMode::CenterBins268:
      fv.values.resize(2 * kChannelRows);
      for (std::size_t r = 0; r < kChannelRows; ++r) {
        fv.values[2 * r] = ch.values(r, kCenterPairFirst);
        fv.values[2 * r + 1] = ch.values(r, kCenterPairFirst + 1);
      }
      break;
  }
  return fv;
}

}  // namespace specsense

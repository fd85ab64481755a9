#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specsense/common.hpp"
#include "specsense/spectrogram.hpp"

namespace specsense::synth {

enum class Emission { Spn43, R3Oobe, Both, Neither };
enum class Site { VB, SD };
enum class Antenna { Omni, CBS };

inline const char* to_string(Emission e) {
  switch (e) {
    case Emission::Spn43: return "SPN43";
    case Emission::R3Oobe: return "R3-OOBE";
    case Emission::Both: return "Both";
    case Emission::Neither: return "Neither";
  }
  return "?";
}
inline const char* to_string(Site s) { return s == Site::VB ? "VB" : "SD"; }
inline const char* to_string(Antenna a) { return a == Antenna::Omni ? "Omni" : "CBS"; }

inline Emission parse_emission(const std::string& s) {
  if (s == "SPN43") return Emission::Spn43;
  if (s == "R3-OOBE") return Emission::R3Oobe;
  if (s == "Both") return Emission::Both;
  if (s == "Neither") return Emission::Neither;
  throw Error(Errc::FormatError, "unknown emission tag '" + s + "'");
}
inline Site parse_site(const std::string& s) {
  if (s == "VB") return Site::VB;
  if (s == "SD") return Site::SD;
  throw Error(Errc::FormatError, "unknown site tag '" + s + "'");
}
inline Antenna parse_antenna(const std::string& s) {
  if (s == "Omni") return Antenna::Omni;
  if (s == "CBS") return Antenna::CBS;
  throw Error(Errc::FormatError, "unknown antenna tag '" + s + "'");
}

/// Receiver noise floor per site and antenna, dBm per bin.
inline double default_noise_floor(Site site, Antenna antenna) {
  const double base = site == Site::VB ? -98.0 : -94.0;
  return base + (antenna == Antenna::CBS ? 0.0 : -1.0);
}

struct Spn43Emitter {
  double center_freq = 3570e6;
  double peak_dbm = -80.0;
  double sweep_period = 3.85;
  int sweep_width_bins = 3;
  double phase = 0.0;  // seconds
};

struct OobeSpec {
  double power_lo_dbm = -85.0;
  double power_hi_dbm = -60.0;
  double streak_rate_per_min = 6.0;
};

struct LoLeak {
  double freq = 3577e6;
  double dbm = -92.0;
};

struct SceneSpec {
  std::size_t n_time = kChannelRows;
  std::size_t n_freq = 512;
  double start_freq = 3544e6;
  double freq_bin_width = 225e6 / 1024.0;
  double time_bin_duration = 0.455;
  double band_start = 3545e6;
  double band_end = 3655e6;
  double noise_floor_dbm = -98.0;
  double noise_sigma_db = 1.5;
  double sweep_jitter_db = 1.0;
  std::vector<Spn43Emitter> spn43;
  std::optional<OobeSpec> oobe;
  std::optional<LoLeak> lo_leak;
  Site site = Site::VB;
  Antenna antenna = Antenna::CBS;

  void validate() const {
    if (n_time < 1 || n_freq < 1 || !(freq_bin_width > 0) || !(time_bin_duration > 0))
      throw Error(Errc::InvalidSpec, "empty grid");
    for (const auto& e : spn43) {
      const double m = e.center_freq / kChannelSpacingHz;
      if (std::abs(m - std::round(m)) > 1e-9) throw Error(Errc::InvalidSpec, "SPN-43 carrier not a 10 MHz multiple");
      if (e.center_freq < band_start || e.center_freq > band_end)
        throw Error(Errc::InvalidSpec, "SPN-43 carrier outside band");
      if (!(e.sweep_period > time_bin_duration)) throw Error(Errc::InvalidSpec, "sweep period not above epoch duration");
      if (!(e.peak_dbm > noise_floor_dbm)) throw Error(Errc::InvalidSpec, "SPN-43 peak below noise floor");
      if (e.sweep_width_bins < 1) throw Error(Errc::InvalidSpec, "sweep width must be >= 1 bin");
    }
    if (oobe && (oobe->power_hi_dbm < oobe->power_lo_dbm || oobe->streak_rate_per_min < 0))
      throw Error(Errc::InvalidSpec, "bad OOBE parameters");
  }
};

struct LabeledCase {
  std::string id;
  std::vector<double> channel_centers;
  std::vector<bool> channel_labels;  // SPN-43 present
  Emission emission = Emission::Neither;
  Site site = Site::VB;
  Antenna antenna = Antenna::CBS;
  bool multi_spn43 = false;
  std::size_t capture_index = 0;

  std::size_t positives() const { return static_cast<std::size_t>(std::count(channel_labels.begin(), channel_labels.end(), true)); }
};

/// Stratum index over (emission x site x antenna), 0..15.
inline std::size_t stratum_of(Emission e, Site s, Antenna a) {
  return static_cast<std::size_t>(e) * 4 + static_cast<std::size_t>(s) * 2 + static_cast<std::size_t>(a);
}
inline std::size_t stratum_of(const LabeledCase& c) { return stratum_of(c.emission, c.site, c.antenna); }
inline constexpr std::size_t kStrata = 16;

/// Row indices of sweep peaks: nearest row to k*period + phase, for k >= 0, inside [0, n_time).
inline std::vector<std::size_t> sweep_rows(double period, double phase, double bin_duration, std::size_t n_time) {
  std::vector<std::size_t> rows;
  for (std::size_t k = 0;; ++k) {
    const double r = std::round((static_cast<double>(k) * period + phase) / bin_duration);
    if (r >= static_cast<double>(n_time)) break;
    if (r >= 0) rows.push_back(static_cast<std::size_t>(r));
  }
  return rows;
}

inline double power_add_db(double a, double b) { return 10.0 * std::log10(std::pow(10.0, a / 10.0) + std::pow(10.0, b / 10.0)); }

namespace detail {
inline std::size_t nearest_bin(const SceneSpec& s, double f) {
  const double pos = std::round((f - s.start_freq) / s.freq_bin_width);
  return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(s.n_freq - 1)));
}
}  // namespace detail

inline LabeledCase labels_for(const SceneSpec& spec, const std::string& id) {
  LabeledCase lc;
  lc.id = id;
  lc.site = spec.site;
  lc.antenna = spec.antenna;
  lc.channel_centers = channel_centers(spec.band_start, spec.band_end);
  lc.channel_labels.assign(lc.channel_centers.size(), false);
  for (const auto& e : spec.spn43)
    for (std::size_t i = 0; i < lc.channel_centers.size(); ++i)
      if (std::abs(e.center_freq - lc.channel_centers[i]) < kChannelSpacingHz / 2) lc.channel_labels[i] = true;
  const bool spn = lc.positives() > 0;
  const bool oobe = spec.oobe.has_value();
  lc.emission = spn ? (oobe ? Emission::Both : Emission::Spn43) : (oobe ? Emission::R3Oobe : Emission::Neither);
  lc.multi_spn43 = lc.positives() > 1;
  return lc;
}

/// Renders a calibrated dBm scene. Pure function of (spec, seed).
inline std::pair<Spectrogram, LabeledCase> generate_scene(const SceneSpec& spec, std::uint64_t seed,
                                                          const std::string& id = "scene") {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(spec.noise_floor_dbm, spec.noise_sigma_db);

  Spectrogram sg;
  sg.values = Matrix<double>(spec.n_time, spec.n_freq);
  sg.time_bin_duration = spec.time_bin_duration;
  sg.freq_bin_width = spec.freq_bin_width;
  sg.start_freq = spec.start_freq;
  sg.units = Units::Dbm;
  for (double& v : sg.values.data()) v = noise(rng);

  if (spec.lo_leak) {
    const std::size_t col = detail::nearest_bin(spec, spec.lo_leak->freq);
    for (std::size_t r = 0; r < spec.n_time; ++r) sg.values(r, col) = power_add_db(sg.values(r, col), spec.lo_leak->dbm);
  }

  std::normal_distribution<double> jitter(0.0, spec.sweep_jitter_db);
  for (const auto& e : spec.spn43) {
    const std::size_t carrier = detail::nearest_bin(spec, e.center_freq);
    const int half = e.sweep_width_bins / 2;
    for (std::size_t r : sweep_rows(e.sweep_period, e.phase, spec.time_bin_duration, spec.n_time)) {
      const double peak = e.peak_dbm + jitter(rng);
      for (int d = -half; d <= e.sweep_width_bins - 1 - half; ++d) {
        const long c = static_cast<long>(carrier) + d;
        if (c < 0 || c >= static_cast<long>(spec.n_freq)) continue;
        sg.values(r, static_cast<std::size_t>(c)) =
            power_add_db(sg.values(r, static_cast<std::size_t>(c)), peak - 3.0 * std::abs(d));
      }
    }
  }

  if (spec.oobe) {
    const double minutes = static_cast<double>(spec.n_time) * spec.time_bin_duration / 60.0;
    std::poisson_distribution<int> count(spec.oobe->streak_rate_per_min * minutes);
    std::uniform_int_distribution<std::size_t> row(0, spec.n_time - 1);
    std::uniform_real_distribution<double> power(spec.oobe->power_lo_dbm, spec.oobe->power_hi_dbm);
    std::normal_distribution<double> ripple(0.0, 1.0);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const std::size_t r = row(rng);
      const double p = power(rng);
      for (std::size_t c = 0; c < spec.n_freq; ++c) sg.values(r, c) = power_add_db(sg.values(r, c), p + ripple(rng));
    }
  }

  return {std::move(sg), labels_for(spec, id)};
}

// ---------------------------------------------------------------------------
// Random scene distribution

struct SceneDistribution {
  double peak_above_floor_lo_db = 5.0;
  double peak_above_floor_hi_db = 20.0;
  double oobe_power_lo_dbm = -96.0;
  double oobe_power_hi_dbm = -76.0;
  double oobe_streak_rate_per_min = 3.0;
  std::size_t multi_carriers = 2;
  double lo_leak_probability = 0.5;
  SceneSpec base;
};

/// Draws a scene for the requested stratum.
inline SceneSpec sample_scene_spec(const SceneDistribution& dist, Emission emission, Site site, Antenna antenna,
                                   bool multi, std::mt19937_64& rng) {
  SceneSpec s = dist.base;
  s.site = site;
  s.antenna = antenna;
  s.noise_floor_dbm = default_noise_floor(site, antenna);
  s.spn43.clear();
  s.oobe.reset();
  s.lo_leak.reset();

  const auto centers = channel_centers(s.band_start, s.band_end);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (u01(rng) < dist.lo_leak_probability) {
    LoLeak lo;
    lo.freq = s.band_start + u01(rng) * (s.band_end - s.band_start);
    lo.dbm = s.noise_floor_dbm + 3.0;
    s.lo_leak = lo;
  }
  if (emission == Emission::Spn43 || emission == Emission::Both) {
    std::vector<std::size_t> idx(centers.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n = multi ? std::min(dist.multi_carriers, centers.size()) : 1;
    for (std::size_t i = 0; i < n; ++i) {
      Spn43Emitter e;
      e.center_freq = centers[idx[i]];
      e.peak_dbm = s.noise_floor_dbm + dist.peak_above_floor_lo_db +
                   u01(rng) * (dist.peak_above_floor_hi_db - dist.peak_above_floor_lo_db);
      e.phase = u01(rng) * e.sweep_period;
      s.spn43.push_back(e);
    }
  }
  if (emission == Emission::R3Oobe || emission == Emission::Both) {
    OobeSpec o;
    o.power_lo_dbm = dist.oobe_power_lo_dbm;
    o.power_hi_dbm = dist.oobe_power_hi_dbm;
    o.streak_rate_per_min = dist.oobe_streak_rate_per_min;
    s.oobe = o;
  }
  return s;
}

struct CaseRecipe {
  Emission emission = Emission::Neither;
  Site site = Site::VB;
  Antenna antenna = Antenna::CBS;
  bool multi = false;
};

/// Balanced recipes: strata cycle through all 16 cells, multi-carrier draws at `multi_fraction`.
inline std::vector<CaseRecipe> balanced_recipes(std::size_t n, double multi_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0xbeef));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<CaseRecipe> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell = i % kStrata;
    out[i].emission = static_cast<Emission>(cell / 4);
    out[i].site = static_cast<Site>((cell / 2) % 2);
    out[i].antenna = static_cast<Antenna>(cell % 2);
    const bool spn = out[i].emission == Emission::Spn43 || out[i].emission == Emission::Both;
    out[i].multi = spn && u01(rng) < multi_fraction;
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

inline std::string case_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case-%06zu", i);
  return buf;
}

struct Case {
  Spectrogram spectrogram;
  LabeledCase label;
};

/// Generates case `index` of a dataset; each case has its own RNG stream.
inline Case generate_case(const SceneDistribution& dist, const CaseRecipe& recipe, std::uint64_t master_seed,
                          std::size_t index) {
  std::mt19937_64 rng(mix_seed(master_seed, 2 * index));
  SceneSpec spec = sample_scene_spec(dist, recipe.emission, recipe.site, recipe.antenna, recipe.multi, rng);
  auto [sg, lc] = generate_scene(spec, mix_seed(master_seed, 2 * index + 1), case_id(index));
  lc.emission = recipe.emission;  // stratum tag follows the recipe even if no OOBE streak fell in the window
  lc.capture_index = index;
  return {std::move(sg), std::move(lc)};
}

/// The labels generate_case would attach, without rendering the spectrogram.
inline LabeledCase describe_case(const SceneDistribution& dist, const CaseRecipe& recipe, std::uint64_t master_seed,
                                 std::size_t index) {
  std::mt19937_64 rng(mix_seed(master_seed, 2 * index));
  const SceneSpec spec = sample_scene_spec(dist, recipe.emission, recipe.site, recipe.antenna, recipe.multi, rng);
  LabeledCase lc = labels_for(spec, case_id(index));
  lc.emission = recipe.emission;
  lc.capture_index = index;
  return lc;
}

// ---------------------------------------------------------------------------
// Dataset container: directory with manifest.json and little-endian float32 payloads.

inline constexpr int kDatasetFormatVersion = 1;

namespace detail {
inline void write_f32_le(std::ofstream& os, float f) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  os.write(reinterpret_cast<const char*>(&bits), 4);
}
inline float read_f32_le(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}
}  // namespace detail

inline void write_payload(const std::filesystem::path& path, const Matrix<double>& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::IoFailure, "cannot write " + path.string());
  for (double v : m.data()) detail::write_f32_le(os, static_cast<float>(v));
  if (!os) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

inline Matrix<double> read_payload(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::IoFailure, "cannot read " + path.string());
  std::vector<unsigned char> buf(rows * cols * 4);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (is.gcount() != static_cast<std::streamsize>(buf.size())) throw Error(Errc::FormatError, "short payload " + path.string());
  Matrix<double> m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = detail::read_f32_le(buf.data() + 4 * i);
  return m;
}

inline nlohmann::json case_to_json(const LabeledCase& lc, const Spectrogram& sg, const std::string& payload) {
  nlohmann::json j;
  j["id"] = lc.id;
  j["payload"] = payload;
  j["shape"] = {sg.n_time(), sg.n_freq()};
  j["units"] = sg.units == Units::Dbm ? "dBm" : "raw";
  j["start_freq"] = sg.start_freq;
  j["freq_bin_width"] = sg.freq_bin_width;
  j["time_bin_duration"] = sg.time_bin_duration;
  j["emission"] = to_string(lc.emission);
  j["site"] = to_string(lc.site);
  j["antenna"] = to_string(lc.antenna);
  j["multi_spn43"] = lc.multi_spn43;
  j["capture_index"] = lc.capture_index;
  j["channels"] = lc.channel_centers;
  std::vector<int> labels(lc.channel_labels.begin(), lc.channel_labels.end());
  j["labels"] = labels;
  return j;
}

struct DatasetEntry {
  LabeledCase label;
  std::string payload;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Units units = Units::Dbm;
  double start_freq = 0;
  double freq_bin_width = 0;
  double time_bin_duration = 0;
};

class Dataset {
 public:
  static Dataset open(const std::filesystem::path& dir) {
    std::ifstream is(dir / "manifest.json");
    if (!is) throw Error(Errc::IoFailure, "no manifest.json in " + dir.string());
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::FormatError, std::string("manifest parse: ") + e.what());
    }
    if (j.value("format", "") != "specsense-dataset") throw Error(Errc::FormatError, "not a specsense dataset");
    if (j.value("version", 0) != kDatasetFormatVersion) throw Error(Errc::FormatError, "unsupported dataset version");
    Dataset ds;
    ds.dir_ = dir;
    ds.band_start_ = j.at("band_start").get<double>();
    ds.band_end_ = j.at("band_end").get<double>();
    for (const auto& c : j.at("cases")) {
      DatasetEntry e;
      e.label.id = c.at("id").get<std::string>();
      e.payload = c.at("payload").get<std::string>();
      e.rows = c.at("shape")[0].get<std::size_t>();
      e.cols = c.at("shape")[1].get<std::size_t>();
      e.units = c.at("units").get<std::string>() == "dBm" ? Units::Dbm : Units::RawAmplitude;
      e.start_freq = c.at("start_freq").get<double>();
      e.freq_bin_width = c.at("freq_bin_width").get<double>();
      e.time_bin_duration = c.at("time_bin_duration").get<double>();
      e.label.emission = parse_emission(c.at("emission").get<std::string>());
      e.label.site = parse_site(c.at("site").get<std::string>());
      e.label.antenna = parse_antenna(c.at("antenna").get<std::string>());
      e.label.multi_spn43 = c.at("multi_spn43").get<bool>();
      e.label.capture_index = c.at("capture_index").get<std::size_t>();
      e.label.channel_centers = c.at("channels").get<std::vector<double>>();
      for (int l : c.at("labels").get<std::vector<int>>()) e.label.channel_labels.push_back(l != 0);
      ds.entries_.push_back(std::move(e));
    }
    return ds;
  }

  const std::vector<DatasetEntry>& entries() const { return entries_; }
  double band_start() const { return band_start_; }
  double band_end() const { return band_end_; }
  const std::filesystem::path& dir() const { return dir_; }

  Spectrogram load(std::size_t i) const {
    const auto& e = entries_.at(i);
    Spectrogram sg;
    sg.values = read_payload(dir_ / e.payload, e.rows, e.cols);
    sg.units = e.units;
    sg.start_freq = e.start_freq;
    sg.freq_bin_width = e.freq_bin_width;
    sg.time_bin_duration = e.time_bin_duration;
    return sg;
  }

  std::vector<LabeledCase> labels() const {
    std::vector<LabeledCase> out;
    for (const auto& e : entries_) out.push_back(e.label);
    return out;
  }

 private:
  std::filesystem::path dir_;
  double band_start_ = 0;
  double band_end_ = 0;
  std::vector<DatasetEntry> entries_;
};

struct DatasetSummary {
  std::size_t cases = 0;
  std::size_t positive_channels = 0;
  std::size_t negative_channels = 0;
};

/// Writes `n` balanced cases to `dir`.
inline DatasetSummary generate_dataset(const std::filesystem::path& dir, std::size_t n, const SceneDistribution& dist,
                                       std::uint64_t seed, double multi_fraction = 0.2) {
  if (n < 1) throw Error(Errc::InvalidArgument, "dataset needs at least one case");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string());
  const auto recipes = balanced_recipes(n, multi_fraction, seed);
  nlohmann::json manifest;
  manifest["format"] = "specsense-dataset";
  manifest["version"] = kDatasetFormatVersion;
  manifest["seed"] = seed;
  manifest["band_start"] = dist.base.band_start;
  manifest["band_end"] = dist.base.band_end;
  manifest["cases"] = nlohmann::json::array();
  DatasetSummary sum;
  for (std::size_t i = 0; i < n; ++i) {
    Case c = generate_case(dist, recipes[i], seed, i);
    const std::string payload = c.label.id + ".f32";
    write_payload(dir / payload, c.spectrogram.values);
    manifest["cases"].push_back(case_to_json(c.label, c.spectrogram, payload));
    sum.positive_channels += c.label.positives();
    sum.negative_channels += c.label.channel_labels.size() - c.label.positives();
  }
  sum.cases = n;
  manifest["n_cases"] = sum.cases;
  manifest["positive_channels"] = sum.positive_channels;
  manifest["negative_channels"] = sum.negative_channels;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw Error(Errc::IoFailure, "cannot write manifest");
  os << manifest.dump(1) << '\n';
  return sum;
}

// ---------------------------------------------------------------------------
// Channel sampling for training

struct ChannelRef {
  std::size_t case_index = 0;
  std::size_t channel_index = 0;
  bool label = false;
};

/// Picks `n` channels, half SPN-43-present and half absent (extra one absent when n is odd).
inline std::vector<ChannelRef> balanced_channel_sample(const std::vector<LabeledCase>& cases,
                                                       const std::vector<std::size_t>& pool, std::size_t n,
                                                       std::uint64_t seed) {
  std::vector<ChannelRef> pos, neg;
  for (std::size_t ci : pool)
    for (std::size_t k = 0; k < cases[ci].channel_labels.size(); ++k)
      (cases[ci].channel_labels[k] ? pos : neg).push_back({ci, k, cases[ci].channel_labels[k]});
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  const std::size_t want_pos = std::min(n / 2, pos.size());
  const std::size_t want_neg = std::min(n - want_pos, neg.size());
  std::vector<ChannelRef> out(pos.begin(), pos.begin() + static_cast<long>(want_pos));
  out.insert(out.end(), neg.begin(), neg.begin() + static_cast<long>(want_neg));
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// ---------------------------------------------------------------------------
// Stratified test-set construction

struct StrataPlan {
  std::array<double, kStrata> proportions{};
  std::size_t total = 0;
  std::size_t multi_quota = 0;
  bool best_effort = false;

  /// Joint proportions as the product of independent marginals.
  static StrataPlan from_marginals(const std::array<double, 4>& emission, const std::array<double, 2>& site,
                                   const std::array<double, 2>& antenna, std::size_t total, std::size_t multi_quota) {
    StrataPlan p;
    p.total = total;
    p.multi_quota = multi_quota;
    const double es = emission[0] + emission[1] + emission[2] + emission[3];
    const double ss = site[0] + site[1];
    const double as = antenna[0] + antenna[1];
    for (std::size_t e = 0; e < 4; ++e)
      for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t a = 0; a < 2; ++a)
          p.proportions[e * 4 + s * 2 + a] = (emission[e] / es) * (site[s] / ss) * (antenna[a] / as);
    return p;
  }

  static StrataPlan table_set_a() {
    return from_marginals({24.56, 24.36, 26.72, 24.36}, {51.28, 48.72}, {48.92, 51.08}, 509, 109);
  }
  static StrataPlan table_set_b() {
    return from_marginals({50.20, 0.0, 0.0, 49.80}, {50.20, 49.80}, {50.20, 49.80}, 249, 40);
  }

  /// Largest-remainder integer targets; each within 1 of total * proportion.
  std::array<std::size_t, kStrata> targets() const {
    std::array<std::size_t, kStrata> t{};
    std::array<double, kStrata> rem{};
    const double psum = std::accumulate(proportions.begin(), proportions.end(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < kStrata; ++i) {
      const double exact = static_cast<double>(total) * proportions[i] / psum;
      t[i] = static_cast<std::size_t>(std::floor(exact));
      rem[i] = exact - std::floor(exact);
      assigned += t[i];
    }
    std::array<std::size_t, kStrata> order{};
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < total && k < kStrata; ++k, ++assigned) ++t[order[k]];
    return t;
  }
};

struct SplitResult {
  std::vector<std::size_t> test;        // indices into the case list
  std::vector<std::size_t> train_pool;  // complement
};

inline SplitResult stratified_split(const std::vector<LabeledCase>& cases, const StrataPlan& plan, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kStrata> cells;
  for (std::size_t i = 0; i < cases.size(); ++i) cells[stratum_of(cases[i])].push_back(i);
  std::mt19937_64 rng(seed);
  for (auto& c : cells) std::shuffle(c.begin(), c.end(), rng);

  const auto targets = plan.targets();
  std::size_t multi_left = plan.multi_quota;
  std::vector<bool> chosen(cases.size(), false);
  SplitResult out;
  for (std::size_t s = 0; s < kStrata; ++s) {
    auto& cell = cells[s];
    if (cell.size() < targets[s] && !plan.best_effort)
      throw Error(Errc::InsufficientStratum, "stratum " + std::to_string(s) + " has " + std::to_string(cell.size()) +
                                                 " cases, plan needs " + std::to_string(targets[s]));
    // Multi-carrier cases first while the quota lasts.
    std::stable_partition(cell.begin(), cell.end(), [&](std::size_t i) { return cases[i].multi_spn43; });
    std::size_t taken = 0;
    std::size_t n_multi = 0;
    for (std::size_t i : cell)
      if (cases[i].multi_spn43) ++n_multi;
    const std::size_t want = std::min(targets[s], cell.size());
    const std::size_t multi_take = std::min({multi_left, n_multi, want});
    for (std::size_t k = 0; k < multi_take; ++k, ++taken) chosen[cell[k]] = true;
    multi_left -= multi_take;
    for (std::size_t k = n_multi; k < cell.size() && taken < want; ++k, ++taken) chosen[cell[k]] = true;
    for (std::size_t k = multi_take; k < n_multi && taken < want; ++k, ++taken) chosen[cell[k]] = true;
  }
  for (std::size_t i = 0; i < cases.size(); ++i) (chosen[i] ? out.test : out.train_pool).push_back(i);
  return out;
}

/// Resamples with replacement inside each stratum; per-stratum counts are preserved.
/// `strata[i]` is the stratum label of item i. Returns item indices.
inline std::vector<std::size_t> stratified_bootstrap_indices(const std::vector<std::size_t>& strata, std::uint64_t seed) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  out.reserve(strata.size());
  for (const auto& [key, members] : groups) {
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t k = 0; k < members.size(); ++k) out.push_back(members[pick(rng)]);
  }
  return out;
}

inline std::vector<LabeledCase> stratified_bootstrap_resample(const std::vector<LabeledCase>& test, std::uint64_t seed) {
  if (test.empty()) throw Error(Errc::InvalidArgument, "empty test set");
  std::vector<std::size_t> strata;
  for (const auto& c : test) strata.push_back(stratum_of(c));
  std::vector<LabeledCase> out;
  for (std::size_t i : stratified_bootstrap_indices(strata, seed)) out.push_back(test[i]);
  return out;
}

}  // namespace specsense::synth

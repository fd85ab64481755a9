#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "specsense/detect.hpp"
#include "specsense/synth.hpp"

using namespace specsense;
using namespace specsense::detect;

namespace {

ChannelSlice uniform_slice(double dbm) {
  ChannelSlice ch;
  for (double& v : ch.values.data()) v = dbm;
  return ch;
}

std::vector<std::size_t> on_indices(const SweepTemplate& t) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < t.mask.size(); ++i)
    if (t.mask[i]) out.push_back(i);
  return out;
}

// Oracle: rows round(k * period / bin) + phase, one row wide.
std::vector<std::size_t> template_oracle(int phase) {
  std::vector<std::size_t> out;
  for (int k = 0; k < 40; ++k) {
    const long r = std::lround(k * 3.85 / 0.455) + phase;
    if (r >= 0 && r < 134) out.push_back(std::size_t(r));
  }
  return out;
}

ChannelSlice random_slice(std::mt19937_64& rng) {
  std::normal_distribution<double> g(-95.0, 6.0);
  ChannelSlice ch;
  for (double& v : ch.values.data()) v = g(rng);
  return ch;
}

}  // namespace

TEST(EnergyDetect, UniformSliceHandSum) {
  EXPECT_NEAR(energy_detect_score(uniform_slice(-30.0)), 134 * 3 * 0.001, 1e-15);
}

TEST(EnergyDetect, FloorSentinelIsNearZero) {
  EXPECT_LT(energy_detect_score(uniform_slice(kDbmFloor)), 1e-27);
}

TEST(EnergyDetect, TenDecibelsScalesByTen) {
  std::mt19937_64 rng(2);
  auto ch = random_slice(rng);
  const double a = energy_detect_score(ch);
  for (double& v : ch.values.data()) v += 10.0;
  EXPECT_NEAR(energy_detect_score(ch), 10.0 * a, 1e-12 * a);
}

TEST(EnergyDetect, RefusesRawUnits) {
  auto ch = uniform_slice(1.0);
  ch.units = Units::RawAmplitude;
  EXPECT_THROW(energy_detect_score(ch), Error);
  EXPECT_THROW(si_energy_detect_score(ch), Error);
}

TEST(EnergyDetect, CentreColumnsAre22To24) {
  EXPECT_EQ(center_first_column(3), 22u);
  EXPECT_THROW(energy_detect_score(uniform_slice(-30.0), EdConfig{4, true}), Error);
}

TEST(SweepTemplate, DefaultOnBins) {
  const auto t = build_sweep_template(3.85, 0.455, 0.455, 134, 0);
  EXPECT_EQ(t.on_count(), 16u);
  EXPECT_EQ(on_indices(t), template_oracle(0));
  // Frozen from the oracle above.
  const std::vector<std::size_t> frozen{0, 8, 17, 25, 34, 42, 51, 59, 68, 76, 85, 93, 102, 110, 118, 127};
  EXPECT_EQ(on_indices(t), frozen);
}

TEST(SweepTemplate, PeriodEqualToBinSaturates) {
  const auto t = build_sweep_template(0.455, 0.2, 0.455, 134, 0);
  EXPECT_EQ(t.on_count(), 134u);
  EXPECT_THROW(build_sweep_template(0.455, 0.455, 0.455, 134, 0), Error);
}

TEST(SweepTemplate, PhaseShiftsIndices) {
  const auto t = build_sweep_template(3.85, 0.455, 0.455, 134, 3);
  EXPECT_EQ(on_indices(t), template_oracle(3));
}

TEST(AlignTemplate, RecoversEveryShift) {
  const auto base = build_sweep_template(3.85, 0.455, 0.455, 134, 0);
  for (int s = 0; s < 8; ++s) {
    const auto shifted = build_sweep_template(3.85, 0.455, 0.455, 134, s);
    std::vector<double> profile(shifted.mask.begin(), shifted.mask.end());
    EXPECT_EQ(align_template(base, profile), s);
  }
}

TEST(AlignTemplate, ConstantProfileTiesToZero) {
  const auto base = build_sweep_template(3.85, 0.455, 0.455, 134, 0);
  EXPECT_EQ(align_template(base, std::vector<double>(134, 2.5)), 0);
}

TEST(AlignTemplate, ExhaustiveOracleOnRandomProfiles) {
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> e(1.0);
  const auto base = build_sweep_template(3.85, 0.455, 0.455, 134, 0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> p(134);
    for (double& v : p) v = e(rng);
    int best = 0;
    double best_sum = -1;
    for (int s = 0; s < 8; ++s) {
      double sum = 0;
      for (std::size_t r : template_oracle(s)) sum += p[r];
      if (sum > best_sum) best_sum = sum, best = s;
    }
    EXPECT_EQ(align_template(base, p), best);
  }
}

TEST(SiEnergyDetect, UniformSliceUsesSixteenRows) {
  EXPECT_NEAR(si_energy_detect_score(uniform_slice(-30.0)), 16 * 3 * 0.001, 1e-15);
}

TEST(SiEnergyDetect, FloorSliceIsNearZero) { EXPECT_LT(si_energy_detect_score(uniform_slice(kDbmFloor)), 1e-27); }

TEST(SiEnergyDetect, AlignedPhaseBeatsEveryOther) {
  synth::SceneSpec spec;
  spec.noise_sigma_db = 0.5;
  spec.spn43.push_back({3600e6, -80.0, 3.85, 3, 2 * 0.455});
  const auto [sg, lc] = synth::generate_scene(spec, 3);
  const auto ch = extract_channel(sg, 3600e6);
  const auto profile = center_time_profile(ch, {});
  const double score = si_energy_detect_score(ch);
  for (int s = 0; s < 8; ++s) {
    double sum = 0;
    for (std::size_t r : template_oracle(s)) sum += profile[r];
    EXPECT_LE(sum, score + 1e-18);
  }
  EXPECT_EQ(align_template(build_sweep_template(3.85, 0.455, 0.455, 134, 0), profile), 2);
}

TEST(DetectProperties, SiEdNeverExceedsEd) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ch = random_slice(rng);
    EXPECT_LE(si_energy_detect_score(ch), energy_detect_score(ch));
  }
}

TEST(DetectProperties, IgnoresColumnsOutsideCentre) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    auto ch = random_slice(rng);
    const double ed = energy_detect_score(ch), si = si_energy_detect_score(ch);
    for (std::size_t r = 0; r < 134; ++r)
      for (std::size_t c = 0; c < 46; ++c)
        if (c < 22 || c > 24) ch.values(r, c) = -40.0 + double(rng() % 20);
    EXPECT_EQ(energy_detect_score(ch), ed);
    EXPECT_EQ(si_energy_detect_score(ch), si);
  }
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "specsense/detect.hpp"
#include "specsense/eval/froc.hpp"
#include "specsense/eval/roc.hpp"
#include "specsense/eval/table.hpp"
#include "specsense/eval/threshold.hpp"
#include "specsense/eval/timing.hpp"
#include "specsense/nn/cnn3.hpp"

using namespace specsense;
using namespace specsense::eval;

namespace {

SplitScores ss(std::vector<double> pos, std::vector<double> neg) { return {std::move(pos), std::move(neg)}; }

bool has_point(const RocCurve& c, double x, double y) {
  return std::any_of(c.points.begin(), c.points.end(),
                     [&](const CurvePoint& p) { return std::abs(p.x - x) < 1e-12 && std::abs(p.y - y) < 1e-12; });
}

double pair_count_auc(const SplitScores& s) {
  double t = 0;
  for (double p : s.pos)
    for (double n : s.neg) t += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  return t / double(s.pos.size() * s.neg.size());
}

SplitScores random_scores(std::mt19937_64& rng, std::size_t m, std::size_t n, double shift, bool coarse) {
  std::normal_distribution<double> g;
  SplitScores s;
  auto draw = [&](double mu) { return coarse ? std::round(2 * (g(rng) + mu)) / 2 : g(rng) + mu; };
  for (std::size_t i = 0; i < m; ++i) s.pos.push_back(draw(shift));
  for (std::size_t i = 0; i < n; ++i) s.neg.push_back(draw(0.0));
  return s;
}

// n_spec spectrograms of 11 channels, channel 0 present; present ~ N(shift, 1), absent ~ N(0, 1).
std::vector<ScoredChannel> scene_scores(std::size_t n_spec, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<ScoredChannel> out;
  for (std::size_t s = 0; s < n_spec; ++s)
    for (std::size_t k = 0; k < 11; ++k)
      out.push_back({"s" + std::to_string(s), 3550e6 + 1e7 * double(k), g(rng) + (k == 0 ? shift : 0.0), k == 0});
  return out;
}

std::map<std::string, std::size_t> two_strata(const std::vector<ScoredChannel>& sc) {
  std::map<std::string, std::size_t> m;
  for (const auto& c : sc) m[c.spectrogram_id] = std::stoul(c.spectrogram_id.substr(1)) % 2;
  return m;
}

}  // namespace

TEST(Roc, PerfectSeparationPassesThroughTopLeft) {
  const auto c = roc_curve(ss({1, 1, 1}, {0, 0}));
  EXPECT_TRUE(has_point(c, 0, 1));
  EXPECT_EQ(roc_auc(ss({1, 1, 1}, {0, 0})), 1.0);
}

TEST(Roc, AllTiedIsTheChanceLine) {
  const auto s = ss({0.3, 0.3}, {0.3, 0.3, 0.3});
  const auto c = roc_curve(s);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_TRUE(has_point(c, 0, 0));
  EXPECT_TRUE(has_point(c, 1, 1));
  EXPECT_EQ(roc_auc(s), 0.5);
}

TEST(Roc, FourScoreExample) {
  const auto s = ss({0.9, 0.4}, {0.5, 0.1});
  const auto c = roc_curve(s);
  EXPECT_TRUE(has_point(c, 0, 0.5));
  EXPECT_TRUE(has_point(c, 0.5, 1));
  EXPECT_EQ(roc_auc(s), 0.75);
  EXPECT_EQ(c.points.front().x, 0.0);
  EXPECT_EQ(c.points.back().y, 1.0);
}

TEST(Roc, DegenerateLabelsRejected) {
  EXPECT_THROW(roc_curve(ss({1, 2}, {})), Error);
  EXPECT_THROW(roc_auc(ss({}, {1})), Error);
}

TEST(RocProperties, AucMatchesPairCountingAndTrapezoid) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_scores(rng, 1 + rng() % 30, 1 + rng() % 30, 0.7, t % 2 == 0);
    const double a = roc_auc(s);
    EXPECT_NEAR(a, pair_count_auc(s), 1e-12);
    EXPECT_NEAR(a, trapezoid_area(roc_curve(s).points), 1e-12);
  }
}

TEST(RocProperties, MonotoneTransformInvariance) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    auto s = random_scores(rng, 20, 25, 0.5, true);
    auto u = s;
    for (double& v : u.pos) v = std::exp(3 * v) - 7;
    for (double& v : u.neg) v = std::exp(3 * v) - 7;
    const auto a = roc_curve(s), b = roc_curve(u);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_EQ(a.points[i].x, b.points[i].x);
      EXPECT_EQ(a.points[i].y, b.points[i].y);
    }
    EXPECT_EQ(roc_auc(s), roc_auc(u));
  }
}

TEST(RocProperties, DuplicatingNegativesKeepsPointSet) {
  std::mt19937_64 rng(3);
  auto s = random_scores(rng, 15, 15, 1.0, true);
  auto d = s;
  d.neg.insert(d.neg.end(), s.neg.begin(), s.neg.end());
  const auto a = roc_curve(s), b = roc_curve(d);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_DOUBLE_EQ(a.points[i].x, b.points[i].x);
    EXPECT_DOUBLE_EQ(a.points[i].y, b.points[i].y);
  }
}

TEST(DeLong, InterleavedIsSymmetricInLogitSpace) {
  SplitScores s;
  for (int i = 0; i < 100; ++i) {
    s.pos.push_back(2 * i);
    s.neg.push_back(2 * i + (i % 2 ? 1 : -1));
  }
  const auto ci = delong_ci(s);
  EXPECT_DOUBLE_EQ(ci.auc, 0.5);
  EXPECT_LT(ci.lo, 0.5);
  EXPECT_GT(ci.hi, 0.5);
  auto logit = [](double p) { return std::log(p / (1 - p)); };
  EXPECT_NEAR(logit(ci.hi), -logit(ci.lo), 1e-12);
}

TEST(DeLong, PerfectAucIsClampedNotNan) {
  const auto ci = delong_ci(ss({5, 6, 7}, {1, 2}));
  EXPECT_EQ(ci.auc, 1.0);
  EXPECT_TRUE(std::isfinite(ci.lo));
  EXPECT_LT(ci.lo, 1.0);
  EXPECT_LE(ci.hi, 1.0);
  EXPECT_NEAR(ci.hi, 1.0 - 1.0 / (2 * 3 * 2), 1e-12);
}

TEST(DeLong, NeedsTwoOfEachClass) { EXPECT_THROW(delong_ci(ss({1}, {0, 0.5})), Error); }

TEST(DeLong, CoverageOfBinormalAucPointEight) {
  // d' such that Phi(d' / sqrt 2) = 0.8.
  const double d = std::sqrt(2.0) * normal_quantile(0.8);
  std::mt19937_64 rng(44);
  int covered = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_scores(rng, 50, 50, d, false);
    const auto ci = delong_ci(s);
    covered += ci.lo <= 0.8 && 0.8 <= ci.hi;
    ASSERT_LE(ci.lo, ci.auc);
    ASSERT_GE(ci.hi, ci.auc);
  }
  EXPECT_GE(covered, 920);
  EXPECT_LE(covered, 980);
}

TEST(Froc, TwoSpectrogramExample) {
  std::vector<ScoredChannel> sc{
      {"a", 3550e6, 0.9, true}, {"a", 3560e6, 0.5, false}, {"a", 3570e6, 0.5, false},
      {"b", 3550e6, 0.2, true}, {"b", 3560e6, 0.5, false}, {"b", 3570e6, 0.5, false},
  };
  const auto c = froc_curve(sc);
  auto at = [&](double t) {
    // Threshold t flags the same channels as the largest swept threshold not above it.
    for (const auto& p : c.points)
      if (p.threshold <= t) return p;
    return c.points.back();
  };
  EXPECT_EQ(at(0.6).y, 0.5);
  EXPECT_EQ(at(0.6).x, 0.0);
  EXPECT_EQ(at(0.4).y, 0.5);
  EXPECT_EQ(at(0.4).x, 2.0);
  EXPECT_EQ(at(0.1).y, 1.0);
  EXPECT_EQ(at(0.1).x, 2.0);
  EXPECT_EQ(c.points.back().x, 4.0 / 2.0);
}

TEST(Froc, PerfectDetectorReachesOneAtZeroFalsePositives) {
  const auto c = froc_curve(scene_scores(4, 100.0, 1));
  EXPECT_TRUE(std::any_of(c.points.begin(), c.points.end(), [](const CurvePoint& p) { return p.x == 0 && p.y == 1; }));
  EXPECT_DOUBLE_EQ(froc_auc_normalized(c), 1.0);
}

TEST(Froc, NormalizerCountsAbsentChannels) {
  std::vector<ScoredChannel> sc;
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < 11; ++k) sc.push_back({std::to_string(s), 3550e6 + 1e7 * k, double(k), k == 3});
  const auto c = froc_curve(sc);
  EXPECT_DOUBLE_EQ(c.normalizer(), 10.0);
  EXPECT_DOUBLE_EQ(c.points.back().x, 10.0);
}

TEST(Froc, PublishedNormalizerIsReachable) {
  // 25 spectrograms with 257 absent channels between them average 10.28 per spectrogram.
  std::vector<ScoredChannel> sc;
  std::size_t absent = 0;
  for (int s = 0; s < 25; ++s)
    for (int k = 0; k < 11; ++k) {
      const bool present = k == 0 && s < 18;
      absent += !present;
      sc.push_back({std::to_string(s), 3550e6 + 1e7 * k, 0.0, present});
    }
  ASSERT_EQ(absent, 257u);
  EXPECT_NEAR(froc_curve(sc).normalizer(), 10.28, 1e-12);
}

TEST(Froc, NoSignalsIsAnError) {
  std::vector<ScoredChannel> sc{{"a", 3550e6, 0.1, false}};
  try {
    froc_curve(sc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoSignals);
  }
}

TEST(FrocProperties, MonotoneAndNormalizedInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = froc_curve(scene_scores(5 + seed, 0.3 * double(seed % 7), seed));
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].x, c.points[i - 1].x);
      EXPECT_GE(c.points[i].y, c.points[i - 1].y);
    }
    const double a = froc_auc_normalized(c);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Bootstrap, SingletonStrataCollapseTheInterval) {
  const auto sc = scene_scores(3, 1.0, 5);
  std::map<std::string, std::size_t> strata{{"s0", 0}, {"s1", 1}, {"s2", 2}};
  const auto ci = bootstrap_froc_ci(sc, strata, 200, 0.05, 1);
  EXPECT_EQ(ci.lo, ci.point);
  EXPECT_EQ(ci.hi, ci.point);
}

TEST(Bootstrap, SameSeedSameInterval) {
  const auto sc = scene_scores(30, 1.5, 6);
  const auto a = bootstrap_froc_ci(sc, two_strata(sc), 300, 0.05, 9);
  const auto b = bootstrap_froc_ci(sc, two_strata(sc), 300, 0.05, 9);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  EXPECT_EQ(a.replicates, b.replicates);
  EXPECT_LE(a.lo, a.hi);
}

TEST(Bootstrap, QuadrupledTestSetNarrowsInterval) {
  // Single intervals at 50 spectrograms vary by almost 2x between draws, so compare mean widths.
  double small_width = 0.0, big_width = 0.0;
  for (std::uint64_t seed = 7; seed < 11; ++seed) {
    const auto small = scene_scores(50, 2.0, seed);
    const auto big = scene_scores(200, 2.0, 100 + seed);
    const auto a = bootstrap_froc_ci(small, two_strata(small), 1000, 0.05, 3);
    const auto b = bootstrap_froc_ci(big, two_strata(big), 1000, 0.05, 3);
    small_width += a.hi - a.lo;
    big_width += b.hi - b.lo;
  }
  EXPECT_LE(big_width, 0.7 * small_width);
}

TEST(Bootstrap, RejectsTooFewReplicates) {
  const auto sc = scene_scores(3, 1.0, 5);
  EXPECT_THROW(bootstrap_froc_ci(sc, two_strata(sc), 50), Error);
}

TEST(Threshold, PerfectSeparationAtOnePercentFpr) {
  const auto t = threshold_for_rate(ss({0.8, 0.9}, {0.1, 0.2}), {RateKind::Fpr, 0.01});
  EXPECT_GE(t.threshold, 0.2);
  EXPECT_LT(t.threshold, 0.8);
  EXPECT_EQ(t.fpr, 0.0);
  EXPECT_EQ(t.tpr, 1.0);
}

TEST(Threshold, TprTargetOnFourScores) {
  const auto t = threshold_for_rate(ss({0.9, 0.4}, {0.5, 0.1}), {RateKind::Tpr, 0.98});
  EXPECT_LT(t.threshold, 0.4);
  EXPECT_EQ(t.fpr, 0.5);
  EXPECT_EQ(t.tpr, 1.0);
}

TEST(Threshold, FullFprFlagsEverything) {
  const auto t = threshold_for_rate(ss({0.9, 0.4}, {0.5, 0.1}), {RateKind::Fpr, 1.0});
  EXPECT_LT(t.threshold, 0.1);
  EXPECT_EQ(t.fpr, 1.0);
}

TEST(Threshold, OutOfRangeTargetIsUnachievable) {
  EXPECT_THROW(threshold_for_rate(ss({1}, {0}), {RateKind::Tpr, 1.5}), Error);
}

TEST(Threshold, AchievedRatesAgreeWithDecisionRule) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    const auto s = random_scores(rng, 40, 60, 1.0, true);
    const double q = double(t % 10) / 10.0;
    const auto c = threshold_for_rate(s, {t % 2 ? RateKind::Fpr : RateKind::Tpr, q});
    const double fpr = double(std::count_if(s.neg.begin(), s.neg.end(), [&](double v) { return v > c.threshold; })) / 60;
    const double tpr = double(std::count_if(s.pos.begin(), s.pos.end(), [&](double v) { return v > c.threshold; })) / 40;
    EXPECT_DOUBLE_EQ(c.fpr, fpr);
    EXPECT_DOUBLE_EQ(c.tpr, tpr);
    if (t % 2) EXPECT_LE(fpr, q);
    else EXPECT_GE(tpr, q);
  }
}

TEST(Timing, NoOpIsCheap) {
  const int sample = 3;
  EXPECT_LT(time_detector([](int v) { return v + 1; }, sample, 100000), 0.01);
}

TEST(Timing, StableWhenRepsDouble) {
  ChannelSlice ch;
  for (double& v : ch.values.data()) v = -90.0;
  auto ed = [](const ChannelSlice& c) { return detect::energy_detect_score(c); };
  const double a = time_detector(ed, ch, 20000);
  const double b = time_detector(ed, ch, 40000);
  EXPECT_LT(std::abs(a - b) / std::min(a, b), 0.1);
}

TEST(Timing, SiEdIsFasterThanCnn3) {
  ChannelSlice ch;
  for (double& v : ch.values.data()) v = -90.0;
  const auto net = nn::init_cnn3(1);
  const double si = time_detector([](const ChannelSlice& c) { return detect::si_energy_detect_score(c); }, ch, 2000);
  const double cnn = time_detector([&](const ChannelSlice& c) { return nn::cnn3_logit(net, c); }, ch, 2000);
  EXPECT_LT(si, cnn);
}

TEST(Tables, ScoresRoundTrip) {
  const auto sc = scene_scores(2, 1.0, 3);
  std::stringstream buf;
  write_scores(buf, sc);
  const auto back = read_scores(buf);
  ASSERT_EQ(back.size(), sc.size());
  for (std::size_t i = 0; i < sc.size(); ++i) {
    EXPECT_EQ(back[i].spectrogram_id, sc[i].spectrogram_id);
    EXPECT_EQ(back[i].channel_center, sc[i].channel_center);
    EXPECT_EQ(back[i].score, sc[i].score);
    EXPECT_EQ(back[i].present, sc[i].present);
  }
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "specsense/ml/gmm.hpp"
#include "specsense/ml/knn.hpp"
#include "specsense/ml/svm.hpp"

using namespace specsense;
using namespace specsense::ml;

namespace {

Matrix<double> rows_of(const std::vector<std::vector<double>>& v) {
  Matrix<double> m(v.size(), v.empty() ? 0 : v[0].size());
  for (std::size_t i = 0; i < v.size(); ++i) std::copy(v[i].begin(), v[i].end(), m.row(i).begin());
  return m;
}

// Two Gaussian blobs in d dimensions, labels 1 for the blob at +shift.
std::pair<Matrix<double>, std::vector<int>> blobs(std::size_t n_per, std::size_t d, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix<double> x(2 * n_per, d);
  std::vector<int> y(2 * n_per);
  for (std::size_t i = 0; i < 2 * n_per; ++i) {
    y[i] = i % 2;
    for (std::size_t j = 0; j < d; ++j) x(i, j) = g(rng) + (y[i] ? shift : -shift);
  }
  return {x, y};
}

double knn_oracle(const Matrix<double>& x, const std::vector<int>& y, std::size_t k, std::span<const double> q) {
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  auto d2 = [&](std::size_t i) {
    double s = 0;
    for (std::size_t j = 0; j < q.size(); ++j) s += (x(i, j) - q[j]) * (x(i, j) - q[j]);
    return s;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d2(a) < d2(b); });
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) pos += y[idx[i]];
  return double(pos) / double(k);
}

}  // namespace

TEST(Knn, CoincidentPointWithTwoPositiveNeighbours) {
  const auto x = rows_of({{0, 0}, {0.1, 0}, {5, 5}, {6, 5}});
  const auto m = knn_fit(x, {1, 1, 0, 0}, 2);
  const std::vector<double> q{0, 0};
  EXPECT_EQ(knn_score(m, q), 1.0);
}

TEST(Knn, EvenSplitIsNegative) {
  const auto x = rows_of({{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {9, 9}});
  const std::vector<int> y{1, 1, 0, 0, 1};
  const auto m = knn_fit(x, y, 4);
  const std::vector<double> q{0, 0};
  const double s = knn_score(m, q);
  EXPECT_EQ(s, knn_oracle(x, y, 4, q));
  EXPECT_EQ(s, 0.5);
  EXPECT_FALSE(knn_decide(s));
}

TEST(Knn, EqualDistancesPreferLowerIndex) {
  const auto x = rows_of({{1, 0}, {-1, 0}, {0, 1}});
  const std::vector<double> q{0, 0};
  EXPECT_EQ(knn_score(knn_fit(x, {1, 0, 0}, 1), q), 1.0);
  EXPECT_EQ(knn_score(knn_fit(x, {0, 1, 1}, 1), q), 0.0);
}

TEST(Knn, MatchesBruteForceAndIsOnTheKGrid) {
  const auto [x, y] = blobs(40, 5, 1.5, 3);
  const auto m = knn_fit(x, y, 9);
  std::size_t pos_ok = 0, n_pos = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double s = knn_score(m, x.row(i));
    EXPECT_EQ(s, knn_oracle(x, y, 9, x.row(i)));
    EXPECT_DOUBLE_EQ(s * 9, std::round(s * 9));
    if (y[i]) {
      ++n_pos;
      pos_ok += s >= 5.0 / 9.0;
    }
  }
  EXPECT_EQ(pos_ok, n_pos);
}

TEST(Knn, Errors) {
  EXPECT_THROW(knn_fit(Matrix<double>(0, 3), {}, 1), Error);
  const auto x = rows_of({{0, 0}, {1, 1}});
  EXPECT_THROW(knn_fit(x, {0, 1}, 3), Error);
  EXPECT_THROW(knn_fit(x, {0}, 1), Error);
  const auto m = knn_fit(x, {0, 1}, 1);
  const std::vector<double> bad{1, 2, 3};
  EXPECT_THROW(knn_score(m, bad), Error);
}

TEST(Svm, SeparatesFourPointToySet) {
  const auto x = rows_of({{2, 2}, {3, 1}, {-2, -1}, {-1, -3}});
  const std::vector<int> y{1, 1, 0, 0};
  for (auto solver : {LinearSolver::Primal, LinearSolver::Dual}) {
    SvmOptions opt;
    opt.linear_solver = solver;
    const auto m = svm_fit(x, y, Kernel{}, opt);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(svm_score(m, x.row(i)) > 0, y[i] == 1);
  }
}

TEST(Svm, PointOnHyperplaneScoresZero) {
  const auto x = rows_of({{2, 2}, {3, 1}, {-2, -1}, {-1, -3}});
  const auto m = svm_fit(x, {1, 1, 0, 0}, Kernel{});
  ASSERT_TRUE(m.primal);
  // Project the origin onto w . z + b = 0.
  const double ww = Kernel::dot(m.weights, m.weights);
  std::vector<double> z(2);
  for (std::size_t j = 0; j < 2; ++j) z[j] = -m.bias * m.weights[j] / ww;
  EXPECT_NEAR(svm_score(m, z), 0.0, 1e-12);
}

TEST(Svm, DuplicatingTrainingSetKeepsProbeSigns) {
  const auto [x, y] = blobs(30, 2, 1.2, 8);
  Matrix<double> x2(2 * x.rows(), x.cols());
  std::vector<int> y2;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t i = 0; i < x.rows(); ++i) {
      std::copy(x.row(i).begin(), x.row(i).end(), x2.row(r * x.rows() + i).begin());
      y2.push_back(y[i]);
    }
  const auto a = svm_fit(x, y, Kernel{});
  const auto b = svm_fit(x2, y2, Kernel{});
  std::size_t agree = 0, total = 0;
  for (double u = -4; u <= 4; u += 0.5)
    for (double v = -4; v <= 4; v += 0.5) {
      const std::vector<double> p{u, v};
      const double sa = svm_score(a, p);
      if (std::abs(sa) < 0.05) continue;  // probes hugging the boundary
      ++total;
      agree += (sa > 0) == (svm_score(b, p) > 0);
    }
  EXPECT_EQ(agree, total);
}

TEST(Svm, LinearScoreIsAffine) {
  const auto [x, y] = blobs(25, 4, 1.0, 9);
  const auto m = svm_fit(x, y, Kernel{});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p(4), q(4), mix(4);
    const double a = std::uniform_real_distribution<double>(0, 1)(rng);
    for (std::size_t j = 0; j < 4; ++j) {
      p[j] = g(rng);
      q[j] = g(rng);
      mix[j] = a * p[j] + (1 - a) * q[j];
    }
    EXPECT_NEAR(svm_score(m, mix), a * svm_score(m, p) + (1 - a) * svm_score(m, q), 1e-10);
  }
}

TEST(Svm, KernelDualCoefficientsAreBoxed) {
  const auto [x, y] = blobs(30, 3, 0.6, 12);
  for (auto kind : {KernelKind::Rbf, KernelKind::Poly, KernelKind::Sigmoid}) {
    SvmOptions opt;
    opt.C = 0.7;
    Kernel k;
    k.kind = kind;
    const auto m = svm_fit(x, y, k, opt);
    ASSERT_FALSE(m.dual_coef.empty());
    for (double c : m.dual_coef) EXPECT_LE(std::abs(c), opt.C + 1e-12);
    EXPECT_DOUBLE_EQ(m.kernel.gamma, 1.0 / 3.0);
  }
}

TEST(Svm, RbfFitsXor) {
  const auto x = rows_of({{1, 1}, {-1, -1}, {1, -1}, {-1, 1}});
  const std::vector<int> y{1, 1, 0, 0};
  Kernel k;
  k.kind = KernelKind::Rbf;
  k.gamma = 1.0;
  SvmOptions opt;
  opt.C = 10;
  const auto m = svm_fit(x, y, k, opt);
  EXPECT_TRUE(m.converged);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(svm_score(m, x.row(i)) > 0, y[i] == 1);
}

TEST(Svm, Errors) {
  const auto x = rows_of({{0, 0}, {1, 1}});
  EXPECT_THROW(svm_fit(x, {1, 1}, Kernel{}), Error);
  EXPECT_THROW(svm_fit(x, {0, 1, 1}, Kernel{}), Error);
  SvmOptions opt;
  opt.C = 0;
  EXPECT_THROW(svm_fit(x, {0, 1}, Kernel{}, opt), Error);
}

TEST(Gmm, RecoversSeparatedClusters) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.5);
  Matrix<double> x(100, 1);
  std::vector<int> y(100);
  double mean0 = 0, mean1 = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    y[i] = i >= 50;
    x(i, 0) = g(rng) + (y[i] ? 10.0 : 0.0);
    (y[i] ? mean1 : mean0) += x(i, 0) / 50.0;
  }
  const auto m = gmm_fit(x, y, 3);
  const auto& pos = m.components[m.positive_component];
  const auto& neg = m.components[1 - m.positive_component];
  EXPECT_NEAR(pos.mean[0], mean1, 1e-6);
  EXPECT_NEAR(neg.mean[0], mean0, 1e-6);
  EXPECT_NEAR(pos.mean[0], 10.0, 0.3);
  EXPECT_NEAR(neg.mean[0], 0.0, 0.3);
  EXPECT_NEAR(pos.weight + neg.weight, 1.0, 1e-12);
  const std::vector<double> hi{9.5}, lo{0.2};
  EXPECT_GT(gmm_score(m, hi), 0.99);
  EXPECT_LT(gmm_score(m, lo), 0.01);
}

TEST(Gmm, SymmetricPointScoresHalf) {
  GmmModel m;
  m.components[0] = {0.5, {-2.0, 1.0}, {1.0, 2.0}};
  m.components[1] = {0.5, {2.0, 1.0}, {1.0, 2.0}};
  const std::vector<double> mid{0.0, 7.0};
  EXPECT_DOUBLE_EQ(gmm_score(m, mid), 0.5);
}

TEST(Gmm, LogLikelihoodNeverDecreases) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [x, y] = blobs(40, 6, 0.4 * double(seed % 4), seed);
    const auto m = gmm_fit(x, y, seed);
    ASSERT_GE(m.log_likelihood.size(), 1u);
    for (std::size_t i = 1; i < m.log_likelihood.size(); ++i)
      EXPECT_GE(m.log_likelihood[i], m.log_likelihood[i - 1] - 1e-9);
    EXPECT_LE(m.iterations, 500u);
  }
}

TEST(Gmm, PosteriorsSumToOne) {
  const auto [x, y] = blobs(30, 3, 1.0, 2);
  const auto m = gmm_fit(x, y, 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto [p, q] = gmm_posteriors(m, x.row(i));
    EXPECT_EQ(p + q, 1.0);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Gmm, ConstantFeatureHitsVarianceFloor) {
  const auto x = rows_of({{1, 0}, {1, 0.1}, {1, 5}, {1, 5.2}});
  const auto m = gmm_fit(x, {0, 0, 1, 1}, 0);
  EXPECT_TRUE(m.degenerate);
  for (const auto& c : m.components)
    for (double v : c.var) EXPECT_GE(v, 1e-6);
}

TEST(Gmm, NeedsTwoSamples) { EXPECT_THROW(gmm_fit(rows_of({{1.0}}), {1}, 0), Error); }

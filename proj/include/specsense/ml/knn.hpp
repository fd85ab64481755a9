#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "specsense/common.hpp"

namespace specsense::ml {

struct KnnModel {
  Matrix<double> features;  // one training sample per row
  std::vector<int> labels;  // 0 / 1
  std::size_t k = 9;
};

inline void check_binary(const std::vector<int>& labels) {
  for (int l : labels)
    if (l != 0 && l != 1) throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
}

inline KnnModel knn_fit(Matrix<double> features, std::vector<int> labels, std::size_t k) {
  if (features.rows() == 0) throw Error(Errc::EmptyTrainingSet, "no training samples");
  if (labels.size() != features.rows()) throw Error(Errc::DimensionMismatch, "label count differs from sample count");
  if (k < 1 || k > features.rows()) throw Error(Errc::InvalidArgument, "k must be in [1, n_train]");
  check_binary(labels);
  return KnnModel{std::move(features), std::move(labels), k};
}

/// Fraction of the k nearest (Euclidean) training samples labelled positive.
/// Equal distances rank the lower training index first.
inline double knn_score(const KnnModel& m, std::span<const double> x) {
  if (m.features.rows() == 0) throw Error(Errc::EmptyTrainingSet, "model has no training samples");
  if (x.size() != m.features.cols()) throw Error(Errc::DimensionMismatch, "feature length mismatch");
  std::vector<std::pair<double, std::size_t>> dist(m.features.rows());
  for (std::size_t i = 0; i < m.features.rows(); ++i) {
    const auto row = m.features.row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double t = row[j] - x[j];
      d += t * t;
    }
    dist[i] = {d, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(m.k), dist.end());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < m.k; ++i) pos += static_cast<std::size_t>(m.labels[dist[i].second]);
  return static_cast<double>(pos) / static_cast<double>(m.k);
}

/// Majority vote; an even split is negative.
inline bool knn_decide(double score) { return score > 0.5; }

}  // namespace specsense::ml

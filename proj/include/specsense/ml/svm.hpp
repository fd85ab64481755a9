#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "specsense/common.hpp"

namespace specsense::ml {

enum class KernelKind { Linear, Rbf, Poly, Sigmoid };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Poly: return "poly";
    case KernelKind::Sigmoid: return "sigmoid";
  }
  return "?";
}

struct Kernel {
  KernelKind kind = KernelKind::Linear;
  double gamma = 0.0;  // 0 means 1 / feature_length at fit time
  int degree = 3;
  double coef0 = 0.0;

  double operator()(std::span<const double> a, std::span<const double> b) const {
    switch (kind) {
      case KernelKind::Linear: return dot(a, b);
      case KernelKind::Rbf: {
        double d = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double t = a[i] - b[i];
          d += t * t;
        }
        return std::exp(-gamma * d);
      }
      case KernelKind::Poly: return std::pow(gamma * dot(a, b) + coef0, degree);
      case KernelKind::Sigmoid: return std::tanh(gamma * dot(a, b) + coef0);
    }
    return 0.0;
  }

  static double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
};

enum class LinearSolver { Primal, Dual };

struct SvmOptions {
  double C = 1.0;
  LinearSolver linear_solver = LinearSolver::Primal;
  std::size_t max_iter = 0;  // 0: solver default
  double tol = 1e-3;
};

struct SvmModel {
  Kernel kernel;
  double C = 1.0;
  bool primal = false;
  // primal linear form
  std::vector<double> weights;
  double bias = 0.0;
  // dual form
  Matrix<double> support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i
  double rho = 0.0;
  bool converged = true;
  std::size_t iterations = 0;

  std::size_t dim() const { return primal ? weights.size() : support_vectors.cols(); }
};

namespace detail {

inline void check_svm_inputs(const Matrix<double>& x, const std::vector<int>& labels) {
  if (x.rows() == 0) throw Error(Errc::EmptyTrainingSet, "no training samples");
  if (labels.size() != x.rows()) throw Error(Errc::DimensionMismatch, "label count differs from sample count");
  bool has_pos = false, has_neg = false;
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
    (l ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw Error(Errc::DegenerateLabels, "SVM needs both classes");
}

/// Full-batch projected subgradient descent (Pegasos step schedule) on
///   lambda/2 |w|^2 + mean_i max(0, 1 - y_i (w . (x_i - mu) + w_b)),   lambda = 1 / C,
/// with iterate averaging over the second half of the run.
inline SvmModel fit_linear_primal(const Matrix<double>& x, const std::vector<int>& labels, const SvmOptions& opt) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double lambda = 1.0 / opt.C;
  const std::size_t iters = opt.max_iter ? opt.max_iter : 1000;

  std::vector<double> mu(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mu[j] += x(i, j);
  for (double& m : mu) m /= static_cast<double>(n);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] ? 1.0 : -1.0;

  // w[0..d) acts on centred features, w[d] on a constant 1.
  std::vector<double> w(d + 1, 0.0), grad(d + 1), avg(d + 1, 0.0);
  std::size_t n_avg = 0;
  const double radius = 1.0 / std::sqrt(lambda);

  auto margin = [&](const std::vector<double>& ww, std::size_t i) {
    const auto row = x.row(i);
    double s = ww[d];
    for (std::size_t j = 0; j < d; ++j) s += ww[j] * (row[j] - mu[j]);
    return y[i] * s;
  };
  auto objective = [&](const std::vector<double>& ww) {
    double reg = 0.0;
    for (double v : ww) reg += v * v;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += std::max(0.0, 1.0 - margin(ww, i));
    return 0.5 * lambda * reg + loss / static_cast<double>(n);
  };

  double prev_obj = std::numeric_limits<double>::infinity();
  double rel_change = std::numeric_limits<double>::infinity();
  const std::size_t check_every = std::max<std::size_t>(1, iters / 10);
  for (std::size_t t = 1; t <= iters; ++t) {
    for (std::size_t j = 0; j <= d; ++j) grad[j] = lambda * w[j];
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (margin(w, i) >= 1.0) continue;
      const auto row = x.row(i);
      const double c = -y[i] * inv_n;
      for (std::size_t j = 0; j < d; ++j) grad[j] += c * (row[j] - mu[j]);
      grad[d] += c;
    }
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    double norm2 = 0.0;
    for (std::size_t j = 0; j <= d; ++j) {
      w[j] -= eta * grad[j];
      norm2 += w[j] * w[j];
    }
    const double norm = std::sqrt(norm2);
    if (norm > radius)
      for (double& v : w) v *= radius / norm;
    if (t > iters / 2) {
      ++n_avg;
      for (std::size_t j = 0; j <= d; ++j) avg[j] += (w[j] - avg[j]) / static_cast<double>(n_avg);
    }
    if (t > iters / 2 && t % check_every == 0) {
      const double obj = objective(avg);
      rel_change = std::abs(prev_obj - obj) / std::max(1e-12, std::abs(obj));
      prev_obj = obj;
    }
  }

  SvmModel m;
  m.kernel.kind = KernelKind::Linear;
  m.C = opt.C;
  m.primal = true;
  m.weights.assign(avg.begin(), avg.begin() + static_cast<long>(d));
  double shift = 0.0;
  for (std::size_t j = 0; j < d; ++j) shift += m.weights[j] * mu[j];
  m.bias = avg[d] - shift;
  m.iterations = iters;
  m.converged = rel_change < opt.tol;
  return m;
}

/// SMO on the C-SVC dual with second-order working-set selection.
inline SvmModel fit_dual(const Matrix<double>& x, const std::vector<int>& labels, const Kernel& kernel,
                         const SvmOptions& opt) {
  const std::size_t n = x.rows();
  const double C = opt.C;
  const double eps = opt.tol;
  const std::size_t max_iter = opt.max_iter ? opt.max_iter : std::max<std::size_t>(10000000, 100 * n);
  constexpr double tau = 1e-12;

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] ? 1.0 : -1.0;

  std::vector<std::vector<double>> krows(n);
  auto K = [&](std::size_t i) -> const std::vector<double>& {
    if (krows[i].empty()) {
      krows[i].resize(n);
      for (std::size_t j = 0; j < n; ++j) krows[i][j] = kernel(x.row(i), x.row(j));
    }
    return krows[i];
  };
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = kernel(x.row(i), x.row(i));

  std::vector<double> alpha(n, 0.0), G(n, -1.0);
  auto is_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto is_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  std::size_t iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (is_up(t) && -y[t] * G[t] > gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    if (i == n) {
      converged = true;
      break;
    }
    const auto& Ki = K(i);
    double gmin = std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!is_low(t)) continue;
      const double v = -y[t] * G[t];
      gmin = std::min(gmin, v);
      const double b = gmax - v;
      if (b > 0) {
        double a = diag[i] + diag[t] - 2.0 * Ki[t];
        if (a <= 0) a = tau;
        const double obj = -(b * b) / a;
        if (obj < best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (gmax - gmin < eps || j == n) {
      converged = true;
      break;
    }
    const auto& Kj = K(j);
    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = diag[i] + diag[j] - 2.0 * Ki[j];
      if (quad <= 0) quad = tau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * Ki[j];
      if (quad <= 0) quad = tau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) G[t] += y[t] * (y[i] * Ki[t] * dai + y[j] * Kj[t] * daj);
  }

  // rho: mean over free vectors, or the midpoint of the feasible interval.
  double sum_free = 0.0, ub = std::numeric_limits<double>::infinity(), lb = -ub;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  SvmModel m;
  m.kernel = kernel;
  m.C = C;
  m.primal = false;
  m.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  std::size_t n_sv = 0;
  for (double a : alpha) n_sv += a > 0 ? 1 : 0;
  m.support_vectors = Matrix<double>(n_sv, x.cols());
  for (std::size_t t = 0, k = 0; t < n; ++t) {
    if (!(alpha[t] > 0)) continue;
    for (std::size_t c = 0; c < x.cols(); ++c) m.support_vectors(k, c) = x(t, c);
    m.dual_coef.push_back(alpha[t] * y[t]);
    ++k;
  }
  m.iterations = iter;
  m.converged = converged;
  return m;
}

}  // namespace detail

/// Fits a binary SVM. Labels are 0/1 and map to -1/+1.
/// Hitting the iteration cap leaves `converged == false` on the returned model.
inline SvmModel svm_fit(const Matrix<double>& features, const std::vector<int>& labels, Kernel kernel,
                        const SvmOptions& opt = {}) {
  detail::check_svm_inputs(features, labels);
  if (!(opt.C > 0)) throw Error(Errc::InvalidArgument, "C must be positive");
  if (kernel.gamma <= 0) kernel.gamma = 1.0 / static_cast<double>(features.cols());
  if (kernel.kind == KernelKind::Linear && opt.linear_solver == LinearSolver::Primal)
    return detail::fit_linear_primal(features, labels, opt);
  SvmModel m = detail::fit_dual(features, labels, kernel, opt);
  if (m.dual_coef.empty()) throw Error(Errc::InvalidArgument, "SVM fit produced no support vectors");
  return m;
}

/// Signed decision value; positive means SPN-43 present.
inline double svm_score(const SvmModel& m, std::span<const double> x) {
  if (x.size() != m.dim()) throw Error(Errc::DimensionMismatch, "feature length mismatch");
  if (m.primal) return Kernel::dot(m.weights, x) + m.bias;
  double s = -m.rho;
  for (std::size_t i = 0; i < m.dual_coef.size(); ++i) s += m.dual_coef[i] * m.kernel(m.support_vectors.row(i), x);
  return s;
}

}  // namespace specsense::ml

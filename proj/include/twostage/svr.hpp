#pragma once

// Epsilon-SVR trained in the dual with a two-coordinate SMO solver.
//
// The dual is written over 2l variables (alpha_i, alpha*_i):
//   min 1/2 a'Qa + p'a   s.t.  y'a = 0,  0 <= a <= C
// with y = (+1..., -1...), p = (eps - t, eps + t), Q_st = y_s y_t K(x_s, x_t).
// Working pairs are the maximal violating pair; there is no shrinking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "twostage/dataset.hpp"
#include "twostage/errors.hpp"

namespace twostage {

struct RbfKernel {
  double gamma = 0.25;
  friend bool operator==(const RbfKernel&, const RbfKernel&) = default;
};

struct LinearKernel {
  friend bool operator==(const LinearKernel&, const LinearKernel&) = default;
};

using Kernel = std::variant<RbfKernel, LinearKernel>;

inline double kernel_value(const Kernel& kernel, std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
  if (const auto* rbf = std::get_if<RbfKernel>(&kernel)) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d2 += (a[j] - b[j]) * (a[j] - b[j]);
    return std::exp(-rbf->gamma * d2);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

struct SvrParams {
  double cost = 10.0;
  double epsilon_tube = 1e-5;
  Kernel kernel = RbfKernel{0.25};
  /// Stop once the maximal KKT violation m(a) - M(a) drops below this.
  double solver_tolerance = 1e-3;
  std::size_t max_iterations = 10'000'000;

  void validate() const {
    if (!(cost > 0.0)) throw std::invalid_argument("SVR cost must be > 0");
    if (!(epsilon_tube >= 0.0)) throw std::invalid_argument("SVR epsilon must be >= 0");
    if (const auto* rbf = std::get_if<RbfKernel>(&kernel); rbf && !(rbf->gamma > 0.0))
      throw std::invalid_argument("RBF gamma must be > 0");
    if (!(solver_tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  }

  friend bool operator==(const SvrParams&, const SvrParams&) = default;
};

/// cost 10, epsilon 1e-5, RBF with gamma = 1 / n_features.
inline SvrParams default_svr_params(std::size_t n_features) {
  SvrParams p;
  p.kernel = RbfKernel{1.0 / static_cast<double>(n_features)};
  return p;
}

struct SvrFitInfo {
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  /// 1/2 b'Kb + eps * sum(alpha + alpha*) - t'b at the solution, b = alpha - alpha*.
  double dual_objective = 0.0;
};

struct SvrModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefficients;  // alpha_i - alpha*_i, nonzero only
  double bias = 0.0;
  SvrParams params;
  SvrFitInfo fit_info;
};

inline double svr_predict(const SvrModel& model, std::span<const double> x) {
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.dual_coefficients[i] * kernel_value(model.params.kernel, model.support_vectors[i], x);
  return f;
}

inline SvrModel svr_fit(const RegressionSet& data, const SvrParams& params) {
  params.validate();
  const std::size_t l = data.size();
  if (l == 0) throw std::invalid_argument("SVR needs at least one training record");
  if (data.targets.size() != l) throw std::invalid_argument("inputs and targets differ in length");
  const std::size_t dim = data.dimension();
  for (const auto& x : data.inputs)
    if (x.size() != dim) throw DimensionMismatch(dim, x.size());

  std::vector<double> K(l * l);
  for (std::size_t a = 0; a < l; ++a)
    for (std::size_t b = a; b < l; ++b)
      K[a * l + b] = K[b * l + a] = kernel_value(params.kernel, data.inputs[a], data.inputs[b]);

  const std::size_t n = 2 * l;
  const double C = params.cost;
  const double eps = params.epsilon_tube;
  auto sign = [l](std::size_t t) { return t < l ? 1.0 : -1.0; };
  auto Q = [&](std::size_t s, std::size_t t) { return sign(s) * sign(t) * K[(s % l) * l + t % l]; };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < l; ++i) {
    p[i] = eps - data.targets[i];
    p[i + l] = eps + data.targets[i];
  }
  std::vector<double> G = p;

  auto in_up = [&](std::size_t t) { return sign(t) > 0 ? alpha[t] < C : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return sign(t) > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

  constexpr double tau = 1e-12;
  SvrFitInfo info;
  for (;;) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -sign(t) * G[t];
      if (in_up(t) && v > g_max) g_max = v, i = t;
      if (in_low(t) && v < g_min) g_min = v, j = t;
    }
    info.kkt_violation = (i == n || j == n) ? 0.0 : g_max - g_min;
    if (info.kkt_violation < params.solver_tolerance) break;
    if (info.iterations >= params.max_iterations)
      throw ConvergenceFailure(info.iterations, info.kkt_violation);
    ++info.iterations;

    const double old_i = alpha[i], old_j = alpha[j];
    const double q_ij = Q(i, j);
    if (sign(i) != sign(j)) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * q_ij;
      if (quad <= 0.0) quad = tau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0.0) alpha[i] = 0.0, alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = C - diff;
      } else {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = C + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * q_ij;
      if (quad <= 0.0) quad = tau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = sum - C;
      } else {
        if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = sum - C;
      } else {
        if (alpha[i] < 0.0) alpha[i] = 0.0, alpha[j] = sum;
      }
    }

    const double d_i = alpha[i] - old_i, d_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) G[t] += Q(t, i) * d_i + Q(t, j) * d_j;
  }

  // Offset from the free variables; midpoint of the feasible interval otherwise.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = sign(t) * G[t];
    if (alpha[t] >= C) {
      if (sign(t) < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (sign(t) > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                    : 0.5 * (upper + lower);

  double objective = 0.0;
  for (std::size_t t = 0; t < n; ++t) objective += alpha[t] * (G[t] + p[t]);
  info.dual_objective = 0.5 * objective;

  SvrModel model;
  model.params = params;
  model.bias = -rho;
  model.fit_info = info;
  for (std::size_t k = 0; k < l; ++k) {
    const double beta = alpha[k] - alpha[k + l];
    if (beta != 0.0) {
      model.support_vectors.push_back(data.inputs[k]);
      model.dual_coefficients.push_back(beta);
    }
  }
  return model;
}

}  // namespace twostage

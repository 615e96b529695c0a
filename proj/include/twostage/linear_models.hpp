#pragma once

// Linear regressors trained by maximum-likelihood gradient ascent.
//
// Lms assumes y = phi.x + N(0, sigma). RectifiedLms assumes
// y = max(0, phi.x + N(0, sigma)): positive targets keep the Gaussian density
// and every y = 0 target carries the probability mass P(phi.x + noise <= 0),
// i.e. (1 - erf(phi.x / (sqrt(2) sigma))) / 2. Neither model has an intercept.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twostage/dataset.hpp"
#include "twostage/errors.hpp"
#include "twostage/numerics.hpp"

namespace twostage {

struct LinearWeights {
  std::vector<double> phi;

  std::size_t dimension() const noexcept { return phi.size(); }
  friend bool operator==(const LinearWeights&, const LinearWeights&) = default;
};

enum class ModelKind { Lms, RectifiedLms };

struct TrainingConfig {
  double sigma = 1e-4;
  /// Replaces the default learning rate sigma^2 / (n + 2).
  std::optional<double> learning_rate_override;
  std::size_t max_epochs = 200000;
  /// Threshold on the infinity norm of the per-epoch update (rate * gradient).
  double gradient_tolerance = 1e-9;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
    if (learning_rate_override && !(*learning_rate_override > 0.0))
      throw std::invalid_argument("learning rate override must be > 0");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("gradient_tolerance must be > 0");
  }

  double learning_rate(std::size_t n_features) const {
    if (learning_rate_override) return *learning_rate_override;
    return sigma * sigma / (static_cast<double>(n_features) + 2.0);
  }
};

struct FitReport {
  std::size_t epochs_run = 0;
  double final_gradient_inf_norm = 0.0;
  double final_log_likelihood = 0.0;
  bool converged = false;
};

struct FitResult {
  LinearWeights weights;
  FitReport report;
};

using EpochObserver = std::function<void(std::size_t epoch, const LinearWeights&)>;

namespace detail {

inline double dot(std::span<const double> phi, std::span<const double> x) {
  if (phi.size() != x.size()) throw DimensionMismatch(phi.size(), x.size());
  double s = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) s += phi[j] * x[j];
  return s;
}

inline void check_dimensions(const LinearWeights& w, const RegressionSet& data) {
  if (data.inputs.size() != data.targets.size())
    throw std::invalid_argument("inputs and targets differ in length");
  for (const auto& x : data.inputs)
    if (x.size() != w.dimension()) throw DimensionMismatch(w.dimension(), x.size());
}

inline void check_rectified_targets(const RegressionSet& data) {
  for (std::size_t i = 0; i < data.targets.size(); ++i)
    if (!(data.targets[i] >= 0.0)) throw InvalidTarget(i, data.targets[i]);
}

inline double log_sqrt_2pi_sigma(double sigma) {
  return 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sigma);
}

// z = phi.x / (sqrt(2) sigma), the erf argument of the y = 0 mass.
inline double mass_argument(double prediction, double sigma) {
  return prediction / (std::numbers::sqrt2 * sigma);
}

// log erfc(b) - log erfc(a), avoiding the -z^2 cancellation when both are large.
inline double log_erfc_difference(double b, double a) {
  if (a >= numerics::detail::kContinuedFractionCutoff &&
      b >= numerics::detail::kContinuedFractionCutoff) {
    return std::log(numerics::detail::erfcx_continued_fraction(b) /
                    numerics::detail::erfcx_continued_fraction(a)) -
           (b - a) * (b + a);
  }
  return numerics::log_erfc(b) - numerics::log_erfc(a);
}

// sigma^2 * d(log L)/d(phi). Sigma-free for Lms; for RectifiedLms the y = 0
// rows contribute -sigma * sqrt(2/pi) * ratio(z) * x.
inline std::vector<double> scaled_gradient(ModelKind kind, std::span<const double> phi,
                                           const RegressionSet& data, double sigma) {
  std::vector<double> g(phi.size(), 0.0);
  const double mass_scale = sigma * std::sqrt(2.0 / std::numbers::pi);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.inputs[i];
    const double y = data.targets[i];
    const double pred = dot(phi, x);
    double coef;
    if (kind == ModelKind::Lms || y > 0.0) {
      coef = y - pred;
    } else {
      coef = -mass_scale * numerics::gaussian_hazard_ratio(mass_argument(pred, sigma));
    }
    if (coef == 0.0) continue;
    for (std::size_t j = 0; j < phi.size(); ++j) g[j] += coef * x[j];
  }
  return g;
}

// sigma^2 * (log L(candidate) - log L(current)), summed row by row so the
// difference keeps its own relative precision.
inline double scaled_objective_delta(ModelKind kind, std::span<const double> current,
                                     std::span<const double> candidate, const RegressionSet& data,
                                     double sigma) {
  double delta = 0.0;
  const double s2 = sigma * sigma;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.inputs[i];
    const double y = data.targets[i];
    const double p_old = dot(current, x);
    const double p_new = dot(candidate, x);
    if (kind == ModelKind::Lms || y > 0.0) {
      const double r_old = y - p_old;
      const double r_new = y - p_new;
      delta += -0.5 * (r_new - r_old) * (r_new + r_old);
    } else {
      delta += s2 * log_erfc_difference(mass_argument(p_new, sigma), mass_argument(p_old, sigma));
    }
  }
  return delta;
}

}  // namespace detail

/// Mean prediction phi.x; may be negative.
inline double lms_predict(const LinearWeights& w, std::span<const double> x) {
  return detail::dot(w.phi, x);
}

/// Threshold-linear prediction max(0, phi.x).
inline double rectified_predict(const LinearWeights& w, std::span<const double> x) {
  return std::max(0.0, detail::dot(w.phi, x));
}

inline double lms_log_likelihood(const LinearWeights& w, const RegressionSet& data, double sigma) {
  detail::check_dimensions(w, data);
  const double norm = detail::log_sqrt_2pi_sigma(sigma);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.targets[i] - lms_predict(w, data.inputs[i]);
    ll += -norm - r * r / (2.0 * sigma * sigma);
  }
  return ll;
}

/// Log-likelihood under the rectified model; throws InvalidTarget for y < 0.
inline double rectified_log_likelihood(const LinearWeights& w, const RegressionSet& data,
                                       double sigma) {
  detail::check_dimensions(w, data);
  detail::check_rectified_targets(data);
  const double norm = detail::log_sqrt_2pi_sigma(sigma);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.targets[i];
    const double pred = lms_predict(w, data.inputs[i]);
    if (y > 0.0) {
      const double r = y - pred;
      ll += -norm - r * r / (2.0 * sigma * sigma);
    } else {
      ll += -std::numbers::ln2 + numerics::log_erfc(detail::mass_argument(pred, sigma));
    }
  }
  return ll;
}

inline std::vector<double> lms_gradient(const LinearWeights& w, const RegressionSet& data,
                                        double sigma) {
  detail::check_dimensions(w, data);
  auto g = detail::scaled_gradient(ModelKind::Lms, w.phi, data, sigma);
  for (auto& v : g) v /= sigma * sigma;
  return g;
}

/// Gradient of rectified_log_likelihood. A y = 0 record whose prediction is
/// far below zero contributes nothing: the hazard ratio underflows to 0.
inline std::vector<double> rectified_gradient(const LinearWeights& w, const RegressionSet& data,
                                              double sigma) {
  detail::check_dimensions(w, data);
  detail::check_rectified_targets(data);
  auto g = detail::scaled_gradient(ModelKind::RectifiedLms, w.phi, data, sigma);
  for (auto& v : g) v /= sigma * sigma;
  return g;
}

inline double log_likelihood(ModelKind kind, const LinearWeights& w, const RegressionSet& data,
                             double sigma) {
  return kind == ModelKind::Lms ? lms_log_likelihood(w, data, sigma)
                                : rectified_log_likelihood(w, data, sigma);
}

/// Full-batch gradient ascent from phi = 0.
///
/// Each epoch proposes phi + (rate / m) * grad, with rate the configured
/// learning rate and m the record count, so replicating the data leaves the
/// trajectory unchanged. A proposal that would lower the likelihood is halved
/// until it does not; the likelihood is concave, so this only trims
/// overshoot. Training stops once the proposal's infinity norm is within
/// gradient_tolerance, or after max_epochs.
inline FitResult train(ModelKind kind, const RegressionSet& data, const TrainingConfig& config,
                       const EpochObserver& observer = {}) {
  config.validate();
  if (data.size() == 0) throw std::invalid_argument("training data is empty");
  const std::size_t n = data.dimension();
  LinearWeights w{std::vector<double>(n, 0.0)};
  detail::check_dimensions(w, data);
  if (kind == ModelKind::RectifiedLms) detail::check_rectified_targets(data);

  const double sigma = config.sigma;
  // rate / sigma^2, the factor left once sigma^2 is pulled out of the gradient.
  const double step_scale =
      (config.learning_rate_override ? *config.learning_rate_override / (sigma * sigma)
                                     : 1.0 / (static_cast<double>(n) + 2.0)) /
      static_cast<double>(data.size());

  FitReport report;
  std::vector<double> update(n);
  std::vector<double> candidate(n);
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto g = detail::scaled_gradient(kind, w.phi, data, sigma);
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      update[j] = step_scale * g[j];
      norm = std::max(norm, std::abs(update[j]));
    }
    if (!std::isfinite(norm)) throw TrainingFailure("non-finite gradient", epoch);
    report.final_gradient_inf_norm = norm;
    if (norm <= config.gradient_tolerance) {
      report.converged = true;
      break;
    }

    bool accepted = false;
    for (double t = 1.0; t >= 0x1p-40; t *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) candidate[j] = w.phi[j] + t * update[j];
      const double delta = detail::scaled_objective_delta(kind, w.phi, candidate, data, sigma);
      if (std::isfinite(delta) && delta >= 0.0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no ascent left at double precision
    for (double v : candidate)
      if (!std::isfinite(v)) throw TrainingFailure("non-finite weight", epoch);
    w.phi = candidate;
    report.epochs_run = epoch;
    if (observer) observer(epoch, w);
  }
  report.final_log_likelihood = log_likelihood(kind, w, data, sigma);
  return {std::move(w), report};
}

}  // namespace twostage

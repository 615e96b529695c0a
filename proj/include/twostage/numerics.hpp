#pragma once

// Special functions for the truncated-Gaussian likelihood.
//
// erfcx(z) = exp(z^2) * erfc(z) is evaluated piecewise: directly from erfc
// while exp(z^2) is representable and erfc(z) has not lost its leading
// digits, and from Laplace's continued fraction above that. The naive product
// overflows near z = 27, and the rectified gradient at sigma = 1e-4 needs z of
// order 1e4.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "twostage/errors.hpp"

namespace twostage::numerics {

namespace detail {

inline void require_finite(double z, const char* fn) {
  if (!std::isfinite(z)) throw DomainError(std::string(fn) + ": argument must be finite");
}

// Below this, exp(z^2)*erfc(z) keeps full double relative accuracy.
inline constexpr double kContinuedFractionCutoff = 5.0;

// erfc(z) = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))), z > 0.
// Modified Lentz; at z >= 5 this converges in well under 100 terms.
inline double erfcx_continued_fraction(double z) {
  constexpr double tiny = 1e-300;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double f = z;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double a = 0.5 * k;
    d = z + a * d;
    if (d == 0.0) d = tiny;
    c = z + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

inline double erfcx_nonnegative(double z) {
  if (z < kContinuedFractionCutoff) return std::exp(z * z) * std::erfc(z);
  return erfcx_continued_fraction(z);
}

}  // namespace detail

/// Error function. Throws DomainError on non-finite input.
inline double erf(double z) {
  detail::require_finite(z, "erf");
  return std::erf(z);
}

/// Scaled complementary error function exp(z^2) * (1 - erf(z)).
///
/// Finite for every z >= -26.6; below that the true value exceeds the double
/// range and +inf is returned. Throws DomainError on non-finite input.
inline double erfcx(double z) {
  detail::require_finite(z, "erfcx");
  if (z >= 0.0) return detail::erfcx_nonnegative(z);
  // erfc(-t) = 2 - erfc(t)
  return 2.0 * std::exp(z * z) - detail::erfcx_nonnegative(-z);
}

/// log(1 - erf(z)) without underflow for large positive z.
inline double log_erfc(double z) {
  detail::require_finite(z, "log_erfc");
  if (z < detail::kContinuedFractionCutoff) return std::log(std::erfc(z));
  return std::log(detail::erfcx_continued_fraction(z)) - z * z;
}

/// exp(-z^2) / (1 - erf(z)), computed as 1 / erfcx(z).
///
/// Nonnegative and increasing; tends to 0 for z -> -inf (exactly 0 once
/// erfcx overflows) and to z * sqrt(pi) for z -> +inf.
inline double gaussian_hazard_ratio(double z) {
  detail::require_finite(z, "gaussian_hazard_ratio");
  const double denom = erfcx(z);
  if (std::isinf(denom)) return 0.0;
  return 1.0 / denom;
}

}  // namespace twostage::numerics

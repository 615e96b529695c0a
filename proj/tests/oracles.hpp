#pragma once

// Reference computations for the tests. Each one takes a route independent of
// the library: direct long-double summation, finite differences, dense
// elimination, and active-set enumeration of the SVR dual.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "twostage/dataset.hpp"
#include "twostage/svr.hpp"

namespace twostage::oracle {

inline long double dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += static_cast<long double>(a[j]) * b[j];
  return s;
}

inline double lms_log_likelihood(const std::vector<double>& phi, const RegressionSet& data,
                                 double sigma) {
  const long double s = sigma;
  const long double norm = std::log(std::sqrt(2.0L * std::numbers::pi_v<long double>) * s);
  long double ll = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const long double r = data.targets[i] - dot(phi, data.inputs[i]);
    ll += -norm - r * r / (2 * s * s);
  }
  return static_cast<double>(ll);
}

inline double rectified_log_likelihood(const std::vector<double>& phi, const RegressionSet& data,
                                       double sigma) {
  const long double s = sigma;
  const long double norm = std::log(std::sqrt(2.0L * std::numbers::pi_v<long double>) * s);
  long double ll = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const long double y = data.targets[i];
    const long double pred = dot(phi, data.inputs[i]);
    if (y > 0) {
      ll += -norm - (y - pred) * (y - pred) / (2 * s * s);
    } else {
      const long double z = pred / (std::sqrt(2.0L) * s);
      ll += -std::log(2.0L) + std::log(std::erfc(z));
    }
  }
  return static_cast<double>(ll);
}

/// Central differences with step 1e-5 * max(1, |x_j|).
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              const std::vector<double>& x) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
    auto plus = x, minus = x;
    plus[j] += h;
    minus[j] -= h;
    g[j] = (f(plus) - f(minus)) / (plus[j] - minus[j]);
  }
  return g;
}

inline bool mixed_close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

/// Solves A x = b by Gaussian elimination with partial pivoting; A is n x n row-major.
inline std::vector<double> solve(std::vector<std::vector<long double>> a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    if (std::abs(a[c][c]) < 1e-18L) return {};
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t c = n; c-- > 0;) {
    long double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
    x[c] = static_cast<double>(s / a[c][c]);
  }
  return x;
}

/// Normal equations X'X phi = X'y.
inline std::vector<double> least_squares(const RegressionSet& data) {
  const std::size_t n = data.dimension();
  std::vector<std::vector<long double>> xtx(n, std::vector<long double>(n, 0));
  std::vector<long double> xty(n, 0);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t a = 0; a < n; ++a) {
      xty[a] += static_cast<long double>(data.inputs[i][a]) * data.targets[i];
      for (std::size_t b = 0; b < n; ++b)
        xtx[a][b] += static_cast<long double>(data.inputs[i][a]) * data.inputs[i][b];
    }
  return solve(xtx, xty);
}

/// Epsilon-SVR dual in beta = alpha - alpha*:
///   min 1/2 b'Kb + eps * |b|_1 - t'b   s.t.  sum b = 0,  -C <= b <= C.
inline double svr_dual_objective(const std::vector<std::vector<double>>& kernel,
                                 const std::vector<double>& targets, double eps,
                                 const std::vector<double>& beta) {
  double obj = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    for (std::size_t j = 0; j < beta.size(); ++j) obj += 0.5 * beta[i] * beta[j] * kernel[i][j];
    obj += eps * std::abs(beta[i]) - targets[i] * beta[i];
  }
  return obj;
}

/// Exact minimum of the SVR dual by enumerating, for every coefficient, its
/// state in {-C, free negative, 0, free positive, +C}. For each pattern the
/// free coefficients solve the equality-constrained KKT system; patterns whose
/// solution violates its assumed signs or bounds are discarded. Exponential in
/// the number of points; meant for l <= 5.
inline double svr_dual_bruteforce(const std::vector<std::vector<double>>& kernel,
                                  const std::vector<double>& targets, double eps, double cost) {
  const std::size_t l = targets.size();
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < l; ++i) patterns *= 5;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < patterns; ++code) {
    std::vector<int> state(l);
    std::size_t c = code;
    for (std::size_t i = 0; i < l; ++i) state[i] = static_cast<int>(c % 5) - 2, c /= 5;

    std::vector<double> beta(l, 0.0);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < l; ++i) {
      if (state[i] == -2) beta[i] = -cost;
      else if (state[i] == 2) beta[i] = cost;
      else if (state[i] != 0) free.push_back(i);
    }
    // stationarity on free i: (K b)_i + eps * sign_i - t_i + mu = 0; plus sum b = 0
    const std::size_t m = free.size();
    if (m > 0) {
      std::vector<std::vector<long double>> a(m + 1, std::vector<long double>(m + 1, 0));
      std::vector<long double> rhs(m + 1, 0);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = free[r];
        long double fixed = 0;
        for (std::size_t j = 0; j < l; ++j) fixed += kernel[i][j] * beta[j];
        for (std::size_t k = 0; k < m; ++k) a[r][k] = kernel[i][free[k]];
        a[r][m] = 1;
        rhs[r] = targets[i] - eps * state[i] - fixed;
      }
      long double fixed_sum = 0;
      for (std::size_t j = 0; j < l; ++j) fixed_sum += beta[j];
      for (std::size_t k = 0; k < m; ++k) a[m][k] = 1;
      rhs[m] = -fixed_sum;
      const auto x = solve(a, rhs);
      if (x.empty()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < m; ++k) {
        const double v = x[k];
        if ((state[free[k]] > 0 && (v < 0 || v > cost)) || (state[free[k]] < 0 && (v > 0 || v < -cost)))
          ok = false;
        beta[free[k]] = v;
      }
      if (!ok) continue;
    } else {
      double s = 0;
      for (double b : beta) s += b;
      if (std::abs(s) > 1e-12) continue;
    }
    best = std::min(best, svr_dual_objective(kernel, targets, eps, beta));
  }
  return best;
}

/// Worst violation of the epsilon-SVR optimality conditions, measured on the
/// primal residuals r_i = t_i - f(x_i) of the training points, together with
/// box and equality feasibility of the coefficients.
inline double svr_kkt_violation(const SvrModel& m, const RegressionSet& data) {
  const double C = m.params.cost;
  const double eps = m.params.epsilon_tube;
  std::vector<double> beta(data.size(), 0.0);
  for (std::size_t s = 0; s < m.support_vectors.size(); ++s)
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.inputs[i] == m.support_vectors[s]) beta[i] = m.dual_coefficients[s];
  double worst = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double b = beta[i];
    sum += b;
    worst = std::max(worst, std::abs(b) - C);
    const double r = data.targets[i] - svr_predict(m, data.inputs[i]);
    if (b == 0.0) worst = std::max(worst, std::abs(r) - eps);
    else if (b > 0.0 && b < C) worst = std::max(worst, std::abs(r - eps));
    else if (b < 0.0 && b > -C) worst = std::max(worst, std::abs(r + eps));
    else if (b >= C) worst = std::max(worst, eps - r);
    else worst = std::max(worst, r + eps);
  }
  return std::max(worst, std::abs(sum));
}

}  // namespace twostage::oracle

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Small special-function helpers used as independent oracles.

namespace trimix {

// P(Gamma(k,1) > x) for integer shape k, via the Poisson-sum identity
//   Q(k, x) = e^{-x} sum_{i<k} x^i / i!
inline double gamma_upper_tail(int k, double x) {
  if (k < 1) throw std::invalid_argument("gamma_upper_tail: shape must be >= 1");
  if (x <= 0) return 1.0;
  long double term = 1.0L;  // x^0/0!
  long double sum = 1.0L;
  for (int i = 1; i < k; ++i) {
    term *= static_cast<long double>(x) / static_cast<long double>(i);
    sum += term;
  }
  const long double val = std::exp(static_cast<long double>(-x)) * sum;
  return static_cast<double>(val < 0 ? 0.0L : (val > 1 ? 1.0L : val));
}

inline double gamma_lower_tail(int k, double x) { return 1.0 - gamma_upper_tail(k, x); }

// chi-square upper tail for even degrees of freedom (exact via the identity above)
inline double chi2_pvalue_even_df(int df, double x) {
  if (df < 2 || df % 2 != 0) throw std::invalid_argument("chi2_pvalue_even_df: df must be even and >= 2");
  return gamma_upper_tail(df / 2, x / 2.0);
}

// Ordinary least squares of y on x; returns slope, intercept and the slope's
// standard error.
struct LinearFit {
  double slope{0.0};
  double intercept{0.0};
  double slope_se{0.0};
  int points{0};
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need >= 2 matched points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("least_squares: degenerate x values");
  LinearFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

}  // namespace trimix

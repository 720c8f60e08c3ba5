#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimix/chain.hpp"
#include "trimix/modular.hpp"
#include "trimix/schedule.hpp"

// Character-theoretic side of the analysis. Frequency vectors y index the
// Fourier coefficients of the conditional first-row distribution; each row-2
// ring with second row w contributes the factor cos(2*pi*<y,w>/m).

namespace trimix {

constexpr i64 kFrequencyEnumCap = i64{1} << 24;

inline constexpr double kTau = 6.283185307179586476925286766559;

// class of a nonzero frequency vector, relative to the induced row I (>= 3);
// e1/e2/... labels follow the free-coordinate basis (coordinates 2..n)
enum class FreqClass { e1_line, P2, QI, WI };

inline const char* freq_class_name(FreqClass c) {
  switch (c) {
    case FreqClass::e1_line: return "e1";
    case FreqClass::P2: return "P2";
    case FreqClass::QI: return "QI";
    default: return "WI";
  }
}

inline FreqClass classify_frequency(const ResidueVector& y, int induced_row) {
  const int n = y.size();
  if (induced_row < 3 || induced_row > n)
    throw std::invalid_argument("classify_frequency: induced row must be in [3, n]");
  if (y.at(1) != 0) throw std::invalid_argument("classify_frequency: first coordinate must be 0");
  int top = 0;  // largest coordinate index with a nonzero entry
  for (int j = 2; j <= n; ++j)
    if (y.at(j) != 0) top = j;
  if (top == 0) throw std::invalid_argument("classify_frequency: zero vector has no class");
  if (top == 2) return FreqClass::e1_line;
  if (top == 3) return FreqClass::P2;
  if (top <= induced_row) return FreqClass::QI;
  return FreqClass::WI;
}

// lambda_{y,w} = cos(2 pi <y,w> / m)
inline double eigenvalue(const ResidueVector& y, const ResidueVector& w) {
  const Residue d = dot(y, w);
  return std::cos(kTau * static_cast<double>(d.value) / static_cast<double>(d.modulus));
}

// The (k, w_1..w_k) data conditioning the first-row distribution: w_s is the
// second row of the chain at the s-th row-2 ring.
struct ConditionalSpectrum {
  int n{2};
  i64 m{2};
  std::vector<ResidueVector> ws;

  i64 k() const { return static_cast<i64>(ws.size()); }
};

inline ConditionalSpectrum conditional_spectrum(const EventLog& log, double t) {
  ConditionalSpectrum spec;
  spec.n = log.config.n;
  spec.m = log.config.m;
  UniUpperMatrix x = start_state(log.config);
  for (const Event& ev : log.events) {
    if (ev.time > t) break;
    if (ev.row == 2 && ev.sign != 0) spec.ws.push_back(x.row(2));  // row 2 unchanged by the ring
    apply_event(x, ev);
  }
  return spec;
}

inline i64 frequency_space_size(int n, i64 m) {
  i64 size = 1;
  for (int j = 0; j < n - 1; ++j) {
    if (size > kFrequencyEnumCap / m)
      throw SizeCapError("frequency space too large to enumerate: " + std::to_string(m) + "^" +
                         std::to_string(n - 1) + " vectors (cap " +
                         std::to_string(kFrequencyEnumCap) + ")");
    size *= m;
  }
  return size;
}

// decode index -> y with zero first coordinate (free coordinates 2..n)
inline ResidueVector frequency_vector(int n, i64 m, i64 index) {
  ResidueVector y(n, m);
  for (int j = 2; j <= n; ++j) {
    y.set(j, index % m);
    index /= m;
  }
  return y;
}

template <typename Fn>
void for_each_nonzero_frequency(int n, i64 m, Fn&& fn) {
  const i64 size = frequency_space_size(n, m);
  for (i64 idx = 1; idx < size; ++idx) fn(frequency_vector(n, m, idx));
}

namespace detail {

inline std::vector<double> cos_table(i64 m) {
  std::vector<double> table(static_cast<std::size_t>(m));
  for (i64 r = 0; r < m; ++r)
    table[static_cast<std::size_t>(r)] =
        std::cos(kTau * static_cast<double>(r) / static_cast<double>(m));
  return table;
}

// dot products <y, w_s> for all s, as residues
inline std::vector<i64> dot_profile(const ResidueVector& y, const ConditionalSpectrum& spec) {
  std::vector<i64> dots;
  dots.reserve(spec.ws.size());
  for (const auto& w : spec.ws) dots.push_back(dot(y, w).value);
  return dots;
}

}  // namespace detail

// sum over nonzero y of exp(-2(k - sum_s lambda_{y,w_s})); the associated TV
// bound is sqrt(result)/2
inline double l2_bound(const ConditionalSpectrum& spec) {
  const auto cosv = detail::cos_table(spec.m);
  double total = 0.0;
  for_each_nonzero_frequency(spec.n, spec.m, [&](const ResidueVector& y) {
    double lambda_sum = 0.0;
    for (const auto& w : spec.ws) lambda_sum += cosv[static_cast<std::size_t>(dot(y, w).value)];
    total += std::exp(-2.0 * (static_cast<double>(spec.k()) - lambda_sum));
  });
  return total;
}

// partial sum over a supplied frequency set, for spaces beyond the
// enumeration cap (e.g. one class at a time)
inline double l2_bound(const ConditionalSpectrum& spec, const std::vector<ResidueVector>& ys) {
  const auto cosv = detail::cos_table(spec.m);
  double total = 0.0;
  for (const auto& y : ys) {
    if (y.is_zero()) throw std::invalid_argument("l2_bound: restricted set must exclude 0");
    double lambda_sum = 0.0;
    for (const auto& w : spec.ws) lambda_sum += cosv[static_cast<std::size_t>(dot(y, w).value)];
    total += std::exp(-2.0 * (static_cast<double>(spec.k()) - lambda_sum));
  }
  return total;
}

// sum over nonzero y of the exact squared Fourier coefficient (prod_s cos)^2;
// the Cauchy-Schwarz route, always >= 4 TV^2
inline double l2_exact_sum(const ConditionalSpectrum& spec) {
  const auto cosv = detail::cos_table(spec.m);
  double total = 0.0;
  for_each_nonzero_frequency(spec.n, spec.m, [&](const ResidueVector& y) {
    double prod = 1.0;
    for (const auto& w : spec.ws) prod *= cosv[static_cast<std::size_t>(dot(y, w).value)];
    total += prod * prod;
  });
  return total;
}

// Exact TV between the conditional first-row law (sum of a_s w_s over the free
// coordinates with iid +-1 signs) and uniform on (Z/mZ)^(n-1), via Fourier
// inversion of the coefficient products.
inline double conditional_exact_tv(const ConditionalSpectrum& spec) {
  const i64 size = frequency_space_size(spec.n, spec.m);
  const auto cosv = detail::cos_table(spec.m);
  const i64 m = spec.m;
  const int freedom = spec.n - 1;

  std::vector<double> qhat(static_cast<std::size_t>(size), 1.0);
  for (i64 idx = 0; idx < size; ++idx) {
    ResidueVector y = frequency_vector(spec.n, spec.m, idx);
    double prod = 1.0;
    for (const auto& w : spec.ws) prod *= cosv[static_cast<std::size_t>(dot(y, w).value)];
    qhat[static_cast<std::size_t>(idx)] = prod;
  }

  // q(x) = (1/M) sum_y qhat(y) cos(2 pi <y,x> / m); the transform is real and
  // even because the sign-symmetric law is symmetric under negation
  const double inv_size = 1.0 / static_cast<double>(size);
  double acc = 0.0;
  std::vector<i64> x_coords(static_cast<std::size_t>(freedom), 0);
  for (i64 xi = 0; xi < size; ++xi) {
    i64 rem = xi;
    for (int j = 0; j < freedom; ++j) {
      x_coords[static_cast<std::size_t>(j)] = rem % m;
      rem /= m;
    }
    double qx = 0.0;
    for (i64 yi = 0; yi < size; ++yi) {
      i64 yrem = yi;
      i64 d = 0;
      for (int j = 0; j < freedom; ++j) {
        d += (yrem % m) * x_coords[static_cast<std::size_t>(j)] % m;
        yrem /= m;
      }
      qx += qhat[static_cast<std::size_t>(yi)] * cosv[static_cast<std::size_t>(d % m)];
    }
    acc += std::abs(qx * inv_size - inv_size);
  }
  return 0.5 * acc;
}

// Both sides of the trigonometric sum bound
//   sum_{j=1}^{m-1} e^{-2x(1-cos(2 pi j/m))} <= m e^{-2x} + sqrt(3) m / (2 sqrt(2 pi x))
struct SpectralSumBound {
  double lhs;
  double rhs;
};

inline SpectralSumBound spectral_sum_bound(double x, i64 m) {
  if (x <= 0) throw std::invalid_argument("spectral_sum_bound: x must be > 0");
  require_modulus(m);
  double lhs = 0.0;
  for (i64 j = 1; j < m; ++j) {
    const double c = std::cos(kTau * static_cast<double>(j) / static_cast<double>(m));
    lhs += std::exp(-2.0 * x * (1.0 - c));
  }
  const double md = static_cast<double>(m);
  const double rhs = md * std::exp(-2.0 * x) + std::sqrt(3.0) * md / (2.0 * std::sqrt(kTau * x));
  return SpectralSumBound{lhs, rhs};
}

// The four-class assembly of the conditional l2 bound, with the class
// magnitude thresholds supplied by the schedule. Class sizes use the crude
// counts m^2, m^I, m^n of the assembled bound.
struct BoundBreakdown {
  double term_e1;
  double term_P2;
  double term_QI;
  double term_WI;
  double total;
};

inline BoundBreakdown class_bound_terms(int n, i64 m, double k, const Schedule& schedule) {
  if (k <= 0) throw std::invalid_argument("class_bound_terms: k must be > 0");
  if (schedule.n != n || schedule.m != m)
    throw std::invalid_argument("class_bound_terms: schedule built for different (n, m)");
  const double md = static_cast<double>(m);
  const double logm = std::log(md);

  BoundBreakdown b{};
  // <e1> line: every ring has <y,w> = y_2, so the term is the trigonometric
  // sum at x = k, bounded by the closed form.
  b.term_e1 = md * std::exp(-2.0 * k) + std::sqrt(3.0) * md / (2.0 * std::sqrt(kTau * k));

  const double p2_angle = kTau * schedule.p2_threshold / md;
  b.term_P2 = md * md * std::exp(-2.0 * k * (1.0 - std::cos(p2_angle)));

  const double qi_angle = kTau * schedule.w_threshold / md;  // = 2 pi / Ktilde
  b.term_QI = std::exp(schedule.I * logm) * std::exp(-2.0 * k * (1.0 - std::cos(qi_angle)));

  const double wi_angle = kTau * schedule.x_threshold / md;  // prime: pi/4
  b.term_WI =
      std::exp(static_cast<double>(n) * logm) * std::exp(-2.0 * k * (1.0 - std::cos(wi_angle)));

  b.total = b.term_e1 + b.term_P2 + b.term_QI + b.term_WI;
  return b;
}

}  // namespace trimix

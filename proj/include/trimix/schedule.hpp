#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "trimix/modular.hpp"

// Proof-schedule arithmetic: interval lengths, induced row index I, horizon
// t_{n,m} and magnitude thresholds, for the prime and the general variant.
// The universal constants are unspecified in the underlying bounds, so all of
// them are runtime-configurable; defaults are 1.0 (g defaults to 15).

namespace trimix {

enum class ScheduleVariant { prime, general };

struct ScheduleConstants {
  double D{1.0};       // horizon prefactor
  double C{1.0};       // exponent constant of the general-variant horizon
  double c{1.0};       // loglog term prefactor
  double d{1.0};       // interval-length prefactor
  double delta{1.0};   // P2 interval-length prefactor
  double g{15.0};      // good-interval fraction parameter
  double K{1.0};       // W_I threshold constant (general variant)
  double Ktilde{1.0};  // Q_I threshold constant
  double beta{1.0};    // P2 threshold prefactor
  double A{1.0};       // ring-count fraction constant
  double r{1.0};       // corner-decay rate constant
};

struct Schedule {
  ScheduleVariant variant{ScheduleVariant::prime};
  int n{3};
  i64 m{3};
  double J{0.0};
  double I{0.0};            // induced row index (real-valued; round for a row)
  double L{0.0};            // prime-variant interval length
  double L1{0.0}, L2{0.0}, L3{0.0};  // general-variant interval lengths
  double t_nm{0.0};
  double x_threshold{0.0};  // W_I magnitude threshold
  double w_threshold{0.0};  // Q_I magnitude threshold
  double p2_threshold{0.0};
  ScheduleConstants constants;
};

inline Schedule schedule_eval(int n, i64 m, ScheduleVariant variant,
                              const ScheduleConstants& consts = {}) {
  if (n < 2) throw std::invalid_argument("schedule_eval: n must be >= 2");
  require_modulus(m);
  const double logm = std::log(static_cast<double>(m));
  const double logn = std::log(static_cast<double>(n));
  const double loglogn = n >= 3 ? std::log(logn) : 0.0;  // clamp tiny-n artifacts
  const double md = static_cast<double>(m);

  Schedule s;
  s.variant = variant;
  s.n = n;
  s.m = m;
  s.constants = consts;
  s.w_threshold = md / consts.Ktilde;
  s.p2_threshold = consts.beta * std::sqrt(logm) / 2.0;

  if (variant == ScheduleVariant::prime) {
    s.J = std::sqrt(logm);
    s.I = 2.0 + s.J;
    s.L = consts.d * std::pow(md, 4.0 / s.J);
    s.t_nm = consts.D * (md * md * logn + static_cast<double>(n) * std::exp(9.0 * std::sqrt(logm))) +
             consts.c * md * md * loglogn;
    s.x_threshold = md / 8.0;
  } else {
    s.J = std::floor(std::cbrt(logm));
    if (s.J < 1.0)
      throw std::invalid_argument("schedule_eval: general variant needs log(m) >= 1 (m >= 3)");
    s.I = 1.0 + s.J;
    const double column_D = 20.0 * (s.J + 1.0);  // internal constant of the column bound
    const double a_jdm = 2.0 * std::pow(md, 2.0 / s.J) / std::log(column_D);
    s.L1 = consts.d * a_jdm;
    s.L2 = consts.d * md;
    s.L3 = consts.delta * logm;
    s.t_nm = consts.D * (md * md * logn +
                         static_cast<double>(n) * std::exp(consts.C * std::pow(logm, 2.0 / 3.0))) +
             consts.c * md * md * loglogn;
    s.x_threshold = md * std::exp(-consts.K * std::pow(logm, 2.0 / 3.0));
  }
  return s;
}

}  // namespace trimix

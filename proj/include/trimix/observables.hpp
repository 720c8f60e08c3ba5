#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "trimix/chain.hpp"
#include "trimix/modular.hpp"
#include "trimix/schedule.hpp"

// Everything the proof machinery watches on a trajectory: the scalar processes
// Z_y^t(i) = X_t(i) . y, their zero/non-zero interval structure, good-interval
// counts, ring counters, the backwards-process identity, and the column
// projections (corner, East column, column over Z).

namespace trimix {

inline double infinite_time() { return std::numeric_limits<double>::infinity(); }

// Piecewise-constant scalar observable reconstructed from an EventLog.
// Right-continuous: the value at a change time is the new value.
struct ZTrace {
  ResidueVector y;
  int row{2};
  i64 m{2};
  double horizon{0.0};
  i64 initial{0};
  std::vector<std::pair<double, i64>> changes;  // only actual value changes

  i64 value_at(double t) const {
    i64 v = initial;
    for (const auto& [time, val] : changes) {
      if (time > t) break;
      v = val;
    }
    return v;
  }

  i64 value_before(double t) const {
    i64 v = initial;
    for (const auto& [time, val] : changes) {
      if (time >= t) break;
      v = val;
    }
    return v;
  }

  // first time the value is nonzero; +inf if never within the horizon
  double first_nonzero_time() const {
    if (initial != 0) return 0.0;
    for (const auto& [time, val] : changes)
      if (val != 0) return time;
    return infinite_time();
  }

  // Lebesgue measure of {t in [a,b] : value != 0}
  double measure_nonzero(double a, double b) const {
    if (b <= a) return 0.0;
    double acc = 0.0;
    double seg_start = a;
    i64 v = value_at(a);
    for (const auto& [time, val] : changes) {
      if (time <= a) continue;
      if (time >= b) break;
      if (v != 0) acc += time - seg_start;
      seg_start = time;
      v = val;
    }
    if (v != 0) acc += b - seg_start;
    return acc;
  }
};

// Z_y(i) replayed from the log. Only events of rows >= i+1 can move it.
inline ZTrace track_Z(const EventLog& log, const ResidueVector& y, int row) {
  const int n = log.config.n;
  const i64 m = log.config.m;
  if (y.size() != n || y.modulus != m) throw std::invalid_argument("track_Z: y does not match log");
  if (y.at(1) != 0) throw std::invalid_argument("track_Z: y must have zero first coordinate");
  if (row < 1 || row > n) throw std::invalid_argument("track_Z: row out of range");

  ZTrace trace;
  trace.y = y;
  trace.row = row;
  trace.m = m;
  trace.horizon = log.config.horizon;

  // z_j = X(j) . y for j = row..n
  ResidueVector z = mat_vec(start_state(log.config), y);
  trace.initial = z.at(row);
  for (const Event& ev : log.events) {
    if (ev.sign == 0 || ev.row <= row) continue;
    const int target = ev.row - 1;
    const i64 old_val = z.at(target);
    z.set(target, old_val + ev.sign * z.at(ev.row));
    if (target == row && z.at(target) != old_val) trace.changes.emplace_back(ev.time, z.at(target));
  }
  return trace;
}

// T_i: first time Z_y(i) is nonzero
inline double hitting_time(const EventLog& log, const ResidueVector& y, int row) {
  return track_Z(log, y, row).first_nonzero_time();
}

enum class IntervalKind { zero, nonzero };

struct IntervalRecord {
  IntervalKind kind;
  double start;
  double end;
  bool truncated;  // cut off by the horizon rather than by a value change
};

// Alternating y-zero / y-non-zero tiling of [T, horizon], where T is the first
// nonzero time of the trace. Interval endpoints are trace change times.
inline std::vector<IntervalRecord> detect_intervals(const ZTrace& trace) {
  std::vector<IntervalRecord> records;
  const double start = trace.first_nonzero_time();
  if (start == infinite_time()) return records;

  double seg_start = start;
  bool seg_zero = false;  // trace value nonzero at `start`
  for (const auto& [time, val] : trace.changes) {
    if (time <= start) continue;
    const bool now_zero = (val == 0);
    if (now_zero == seg_zero) continue;
    records.push_back({seg_zero ? IntervalKind::zero : IntervalKind::nonzero, seg_start, time, false});
    seg_start = time;
    seg_zero = now_zero;
  }
  records.push_back(
      {seg_zero ? IntervalKind::zero : IntervalKind::nonzero, seg_start, trace.horizon, true});
  return records;
}

struct GoodIntervalWindow {
  double t_lo;
  double t_hi;
  double nonzero_measure;
  bool good;
};

struct GoodIntervalReport {
  double L;
  double g;
  double t0;
  double x_derived;  // 1/10 + 9/(10g), surfaced for diagnostics
  std::vector<GoodIntervalWindow> windows;
  i64 good_count;
  double fraction;

  // M_y^t: number of good intervals completed by time t
  i64 M_at(double t) const {
    i64 count = 0;
    for (const auto& w : windows)
      if (w.t_hi <= t && w.good) ++count;
    return count;
  }
};

// Windows [t_j, t_{j+1}] with t_j = t0 + j L, t0 = n; a window is good when
// the trace is nonzero for at least 1/g of it. Measures are exact.
inline GoodIntervalReport good_intervals(const ZTrace& trace, int n, double L, double g = 15.0) {
  if (L <= 0 || g <= 1) throw std::invalid_argument("good_intervals: need L > 0 and g > 1");
  const double t0 = static_cast<double>(n);
  if (trace.horizon < t0 + 2 * L)
    throw std::invalid_argument("good_intervals: horizon shorter than t0 + 2L");

  GoodIntervalReport report;
  report.L = L;
  report.g = g;
  report.t0 = t0;
  report.x_derived = 0.1 + 9.0 / (10.0 * g);
  report.good_count = 0;
  for (double lo = t0; lo + L <= trace.horizon + 1e-12; lo += L) {
    GoodIntervalWindow w;
    w.t_lo = lo;
    w.t_hi = lo + L;
    w.nonzero_measure = trace.measure_nonzero(lo, lo + L);
    w.good = w.nonzero_measure >= L / g;
    if (w.good) ++report.good_count;
    report.windows.push_back(w);
  }
  report.fraction = report.windows.empty()
                        ? 0.0
                        : static_cast<double>(report.good_count) /
                              static_cast<double>(report.windows.size());
  return report;
}

// A^t_{y,x}: number of row-2 rings s <= t with centered magnitude of Z_y(2)
// above x. Row-2 rings do not move Z_y(2) itself, so the value just before the
// ring equals the value at it; both evaluation conventions are exposed.
inline i64 ring_counter_A(const EventLog& log, const ResidueVector& y, i64 x, double t,
                          bool evaluate_before_ring = true) {
  const i64 m = log.config.m;
  if (x < 0 || x > m / 2) throw std::invalid_argument("ring_counter_A: x must be in [0, floor(m/2)]");
  const ZTrace trace = track_Z(log, y, 2);
  i64 count = 0;
  for (const Event& ev : log.events) {
    if (ev.time > t) break;
    if (ev.row != 2 || ev.sign == 0) continue;
    const i64 z = evaluate_before_ring ? trace.value_before(ev.time) : trace.value_at(ev.time);
    if (centered_magnitude(z, m) > x) ++count;
  }
  return count;
}

// Backwards-product identity: with s_1 < s_2 < ... the I-clock rings at which
// Z_y(I) != 0 and Y_{t',t} the ordered product of the other clocks' update
// matrices over (t', t],
//   Z_y^t = Y_{0,t} Z_y^0 + sum_k a_k Y_{s_k,t} E(I-1,I) Y_{0,s_k} Z_y^0
// holds exactly for every t. Y products are block diagonal at I-1: their
// [1,I-1] x [I,n] block is zero, which is asserted during construction.
struct BackwardsReport {
  bool ok{true};
  bool zero_block_ok{true};
  i64 qualifying_rings{0};
  i64 checked_times{0};
  double mismatch_time{0.0};
  int mismatch_coord{0};
};

namespace detail {

inline bool zero_block_holds(const UniUpperMatrix& y, int induced_row) {
  for (int i = 1; i <= induced_row - 1; ++i)
    for (int j = induced_row; j <= y.n(); ++j)
      if (y.at(i, j) != 0) return false;
  return true;
}

}  // namespace detail

inline BackwardsReport backwards_identity_check(const EventLog& log, const ResidueVector& y,
                                                int induced_row,
                                                const std::vector<double>& query_times) {
  const int n = log.config.n;
  const i64 m = log.config.m;
  if (induced_row < 2 || induced_row > n)
    throw std::invalid_argument("backwards_identity_check: I must be in [2, n]");
  if (y.size() != n || y.modulus != m || y.at(1) != 0)
    throw std::invalid_argument("backwards_identity_check: invalid y");

  BackwardsReport report;
  const ResidueVector z0 = mat_vec(start_state(log.config), y);

  UniUpperMatrix y_prod(n, m);            // Y_{0,t}, running product of non-I updates
  ResidueVector acc = z0;                 // Z0 + sum_k a_k Y_{0,s_k}^{-1} E(I-1,I) Y_{0,s_k} Z0
  ResidueVector z = z0;                   // direct replay of Z_y
  std::size_t next_event = 0;

  for (double t : query_times) {
    while (next_event < log.events.size() && log.events[next_event].time <= t) {
      const Event& ev = log.events[next_event];
      ++next_event;
      if (ev.sign == 0) continue;
      if (ev.row == induced_row) {
        if (z.at(induced_row) != 0) {  // qualifying ring (coordinate I unchanged by it)
          ++report.qualifying_rings;
          const ResidueVector y0s_z0 = mat_vec(y_prod, z0);
          const ResidueVector contrib = elementary_apply(induced_row - 1, induced_row, y0s_z0);
          const ResidueVector pulled = mat_vec(mat_inverse(y_prod), contrib);
          for (int j = 1; j <= n; ++j) acc.set(j, acc.at(j) + ev.sign * pulled.at(j));
        }
      } else {
        y_prod.row_add_inplace(ev.row, ev.sign);
        if (!detail::zero_block_holds(y_prod, induced_row)) report.zero_block_ok = false;
      }
      z.set(ev.row - 1, z.at(ev.row - 1) + ev.sign * z.at(ev.row));
    }

    const ResidueVector rhs = mat_vec(y_prod, acc);
    for (int j = 1; j <= n; ++j) {
      if (rhs.at(j) != z.at(j)) {
        report.ok = false;
        report.mismatch_time = t;
        report.mismatch_coord = j;
        return report;
      }
    }
    ++report.checked_times;
  }
  return report;
}

// Entry (1, n) of X_t: changes only at row-2 rings.
struct ScalarTrace {
  i64 initial{0};
  std::vector<std::pair<double, i64>> changes;

  i64 value_at(double t) const {
    i64 v = initial;
    for (const auto& [time, val] : changes) {
      if (time > t) break;
      v = val;
    }
    return v;
  }
};

inline ScalarTrace corner_process(const EventLog& log) {
  const int n = log.config.n;
  UniUpperMatrix x = start_state(log.config);
  ScalarTrace trace;
  trace.initial = x.at(1, n);
  for (const Event& ev : log.events) {
    const i64 before = x.at(1, n);
    apply_event(x, ev);
    if (x.at(1, n) != before) trace.changes.emplace_back(ev.time, x.at(1, n));
  }
  return trace;
}

// Column n of X_t (the East-model projection).
struct ColumnTrace {
  ResidueVector initial;
  std::vector<std::pair<double, ResidueVector>> changes;

  const ResidueVector& value_at(double t) const {
    const ResidueVector* v = &initial;
    for (const auto& [time, val] : changes) {
      if (time > t) break;
      v = &val;
    }
    return *v;
  }
};

inline ColumnTrace east_column(const EventLog& log) {
  const int n = log.config.n;
  UniUpperMatrix x = start_state(log.config);
  ColumnTrace trace;
  trace.initial = x.column(n);
  for (const Event& ev : log.events) {
    apply_event(x, ev);
    ResidueVector col = x.column(n);
    if (!(col == (trace.changes.empty() ? trace.initial : trace.changes.back().second)))
      trace.changes.emplace_back(ev.time, std::move(col));
  }
  return trace;
}

// Column-n dynamics replayed over Z (no reduction), started from e_n.
// Coordinate n stays 1; coordinate n-1 is a +-1 walk over Z.
struct IntegerColumnTrace {
  std::vector<i64> initial;
  std::vector<std::pair<double, std::vector<i64>>> changes;
};

inline IntegerColumnTrace column_over_Z(const EventLog& log) {
  const int n = log.config.n;
  constexpr i64 kOverflowGuard = i64{1} << 60;
  IntegerColumnTrace trace;
  trace.initial.assign(static_cast<std::size_t>(n), 0);
  trace.initial.back() = 1;
  std::vector<i64> z = trace.initial;
  for (const Event& ev : log.events) {
    if (ev.sign == 0) continue;
    auto& dst = z[static_cast<std::size_t>(ev.row - 2)];
    const i64 src = z[static_cast<std::size_t>(ev.row - 1)];
    if (std::abs(dst) > kOverflowGuard - std::abs(src))
      throw std::runtime_error("column_over_Z: value magnitude exceeded the int64 safety cap");
    dst += ev.sign * src;
    trace.changes.emplace_back(ev.time, z);
  }
  return trace;
}

// max_{t <= x, 1 <= i <= k} |Z_t(n-i)|
inline i64 integer_column_max(const IntegerColumnTrace& trace, double x, int k) {
  const int n = static_cast<int>(trace.initial.size());
  if (k < 1 || k > n - 1) throw std::invalid_argument("integer_column_max: k out of range");
  i64 best = 0;
  for (int i = 1; i <= k; ++i)
    best = std::max(best, std::abs(trace.initial[static_cast<std::size_t>(n - i - 1)]));
  for (const auto& [time, vec] : trace.changes) {
    if (time > x) break;
    for (int i = 1; i <= k; ++i)
      best = std::max(best, std::abs(vec[static_cast<std::size_t>(n - i - 1)]));
  }
  return best;
}

// theta_k: largest probability mass carried by any k-point subset, i.e. the
// sum of the k largest empirical point masses.
inline double theta_k(const std::vector<i64>& counts, i64 k) {
  if (k < 0) throw std::invalid_argument("theta_k: k must be >= 0");
  i64 total = 0;
  for (i64 c : counts) total += c;
  if (total <= 0) throw std::invalid_argument("theta_k: empty sample");
  std::vector<i64> sorted = counts;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  i64 top = 0;
  for (i64 i = 0; i < std::min<i64>(k, static_cast<i64>(sorted.size())); ++i)
    top += sorted[static_cast<std::size_t>(i)];
  return static_cast<double>(top) / static_cast<double>(total);
}

}  // namespace trimix

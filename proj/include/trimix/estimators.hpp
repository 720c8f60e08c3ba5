#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimix/chain.hpp"
#include "trimix/exact.hpp"
#include "trimix/num.hpp"
#include "trimix/rng.hpp"
#include "trimix/spectral.hpp"
#include "trimix/util.hpp"

// Monte Carlo machinery above single trajectories: projection-TV estimators
// with bootstrap errors, tail-bound verifiers, the induction-inequality probe,
// and the scaling-study harness. Replica farms are embarrassingly parallel
// over (seed, replica-index) streams, so estimates are reproducible and
// independent of the thread count.

namespace trimix {

struct EmpiricalDist {
  std::vector<i64> counts;
  i64 total{0};

  void add(i64 cell) {
    counts.at(static_cast<std::size_t>(cell)) += 1;
    ++total;
  }

  std::vector<double> masses() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return p;
  }
};

enum class Projection { corner, first_row, last_column };

inline std::string projection_name(Projection p) {
  switch (p) {
    case Projection::corner: return "corner";
    case Projection::first_row: return "first_row";
    default: return "last_column";
  }
}

constexpr i64 kProjectionCellCap = 1'000'000;

inline i64 projection_cells(int n, i64 m, Projection p) {
  if (p == Projection::corner) return m;
  i64 cells = 1;
  for (int j = 0; j < n - 1; ++j) {
    if (cells > kProjectionCellCap / m)
      throw SizeCapError("projection codomain too large: " + std::to_string(m) + "^" +
                         std::to_string(n - 1) + " cells (cap " +
                         std::to_string(kProjectionCellCap) + ")");
    cells *= m;
  }
  return cells;
}

inline i64 projection_cell(const UniUpperMatrix& x, Projection p) {
  const int n = x.n();
  const i64 m = x.m();
  switch (p) {
    case Projection::corner:
      return x.at(1, n);
    case Projection::first_row: {
      i64 cell = 0, radix = 1;
      for (int j = 2; j <= n; ++j) {
        cell += x.at(1, j) * radix;
        radix *= m;
      }
      return cell;
    }
    default: {  // last_column: free entries (1..n-1, n)
      i64 cell = 0, radix = 1;
      for (int i = 1; i <= n - 1; ++i) {
        cell += x.at(i, n) * radix;
        radix *= m;
      }
      return cell;
    }
  }
}

namespace detail {

// final state of one replica without materializing the event log
inline UniUpperMatrix replica_final_state(const ChainConfig& cfg, double t, std::uint64_t replica) {
  Rng rng(cfg.seed, cfg.stream + replica);
  UniUpperMatrix x = start_state(cfg);
  if (cfg.variant == Variant::discrete) {
    const auto steps = static_cast<i64>(t);
    for (i64 s = 0; s < steps; ++s) step_discrete(x, rng);
  } else {
    const double rate = static_cast<double>(cfg.n - 1);
    double now = 0.0;
    while (true) {
      now += rng.exponential(rate);
      if (now > t) break;
      const int row = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n - 1)));
      x.row_add_inplace(row, rng.sign());
    }
  }
  return x;
}

// Poisson sampler for the bootstrap: exact inversion for small means, normal
// approximation for large ones (adequate for standard-error estimation).
inline i64 approx_poisson(double lambda, Rng& rng) {
  if (lambda <= 0) return 0;
  if (lambda <= 30.0) {
    const double limit = std::exp(-lambda);
    i64 k = 0;
    double p = 1.0;
    while (true) {
      p *= rng.uniform01_open();
      if (p <= limit) return k;
      ++k;
    }
  }
  const double u1 = rng.uniform01_open();
  const double u2 = rng.uniform01();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTau * u2);
  const double v = lambda + std::sqrt(lambda) * z;
  return v < 0 ? 0 : static_cast<i64>(std::llround(v));
}

}  // namespace detail

// Plug-in TV from an empirical distribution to uniform, with a Poisson
// bootstrap standard error (200 resamples).
struct TvEstimate {
  double tv{0.0};
  double se{0.0};
  i64 replicas{0};
  i64 cells{0};
};

inline TvEstimate bootstrap_tv_estimate(const EmpiricalDist& dist, std::uint64_t seed,
                                        int resamples = 200) {
  TvEstimate est;
  est.replicas = dist.total;
  est.cells = static_cast<i64>(dist.counts.size());
  est.tv = tv_from_uniform(dist.masses());

  Rng rng(seed, 0xb0075);
  const double u = 1.0 / static_cast<double>(dist.counts.size());
  std::vector<double> tvs(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    double total = 0;
    double acc = 0;
    std::vector<double> resampled(dist.counts.size());
    for (std::size_t i = 0; i < dist.counts.size(); ++i) {
      resampled[i] = static_cast<double>(detail::approx_poisson(static_cast<double>(dist.counts[i]), rng));
      total += resampled[i];
    }
    if (total <= 0) total = 1;
    for (std::size_t i = 0; i < dist.counts.size(); ++i)
      acc += std::abs(resampled[i] / total - u);
    tvs[static_cast<std::size_t>(b)] = 0.5 * acc;
  }
  double mean = 0;
  for (double v : tvs) mean += v;
  mean /= static_cast<double>(resamples);
  double var = 0;
  for (double v : tvs) var += (v - mean) * (v - mean);
  est.se = std::sqrt(var / static_cast<double>(resamples - 1));
  return est;
}

// TV between the projected chain at time t and uniform on the codomain,
// estimated over seeded replicas. A lower bound on the full TV
// (data processing). The plug-in estimator carries a positive bias of order
// sqrt(cells/replicas); keep replicas >> cells when the target is near zero.
inline TvEstimate mc_projection_tv(const ChainConfig& cfg, Projection projection, double t,
                                   i64 replicas, int threads = 1) {
  cfg.validate();
  if (replicas < 1000)
    throw std::invalid_argument("mc_projection_tv: need at least 1000 replicas");
  const i64 cells = projection_cells(cfg.n, cfg.m, projection);

  std::vector<i64> cell_of(static_cast<std::size_t>(replicas));
  parallel_for(replicas, threads, [&](i64 r) {
    const UniUpperMatrix x = detail::replica_final_state(cfg, t, static_cast<std::uint64_t>(r));
    cell_of[static_cast<std::size_t>(r)] = projection_cell(x, projection);
  });

  EmpiricalDist dist;
  dist.counts.assign(static_cast<std::size_t>(cells), 0);
  for (i64 c : cell_of) dist.add(c);
  return bootstrap_tv_estimate(dist, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
}

// Exponential tail-bound suite: exact Gamma tails (independent special-function
// oracle) and Monte Carlo frequencies against the (2/e)^k and (6/7)^k bounds.
struct ExponTailRow {
  int k;
  double upper_exact;   // P(sum B_i > 2k)
  double upper_bound;   // (2/e)^k
  double upper_mc;
  double lower_exact;   // P(sum B_i < k/2)
  double lower_bound;   // (6/7)^k
  double lower_mc;
  bool exact_within_bounds;
};

inline std::vector<ExponTailRow> expon_tail_check(const std::vector<int>& k_values, i64 trials,
                                                  std::uint64_t seed) {
  std::vector<ExponTailRow> rows;
  rows.reserve(k_values.size());
  for (std::size_t idx = 0; idx < k_values.size(); ++idx) {
    const int k = k_values[idx];
    ExponTailRow row{};
    row.k = k;
    row.upper_exact = gamma_upper_tail(k, 2.0 * k);
    row.lower_exact = gamma_lower_tail(k, 0.5 * k);
    row.upper_bound = std::pow(2.0 / std::exp(1.0), k);
    row.lower_bound = std::pow(6.0 / 7.0, k);
    i64 above = 0, below_cnt = 0;
    Rng rng(seed, idx);
    for (i64 t = 0; t < trials; ++t) {
      double s = 0;
      for (int i = 0; i < k; ++i) s += rng.exponential(1.0);
      if (s > 2.0 * k) ++above;
      if (s < 0.5 * k) ++below_cnt;
    }
    row.upper_mc = static_cast<double>(above) / static_cast<double>(trials);
    row.lower_mc = static_cast<double>(below_cnt) / static_cast<double>(trials);
    row.exact_within_bounds =
        row.upper_exact <= row.upper_bound && row.lower_exact <= row.lower_bound;
    rows.push_back(row);
  }
  return rows;
}

// Induction-inequality probe: d_n(t) <= d_{n-1}(t) + E||q_t - u|| with the
// left side and d_{n-1} exact (uniformized continuous chain) and the expected
// conditional TV estimated over simulated (k, w) sequences.
struct InductionReport {
  int n;
  i64 m;
  double t;
  double lhs;      // d_n(t), exact
  double d_lower;  // d_{n-1}(t), exact
  double q_mean;   // estimate of E||q_t - u||
  double q_se;
  double rhs;
  double slack;    // rhs + 3 se - lhs
  bool ok;
  i64 replicas;
};

inline InductionReport induction_probe(int n, i64 m, double t, i64 replicas, std::uint64_t seed,
                                       int threads = 1) {
  if (n < 3) throw std::invalid_argument("induction_probe: need n >= 3");
  if (replicas < 2) throw std::invalid_argument("induction_probe: need >= 2 replicas");

  InductionReport report{};
  report.n = n;
  report.m = m;
  report.t = t;
  report.replicas = replicas;
  report.lhs = exact_tv_continuous(n, m, t);
  report.d_lower = exact_tv_continuous(n - 1, m, t);

  std::vector<double> tvs(static_cast<std::size_t>(replicas));
  parallel_for(replicas, threads, [&](i64 r) {
    ChainConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.variant = Variant::continuous;
    cfg.horizon = t;
    cfg.seed = seed;
    cfg.stream = static_cast<std::uint64_t>(r);
    const Trajectory traj = simulate_continuous(cfg);
    tvs[static_cast<std::size_t>(r)] = conditional_exact_tv(conditional_spectrum(traj.log, t));
  });

  double mean = 0;
  for (double v : tvs) mean += v;
  mean /= static_cast<double>(replicas);
  double var = 0;
  for (double v : tvs) var += (v - mean) * (v - mean);
  var /= static_cast<double>(replicas - 1);

  report.q_mean = mean;
  report.q_se = std::sqrt(var / static_cast<double>(replicas));
  report.rhs = report.d_lower + report.q_mean;
  report.slack = report.rhs + 3.0 * report.q_se - report.lhs;
  report.ok = report.slack >= -1e-12;
  return report;
}

// One grid point of the scaling study. Exact points carry a zero-width
// bracket; Monte Carlo points report the bisection bracket, not a point.
struct ScalingRow {
  int n;
  i64 m;
  double eps;
  double t_lo;
  double t_hi;
  double t_point;
  i64 replicas;
  std::uint64_t seed;
  std::string method;
  bool complete;
};

struct ScalingOptions {
  i64 replicas_per_probe{4000};
  i64 probe_budget{64};  // max TV probes per grid point
  Projection projection{Projection::last_column};
  std::uint64_t seed{1};
  int threads{1};
  double t_cap{1e6};
};

inline ScalingRow scaling_point(int n, i64 m, double eps, const ScalingOptions& opts) {
  ScalingRow row{};
  row.n = n;
  row.m = m;
  row.eps = eps;
  row.seed = opts.seed;
  row.complete = true;

  bool enumerable = true;
  try {
    GroupTable table(n, m);
    (void)table;
  } catch (const SizeCapError&) {
    enumerable = false;
  }

  if (enumerable) {
    const i64 t = t_mix_exact(n, m, eps);
    row.method = "exact";
    row.t_lo = row.t_hi = row.t_point = static_cast<double>(t);
    row.replicas = 0;
    return row;
  }

  // projection-based bisection: the projected chain lower-bounds the full TV,
  // so this is a mixing-time proxy at non-enumerable sizes
  row.method = "mc_" + projection_name(opts.projection);
  row.replicas = opts.replicas_per_probe;
  i64 probes = 0;
  auto probe = [&](double t) {
    ChainConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.variant = Variant::discrete;
    cfg.horizon = std::ceil(t);
    cfg.seed = opts.seed + static_cast<std::uint64_t>(probes) * 0x10001ULL;
    ++probes;
    return mc_projection_tv(cfg, opts.projection, std::ceil(t), opts.replicas_per_probe,
                            opts.threads);
  };

  double lo = 0.0;
  double hi = 1.0;
  while (probes < opts.probe_budget) {
    const TvEstimate est = probe(hi);
    if (est.tv <= eps) break;
    lo = hi;
    hi *= 2;
    if (hi > opts.t_cap) {
      row.complete = false;
      break;
    }
  }
  while (probes < opts.probe_budget && hi - lo > std::max(1.0, 0.05 * lo)) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid).tv <= eps)
      hi = mid;
    else
      lo = mid;
  }
  if (probes >= opts.probe_budget && hi - lo > std::max(1.0, 0.05 * lo)) row.complete = false;
  row.t_lo = lo;
  row.t_hi = hi;
  row.t_point = 0.5 * (lo + hi);
  return row;
}

inline std::vector<ScalingRow> scaling_study(const std::vector<std::pair<int, i64>>& grid,
                                             double eps, const ScalingOptions& opts = {}) {
  std::vector<ScalingRow> rows;
  rows.reserve(grid.size());
  for (const auto& [n, m] : grid) rows.push_back(scaling_point(n, m, eps, opts));
  return rows;
}

// log-log exponent fit across rows that share one axis
struct ScalingFit {
  double exponent{0.0};
  double se{0.0};
  double ci_lo{0.0};
  double ci_hi{0.0};
  int points{0};
  bool valid{false};
};

inline ScalingFit fit_exponent(const std::vector<ScalingRow>& rows, bool vary_m) {
  ScalingFit fit;
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    if (row.t_point <= 0) continue;
    xs.push_back(std::log(vary_m ? static_cast<double>(row.m) : static_cast<double>(row.n)));
    ys.push_back(std::log(row.t_point));
  }
  if (xs.size() < 2) return fit;  // degenerate grid: rows still stand on their own
  const LinearFit lf = least_squares(xs, ys);
  fit.exponent = lf.slope;
  fit.se = lf.slope_se;
  fit.ci_lo = lf.slope - 2.0 * lf.slope_se;
  fit.ci_hi = lf.slope + 2.0 * lf.slope_se;
  fit.points = lf.points;
  fit.valid = true;
  return fit;
}

}  // namespace trimix

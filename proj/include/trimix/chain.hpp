#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimix/modular.hpp"
#include "trimix/rng.hpp"

// The two walk variants on G_n(m):
//  - discrete: each step picks a row i in {2..n} uniformly; with prob 1/4 adds
//    it to row i-1, with prob 1/4 subtracts it, otherwise holds.
//  - continuous: each row i in {2..n} carries a rate-1 Poisson clock; a ring
//    adds or subtracts row i to row i-1 with equal probability.
// Simulation writes a replayable EventLog; everything downstream reconstructs
// trajectories from the log.

namespace trimix {

enum class Variant { discrete, continuous };

inline std::string variant_name(Variant v) {
  return v == Variant::discrete ? "discrete" : "continuous";
}

struct ChainConfig {
  int n{3};
  i64 m{3};
  Variant variant{Variant::continuous};
  double horizon{0.0};  // time (continuous) or number of steps (discrete)
  std::uint64_t seed{0};
  std::uint64_t stream{0};              // replica index; (seed, stream) names the RNG stream
  std::vector<i64> start_upper{};       // above-diagonal entries row-major; empty = identity

  void validate() const {
    if (n < 2) throw std::invalid_argument("chain: n must be >= 2");
    require_modulus(m);
    if (horizon < 0) throw std::invalid_argument("chain: horizon must be >= 0");
    if (variant == Variant::discrete && horizon != std::floor(horizon))
      throw std::invalid_argument("chain: discrete horizon must be an integer step count");
    const std::size_t free_entries = static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2;
    if (!start_upper.empty() && start_upper.size() != free_entries)
      throw std::invalid_argument("chain: start state needs n(n-1)/2 above-diagonal entries");
  }
};

inline UniUpperMatrix start_state(const ChainConfig& cfg) {
  UniUpperMatrix x(cfg.n, cfg.m);
  if (!cfg.start_upper.empty()) {
    std::size_t k = 0;
    for (int i = 1; i <= cfg.n; ++i)
      for (int j = i + 1; j <= cfg.n; ++j) x.set(i, j, cfg.start_upper[k++]);
  }
  return x;
}

// sign == 0 means a hold step (discrete variant only)
struct Event {
  double time{0.0};  // continuous time, or the 1-based step index for discrete
  int row{2};
  int sign{0};
};

struct EventLog {
  ChainConfig config;
  std::vector<Event> events;
};

inline void apply_event(UniUpperMatrix& state, const Event& ev) {
  if (ev.sign != 0) state.row_add_inplace(ev.row, ev.sign);
}

inline UniUpperMatrix replay_state(const EventLog& log, double t) {
  UniUpperMatrix x = start_state(log.config);
  for (const Event& ev : log.events) {
    if (ev.time > t) break;
    apply_event(x, ev);
  }
  return x;
}

// N(t): number of row-2 rings (non-hold) up to and including t
inline i64 count_row2_rings(const EventLog& log, double t) {
  if (t > log.config.horizon + 1e-12)
    throw std::invalid_argument("count_row2_rings: t beyond horizon");
  i64 k = 0;
  for (const Event& ev : log.events) {
    if (ev.time > t) break;
    if (ev.row == 2 && ev.sign != 0) ++k;
  }
  return k;
}

struct Trajectory {
  std::vector<double> query_times;
  std::vector<UniUpperMatrix> states;
  EventLog log;
};

inline Event step_discrete(UniUpperMatrix& state, Rng& rng) {
  const int n = state.n();
  Event ev;
  ev.row = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
  // two fair bits give exactly P(+1)=P(-1)=1/4, P(hold)=1/2
  if (rng.bit()) {
    ev.sign = 0;
  } else {
    ev.sign = rng.bit() ? -1 : 1;
  }
  apply_event(state, ev);
  return ev;
}

namespace detail {

inline std::vector<UniUpperMatrix> states_at(const EventLog& log,
                                             const std::vector<double>& query_times) {
  std::vector<UniUpperMatrix> states;
  states.reserve(query_times.size());
  UniUpperMatrix x = start_state(log.config);
  std::size_t next_event = 0;
  for (double t : query_times) {
    while (next_event < log.events.size() && log.events[next_event].time <= t) {
      apply_event(x, log.events[next_event]);
      ++next_event;
    }
    states.push_back(x);
  }
  return states;
}

inline void check_query_times(const ChainConfig& cfg, const std::vector<double>& query_times) {
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : query_times) {
    if (t < 0 || t > cfg.horizon)
      throw std::invalid_argument("query times must lie in [0, horizon]");
    if (t < prev) throw std::invalid_argument("query times must be sorted");
    prev = t;
  }
}

}  // namespace detail

inline Trajectory simulate_continuous(const ChainConfig& cfg,
                                      const std::vector<double>& query_times = {}) {
  cfg.validate();
  if (cfg.variant != Variant::continuous)
    throw std::invalid_argument("simulate_continuous: config variant is discrete");
  detail::check_query_times(cfg, query_times);

  Rng rng(cfg.seed, cfg.stream);
  EventLog log{cfg, {}};
  // superposition of n-1 rate-1 clocks: one rate-(n-1) stream with uniform row labels
  const double rate = static_cast<double>(cfg.n - 1);
  double t = 0.0;
  while (true) {
    double dt = rng.exponential(rate);
    while (t + dt <= t) dt = rng.exponential(rate);  // keep event times strictly increasing
    t += dt;
    if (t > cfg.horizon) break;
    Event ev;
    ev.time = t;
    ev.row = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n - 1)));
    ev.sign = rng.sign();
    log.events.push_back(ev);
  }

  Trajectory traj;
  traj.query_times = query_times;
  traj.states = detail::states_at(log, query_times);
  traj.log = std::move(log);
  return traj;
}

inline Trajectory simulate_discrete(const ChainConfig& cfg,
                                    const std::vector<double>& query_times = {}) {
  cfg.validate();
  if (cfg.variant != Variant::discrete)
    throw std::invalid_argument("simulate_discrete: config variant is continuous");
  detail::check_query_times(cfg, query_times);

  Rng rng(cfg.seed, cfg.stream);
  EventLog log{cfg, {}};
  UniUpperMatrix x = start_state(cfg);
  const auto steps = static_cast<i64>(cfg.horizon);
  log.events.reserve(static_cast<std::size_t>(steps));
  for (i64 s = 1; s <= steps; ++s) {
    Event ev = step_discrete(x, rng);
    ev.time = static_cast<double>(s);
    log.events.push_back(ev);
  }

  Trajectory traj;
  traj.query_times = query_times;
  traj.states = detail::states_at(log, query_times);
  traj.log = std::move(log);
  return traj;
}

inline Trajectory simulate(const ChainConfig& cfg, const std::vector<double>& query_times = {}) {
  return cfg.variant == Variant::continuous ? simulate_continuous(cfg, query_times)
                                            : simulate_discrete(cfg, query_times);
}

// Check of the first-row separation identity on a continuous trajectory:
//   X_t = Y_t + sum_{j<=N(t)} a_j E(1,2) Y_{t_j},
// where Y is the trajectory with the row-2 updates suppressed (so rows 2..n of
// Y match X and the first row of Y stays at its start value). The identity is
// entrywise mod m and must hold exactly; a mismatch indicates a bug.
struct SeparationReport {
  bool ok{true};
  double mismatch_time{0.0};
  int mismatch_entry_i{0};
  int mismatch_entry_j{0};
  i64 checked_times{0};
};

inline SeparationReport decompose_first_row(const Trajectory& traj) {
  const ChainConfig& cfg = traj.log.config;
  if (cfg.variant != Variant::continuous)
    throw std::invalid_argument("decompose_first_row expects a continuous trajectory");

  SeparationReport report;
  const int n = cfg.n;
  const i64 m = cfg.m;

  UniUpperMatrix y = start_state(cfg);      // row-2 updates suppressed
  ResidueVector first_row_sum(n, m);        // sum of a_j * (row 2 of Y_{t_j})
  std::size_t next_event = 0;

  for (std::size_t q = 0; q < traj.query_times.size(); ++q) {
    const double t = traj.query_times[q];
    while (next_event < traj.log.events.size() && traj.log.events[next_event].time <= t) {
      const Event& ev = traj.log.events[next_event];
      if (ev.row == 2) {
        for (int j = 1; j <= n; ++j)
          first_row_sum.set(j, first_row_sum.at(j) + ev.sign * y.at(2, j));
      } else {
        apply_event(y, ev);
      }
      ++next_event;
    }
    const UniUpperMatrix& x = traj.states[q];
    for (int i = 1; i <= n; ++i) {
      for (int j = i; j <= n; ++j) {
        const i64 expected =
            i == 1 ? mod_reduce(y.at(1, j) + first_row_sum.at(j), m) : y.at(i, j);
        if (x.at(i, j) != expected) {
          report.ok = false;
          report.mismatch_time = t;
          report.mismatch_entry_i = i;
          report.mismatch_entry_j = j;
          return report;
        }
      }
    }
    ++report.checked_times;
  }
  return report;
}

}  // namespace trimix

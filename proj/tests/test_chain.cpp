#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "trimix/chain.hpp"

using namespace trimix;

namespace {

ChainConfig continuous_config(int n, i64 m, double horizon, std::uint64_t seed,
                              std::uint64_t stream = 0) {
  ChainConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.variant = Variant::continuous;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.stream = stream;
  return cfg;
}

ChainConfig discrete_config(int n, i64 m, double steps, std::uint64_t seed,
                            std::uint64_t stream = 0) {
  ChainConfig cfg = continuous_config(n, m, steps, seed, stream);
  cfg.variant = Variant::discrete;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(simulate(continuous_config(1, 3, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(simulate(continuous_config(3, 1, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(simulate(discrete_config(3, 3, 2.5, 0)), std::invalid_argument);
  CHECK_THROWS_AS(simulate_continuous(discrete_config(3, 3, 2, 0)), std::invalid_argument);
}

TEST_CASE("horizon zero gives the start state and an empty log") {
  const Trajectory traj = simulate_continuous(continuous_config(4, 5, 0.0, 9), {0.0});
  CHECK(traj.log.events.empty());
  CHECK(traj.states.size() == 1);
  CHECK(traj.states[0] == UniUpperMatrix::identity(4, 5));
}

TEST_CASE("determinism: same seed and config reproduce the trajectory") {
  for (const ChainConfig& cfg :
       {continuous_config(4, 5, 20.0, 123), discrete_config(4, 5, 50, 123)}) {
    const Trajectory a = simulate(cfg, {cfg.horizon / 2, cfg.horizon});
    const Trajectory b = simulate(cfg, {cfg.horizon / 2, cfg.horizon});
    REQUIRE(a.log.events.size() == b.log.events.size());
    for (std::size_t i = 0; i < a.log.events.size(); ++i) {
      CHECK(a.log.events[i].time == b.log.events[i].time);
      CHECK(a.log.events[i].row == b.log.events[i].row);
      CHECK(a.log.events[i].sign == b.log.events[i].sign);
    }
    CHECK(a.states[0] == b.states[0]);
    CHECK(a.states[1] == b.states[1]);
  }
}

TEST_CASE("event times are strictly increasing") {
  const Trajectory traj = simulate_continuous(continuous_config(5, 3, 50.0, 77));
  for (std::size_t i = 1; i < traj.log.events.size(); ++i)
    CHECK(traj.log.events[i].time > traj.log.events[i - 1].time);
}

TEST_CASE("n=2 only has row 2, and the walk moves the (1,2) entry") {
  const Trajectory traj = simulate_discrete(discrete_config(2, 7, 200, 5), {200});
  for (const Event& ev : traj.log.events) CHECK(ev.row == 2);
  i64 acc = 0;
  for (const Event& ev : traj.log.events) acc += ev.sign;
  CHECK(traj.states[0].at(1, 2) == mod_reduce(acc, 7));
}

TEST_CASE("discrete hold frequency is 1/2 within 0.01 over 1e5 steps") {
  const Trajectory traj = simulate_discrete(discrete_config(4, 5, 100000, 31));
  i64 holds = 0;
  for (const Event& ev : traj.log.events)
    if (ev.sign == 0) ++holds;
  const double freq = static_cast<double>(holds) / 100000.0;
  CHECK(std::abs(freq - 0.5) < 0.01);
}

TEST_CASE("one non-hold step at m=2 sets the entry regardless of sign") {
  UniUpperMatrix x(3, 2);
  x.row_add_inplace(2, 1);
  CHECK(x.at(1, 2) == 1);
  UniUpperMatrix y(3, 2);
  y.row_add_inplace(2, -1);
  CHECK(y.at(1, 2) == 1);
}

TEST_CASE("continuous event count matches Poisson statistics: n=5, t=100, 200 replicas") {
  const int replicas = 200;
  double total = 0;
  for (int r = 0; r < replicas; ++r) {
    const Trajectory traj = simulate_continuous(continuous_config(5, 3, 100.0, 2024, r));
    total += static_cast<double>(traj.log.events.size());
  }
  const double mean = total / replicas;
  const double sd = std::sqrt(400.0 / replicas);  // mean of Poisson(400) over the replicas
  CHECK(std::abs(mean - 400.0) < 3.0 * sd);
}

TEST_CASE("n=2 marginal matches the analytic heat kernel of the rate-1 walk") {
  // empirical characteristic function of X_t(1,2) against e^{-t(1-cos(2 pi j/m))}
  const i64 m = 24;
  const double t = 2.0;
  const int replicas = 40000;
  for (int j : {1, 3}) {
    double acc = 0;
    double acc_sq = 0;
    for (int r = 0; r < replicas; ++r) {
      const Trajectory traj =
          simulate_continuous(continuous_config(2, m, t, 555, static_cast<std::uint64_t>(r)), {t});
      const double angle =
          2.0 * M_PI * static_cast<double>(j * traj.states[0].at(1, 2)) / static_cast<double>(m);
      const double c = std::cos(angle);
      acc += c;
      acc_sq += c * c;
    }
    const double mean = acc / replicas;
    const double var = acc_sq / replicas - mean * mean;
    const double se = std::sqrt(var / replicas);
    const double expected = std::exp(
        -t * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(j) / static_cast<double>(m))));
    CHECK(std::abs(mean - expected) < 4.0 * se + 1e-9);
  }
}

TEST_CASE("count_row2_rings basics and Poisson mean") {
  const Trajectory empty = simulate_continuous(continuous_config(3, 3, 0.0, 1));
  CHECK(count_row2_rings(empty.log, 0.0) == 0);

  double total = 0;
  const int replicas = 300;
  const double t = 50.0;
  for (int r = 0; r < replicas; ++r) {
    const Trajectory traj = simulate_continuous(continuous_config(4, 3, t, 88, r));
    const i64 all = count_row2_rings(traj.log, t);
    i64 direct = 0;
    for (const Event& ev : traj.log.events)
      if (ev.row == 2) ++direct;
    CHECK(all == direct);  // t = horizon counts every row-2 ring
    total += static_cast<double>(all);
  }
  const double mean = total / replicas;
  const double sd = std::sqrt(t / replicas);
  CHECK(std::abs(mean - t) < 3.0 * sd);
}

TEST_CASE("first-row separation identity holds exactly on seeded trajectories") {
  int checked = 0;
  for (int n : {3, 4, 5}) {
    for (i64 m : {3, 5, 8}) {
      for (std::uint64_t r = 0; r < 56; ++r) {
        const ChainConfig cfg = continuous_config(n, m, 6.0, 4242, r);
        const Trajectory traj = simulate_continuous(cfg, {0.0, 2.0, 4.0, 6.0});
        const SeparationReport report = decompose_first_row(traj);
        CHECK(report.ok);
        CHECK(report.checked_times == 4);
        ++checked;
      }
    }
  }
  CHECK(checked >= 500);
}

TEST_CASE("separation with no row-2 rings reduces to X_t = Y_t") {
  ChainConfig cfg = continuous_config(3, 5, 4.0, 0);
  EventLog log{cfg, {{0.5, 3, 1}, {1.5, 3, 1}, {2.5, 3, -1}}};
  Trajectory traj;
  traj.query_times = {4.0};
  traj.states = {replay_state(log, 4.0)};
  traj.log = log;
  CHECK(decompose_first_row(traj).ok);
  CHECK(traj.states[0].at(1, 2) == 0);  // first row untouched
}

TEST_CASE("single row-2 ring with sign -1 changes only the first row") {
  ChainConfig cfg = continuous_config(3, 7, 3.0, 0);
  EventLog log{cfg, {{0.4, 3, 1}, {1.0, 2, -1}}};
  Trajectory traj;
  traj.query_times = {3.0};
  traj.states = {replay_state(log, 3.0)};
  traj.log = log;
  CHECK(decompose_first_row(traj).ok);

  const UniUpperMatrix x = traj.states[0];
  const UniUpperMatrix y = replay_state(EventLog{cfg, {{0.4, 3, 1}}}, 3.0);
  for (int i = 2; i <= 3; ++i)
    for (int j = i; j <= 3; ++j) CHECK(x.at(i, j) == y.at(i, j));
  CHECK(x.at(1, 2) == mod_reduce(-1, 7));
  CHECK(x.at(1, 3) == mod_reduce(-y.at(2, 3), 7));
}

TEST_CASE("arbitrary start states replay correctly") {
  ChainConfig cfg = continuous_config(3, 5, 2.0, 17);
  cfg.start_upper = {1, 2, 3};  // entries (1,2), (1,3), (2,3)
  const UniUpperMatrix s = start_state(cfg);
  CHECK(s.at(1, 2) == 1);
  CHECK(s.at(1, 3) == 2);
  CHECK(s.at(2, 3) == 3);
  const Trajectory traj = simulate_continuous(cfg, {2.0});
  CHECK(decompose_first_row(traj).ok);
  CHECK(replay_state(traj.log, 2.0) == traj.states[0]);
}

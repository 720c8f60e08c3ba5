#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "trimix/exact.hpp"

using namespace trimix;

namespace {

// Independent oracle: materialize the lazy transition matrix densely and
// power it. Used only here, never by the implementation under test.
std::vector<std::vector<double>> dense_lazy_matrix(int n, i64 m) {
  GroupTable table(n, m);
  const auto size = static_cast<std::size_t>(table.size);
  std::vector<std::vector<double>> P(size, std::vector<double>(size, 0.0));
  const double move = 0.25 / static_cast<double>(n - 1);
  for (i64 g = 0; g < table.size; ++g) {
    P[static_cast<std::size_t>(g)][static_cast<std::size_t>(g)] += 0.5;
    const UniUpperMatrix x = table.element(g);
    for (int i = 2; i <= n; ++i) {
      for (int sign : {1, -1}) {
        const i64 img = table.index_of(row_add(x, i, sign));
        P[static_cast<std::size_t>(g)][static_cast<std::size_t>(img)] += move;
      }
    }
  }
  return P;
}

std::vector<double> dense_step(const std::vector<std::vector<double>>& P,
                               const std::vector<double>& p) {
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) out[j] += p[i] * P[i][j];
  return out;
}

// Independent oracle for n=2: the lazy +-1 walk on Z/m as a cycle distribution.
i64 cycle_walk_t_mix(i64 m, double eps) {
  std::vector<double> p(static_cast<std::size_t>(m), 0.0);
  p[0] = 1.0;
  const double u = 1.0 / static_cast<double>(m);
  auto tv = [&] {
    double acc = 0;
    for (double v : p) acc += std::abs(v - u);
    return 0.5 * acc;
  };
  if (tv() <= eps) return 0;
  for (i64 t = 1;; ++t) {
    std::vector<double> next(p.size(), 0.0);
    for (i64 x = 0; x < m; ++x) {
      next[static_cast<std::size_t>(x)] += 0.5 * p[static_cast<std::size_t>(x)];
      next[static_cast<std::size_t>((x + 1) % m)] += 0.25 * p[static_cast<std::size_t>(x)];
      next[static_cast<std::size_t>((x + m - 1) % m)] += 0.25 * p[static_cast<std::size_t>(x)];
    }
    p = next;
    if (tv() <= eps) return t;
  }
}

}  // namespace

TEST_CASE("enumeration sizes and the size cap") {
  CHECK(GroupTable(2, 3).size == 3);
  CHECK(GroupTable(3, 3).size == 27);
  CHECK(GroupTable(4, 2).size == 64);
  CHECK_THROWS_AS(GroupTable(6, 10), SizeCapError);
  try {
    GroupTable(6, 10);
  } catch (const SizeCapError& e) {
    CHECK(std::string(e.what()).find("10^15") != std::string::npos);
  }
}

TEST_CASE("one lazy step from a point mass at n=2, m=3 is (1/2, 1/4, 1/4)") {
  TransitionOperator op(2, 3);
  DistVector d = DistVector::point_mass(op.table(), op.table().index_of(UniUpperMatrix(2, 3)));
  d = apply_transition(op, d);
  // index 0 is the identity; indices 1, 2 are (1,2)=1 and (1,2)=2
  CHECK(d.p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.p[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(d.p[2] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("transition operator is symmetric and fixes uniform (n=3, m=3)") {
  const auto P = dense_lazy_matrix(3, 3);
  for (std::size_t a = 0; a < P.size(); ++a)
    for (std::size_t b = 0; b < P.size(); ++b) CHECK(P[a][b] == P[b][a]);  // exact dyadic entries

  TransitionOperator op(3, 3);
  DistVector u(op.table(), true);
  const DistVector still = apply_transition(op, u);
  for (std::size_t g = 0; g < still.p.size(); ++g)
    CHECK(std::abs(still.p[g] - u.p[g]) < 1e-15);
}

TEST_CASE("exact_tv at t=0 and monotone decline") {
  CHECK(std::abs(exact_tv(3, 3, 0) - (1.0 - 1.0 / 27.0)) < 1e-12);
  const std::vector<double> series = exact_tv_series(3, 3, 100);
  for (std::size_t t = 1; t < series.size(); ++t) CHECK(series[t] <= series[t - 1] + 1e-12);
  CHECK(series.back() < 0.01);
}

TEST_CASE("exact_tv matches the dense matrix-power oracle at t=50") {
  const auto P = dense_lazy_matrix(3, 3);
  std::vector<double> p(27, 0.0);
  p[0] = 1.0;  // identity has index 0
  for (int t = 0; t < 50; ++t) p = dense_step(P, p);
  const double oracle_tv = tv_from_uniform(p);
  CHECK(std::abs(exact_tv(3, 3, 50) - oracle_tv) < 1e-10);
}

TEST_CASE("vertex transitivity: TV from every start equals TV from identity (n=3, m=3)") {
  TransitionOperator op(3, 3);
  const i64 size = op.table().size;
  double reference = -1;
  for (i64 start = 0; start < size; ++start) {
    DistVector d = DistVector::point_mass(op.table(), start);
    for (int t = 0; t < 5; ++t) d.p = op.apply_lazy(d.p);
    const double tv = tv_from_uniform(d.p);
    if (reference < 0) reference = tv;
    CHECK(std::abs(tv - reference) < 1e-12);
  }
}

TEST_CASE("t_mix_exact edge cases and the n=2 cycle-walk oracle") {
  CHECK(t_mix_exact(3, 3, 1.0 - 1.0 / 27.0 + 1e-9) == 0);
  for (i64 m : {3, 5, 12}) {
    CHECK(t_mix_exact(2, m, 0.25) == cycle_walk_t_mix(m, 0.25));
    CHECK(t_mix_exact(2, m, 0.05) == cycle_walk_t_mix(m, 0.05));
  }
  CHECK_THROWS_AS(t_mix_exact(3, 3, 1.5), std::invalid_argument);
}

TEST_CASE("continuous TV via uniformization matches the n=2 spectral closed form") {
  // analytic heat kernel on Z/m: p_t(x) = (1/m) sum_j e^{-t(1-cos(2 pi j/m))} cos(2 pi jx/m)
  const i64 m = 5;
  for (double t : {0.5, 2.0, 10.0}) {
    std::vector<double> p(static_cast<std::size_t>(m), 0.0);
    for (i64 x = 0; x < m; ++x) {
      double acc = 0;
      for (i64 j = 0; j < m; ++j) {
        const double theta = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(m);
        acc += std::exp(-t * (1.0 - std::cos(theta))) *
               std::cos(theta * static_cast<double>(x));
      }
      p[static_cast<std::size_t>(x)] = acc / static_cast<double>(m);
    }
    const double oracle_tv = tv_from_uniform(p);
    double trunc = 0;
    const double got = exact_tv_continuous(2, m, t, &trunc);
    CHECK(trunc < 1e-12);
    CHECK(std::abs(got - oracle_tv) < 1e-10);
  }
}

TEST_CASE("projection pushforward conserves mass") {
  TransitionOperator op(3, 3);
  DistVector d = DistVector::point_mass(op.table(), 0);
  for (int t = 0; t < 4; ++t) d.p = op.apply_lazy(d.p);
  const std::vector<double> corner = project_distribution(
      op.table(), d.p, 3, [](const UniUpperMatrix& x) { return x.at(1, x.n()); });
  double total = 0;
  for (double v : corner) total += v;
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("distribution drift guard") {
  GroupTable table(2, 3);
  DistVector d(table);
  d.p = {0.5, 0.3, 0.1};  // mass 0.9
  CHECK_THROWS_AS(d.check_normalized(), std::runtime_error);
}

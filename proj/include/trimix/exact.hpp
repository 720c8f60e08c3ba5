#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimix/chain.hpp"
#include "trimix/modular.hpp"

// Ground-truth engine: enumerate G_n(m) when it is small, apply the discrete
// transition operator as a sparse action, and compute total-variation
// distances exactly. The continuous chain is handled by uniformization.

namespace trimix {

constexpr i64 kGroupSizeCap = 1'000'000;

// Index <-> matrix bijection via mixed-radix encoding of the n(n-1)/2 free
// above-diagonal entries (row-major order).
struct GroupTable {
  int n;
  i64 m;
  i64 size;

  GroupTable(int n_, i64 m_) : n(n_), m(require_modulus(m_)), size(1) {
    if (n < 2) throw std::invalid_argument("GroupTable: n must be >= 2");
    const int free_entries = n * (n - 1) / 2;
    for (int k = 0; k < free_entries; ++k) {
      if (size > kGroupSizeCap / m)
        throw SizeCapError("group too large to enumerate: |G| = " + std::to_string(m) + "^" +
                           std::to_string(free_entries) + " exceeds cap " +
                           std::to_string(kGroupSizeCap));
      size *= m;
    }
  }

  UniUpperMatrix element(i64 index) const {
    UniUpperMatrix x(n, m);
    i64 rem = index;
    for (int i = 1; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        x.set(i, j, rem % m);
        rem /= m;
      }
    }
    return x;
  }

  i64 index_of(const UniUpperMatrix& x) const {
    i64 index = 0;
    i64 radix = 1;
    for (int i = 1; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        index += x.at(i, j) * radix;
        radix *= m;
      }
    }
    return index;
  }
};

struct DistVector {
  int n;
  i64 m;
  std::vector<double> p;

  DistVector(const GroupTable& table, bool uniform = false)
      : n(table.n), m(table.m), p(static_cast<std::size_t>(table.size), 0.0) {
    if (uniform) {
      const double u = 1.0 / static_cast<double>(table.size);
      for (auto& v : p) v = u;
    }
  }

  static DistVector point_mass(const GroupTable& table, i64 index) {
    DistVector d(table);
    d.p[static_cast<std::size_t>(index)] = 1.0;
    return d;
  }

  double sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }

  // drift guard: surface accumulated error instead of silently renormalizing
  void check_normalized(double tol = 1e-9) const {
    const double s = sum();
    if (std::abs(s - 1.0) > tol)
      throw std::runtime_error("distribution mass drifted to " + std::to_string(s));
  }
};

inline double tv_from_uniform(const std::vector<double>& p) {
  const double u = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (double v : p) acc += std::abs(v - u);
  return 0.5 * acc;
}

inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

// Sparse action of the walk. Image index tables are precomputed once per
// (row, sign) generator so repeated applications are table lookups.
class TransitionOperator {
 public:
  TransitionOperator(int n, i64 m) : table_(n, m) {
    const int gens = 2 * (n - 1);
    images_.resize(static_cast<std::size_t>(gens));
    for (auto& v : images_) v.resize(static_cast<std::size_t>(table_.size));
    for (i64 g = 0; g < table_.size; ++g) {
      UniUpperMatrix x = table_.element(g);
      int slot = 0;
      for (int i = 2; i <= n; ++i) {
        for (int sign : {1, -1}) {
          UniUpperMatrix img = x;
          img.row_add_inplace(i, sign);
          images_[static_cast<std::size_t>(slot++)][static_cast<std::size_t>(g)] =
              table_.index_of(img);
        }
      }
    }
  }

  const GroupTable& table() const { return table_; }

  // one step of the jump chain: pick a row uniformly, add or subtract it
  // (no laziness); this is also the uniformization kernel at rate n-1
  std::vector<double> apply_jump(const std::vector<double>& p) const {
    std::vector<double> out(p.size(), 0.0);
    const double w = 1.0 / static_cast<double>(images_.size());
    for (const auto& image : images_) {
      for (std::size_t g = 0; g < p.size(); ++g)
        out[static_cast<std::size_t>(image[g])] += w * p[g];
    }
    return out;
  }

  // one step of the lazy discrete chain = 1/2 stay + 1/2 jump
  std::vector<double> apply_lazy(const std::vector<double>& p) const {
    std::vector<double> out = apply_jump(p);
    for (std::size_t g = 0; g < p.size(); ++g) out[g] = 0.5 * p[g] + 0.5 * out[g];
    return out;
  }

 private:
  GroupTable table_;
  std::vector<std::vector<i64>> images_;
};

inline DistVector apply_transition(const TransitionOperator& op, const DistVector& dist) {
  DistVector out(op.table());
  out.p = op.apply_lazy(dist.p);
  out.check_normalized();
  return out;
}

// d_n(t) for the lazy discrete chain, started from the identity
inline std::vector<double> exact_tv_series(int n, i64 m, i64 t_max) {
  TransitionOperator op(n, m);
  DistVector d = DistVector::point_mass(op.table(), op.table().index_of(UniUpperMatrix(n, m)));
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(t_max) + 1);
  series.push_back(tv_from_uniform(d.p));
  for (i64 t = 1; t <= t_max; ++t) {
    d.p = op.apply_lazy(d.p);
    d.check_normalized();
    series.push_back(tv_from_uniform(d.p));
  }
  return series;
}

inline double exact_tv(int n, i64 m, i64 t) { return exact_tv_series(n, m, t).back(); }

inline i64 t_mix_exact(int n, i64 m, double eps, i64 t_cap = 1'000'000) {
  if (eps <= 0 || eps >= 1) throw std::invalid_argument("t_mix_exact: eps must be in (0,1)");
  TransitionOperator op(n, m);
  DistVector d = DistVector::point_mass(op.table(), op.table().index_of(UniUpperMatrix(n, m)));
  if (tv_from_uniform(d.p) <= eps) return 0;
  for (i64 t = 1; t <= t_cap; ++t) {
    d.p = op.apply_lazy(d.p);
    if (tv_from_uniform(d.p) <= eps) {
      d.check_normalized();
      return t;
    }
  }
  throw std::runtime_error("t_mix_exact: eps not reached within step cap " + std::to_string(t_cap));
}

// Exact distribution of the continuous chain at time t by uniformization at
// rate n-1. Truncation error of the Poisson mixture is reported, not hidden.
struct ContinuousDist {
  std::vector<double> p;
  double truncation_error;
};

inline ContinuousDist exact_dist_continuous(const TransitionOperator& op, double t,
                                            double tail_tol = 1e-13) {
  const double lambda = static_cast<double>(op.table().n - 1) * t;
  std::vector<double> mix(op.table().size, 0.0);
  std::vector<double> cur(op.table().size, 0.0);
  cur[static_cast<std::size_t>(op.table().index_of(UniUpperMatrix(op.table().n, op.table().m)))] =
      1.0;

  double weight = std::exp(-lambda);  // Poisson pmf at k=0
  double cum = weight;
  for (std::size_t g = 0; g < cur.size(); ++g) mix[g] += weight * cur[g];
  i64 k = 0;
  while (1.0 - cum > tail_tol) {
    ++k;
    if (k > 10'000'000) throw std::runtime_error("uniformization failed to converge");
    cur = op.apply_jump(cur);
    weight *= lambda / static_cast<double>(k);
    cum += weight;
    if (weight > 0) {
      for (std::size_t g = 0; g < cur.size(); ++g) mix[g] += weight * cur[g];
    }
  }
  return ContinuousDist{std::move(mix), 1.0 - cum};
}

inline double exact_tv_continuous(int n, i64 m, double t, double* truncation_error = nullptr) {
  TransitionOperator op(n, m);
  ContinuousDist dist = exact_dist_continuous(op, t);
  if (truncation_error) *truncation_error = dist.truncation_error;
  return tv_from_uniform(dist.p);
}

// Pushforward of an exact distribution through a projection of the state.
template <typename CellFn>
std::vector<double> project_distribution(const GroupTable& table, const std::vector<double>& p,
                                         i64 cells, CellFn&& cell_of) {
  std::vector<double> out(static_cast<std::size_t>(cells), 0.0);
  for (i64 g = 0; g < table.size; ++g) {
    const i64 c = cell_of(table.element(g));
    out.at(static_cast<std::size_t>(c)) += p[static_cast<std::size_t>(g)];
  }
  return out;
}

}  // namespace trimix

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimix/rng.hpp"

// Arithmetic over Z/mZ and the group of upper unitriangular matrices.
// Row and column indices are 1-based throughout, matching the usual matrix
// notation (rows 1..n, clock i updates row i-1).

namespace trimix {

using i64 = std::int64_t;

// thrown when an enumeration request exceeds the desk-scale caps
class SizeCapError : public std::runtime_error {
 public:
  explicit SizeCapError(const std::string& msg) : std::runtime_error(msg) {}
};

inline i64 require_modulus(i64 m) {
  if (m < 2) throw std::invalid_argument("modulus must be >= 2, got " + std::to_string(m));
  // products of two residues must fit in int64
  if (m > (i64{1} << 31))
    throw std::invalid_argument("modulus exceeds the 2^31 arithmetic cap: " + std::to_string(m));
  return m;
}

inline i64 mod_reduce(i64 v, i64 m) {
  i64 r = v % m;
  return r < 0 ? r + m : r;
}

struct Residue {
  i64 value{0};
  i64 modulus{2};

  Residue() = default;
  Residue(i64 v, i64 m) : value(mod_reduce(v, require_modulus(m))), modulus(m) {}
};

// min(a, m-a); the predicate |a| > b means a lies in {b+1, ..., m-b-1}
inline i64 centered_magnitude(const Residue& a) {
  return std::min(a.value, a.modulus - a.value);
}

inline i64 centered_magnitude(i64 value, i64 m) {
  const i64 v = mod_reduce(value, m);
  return std::min(v, m - v);
}

inline bool magnitude_exceeds(const Residue& a, i64 b) { return centered_magnitude(a) > b; }

// Vector over Z/mZ. Coordinates are 1-based via at().
struct ResidueVector {
  std::vector<i64> coords;  // values in [0, m)
  i64 modulus{2};

  ResidueVector() = default;
  ResidueVector(int n, i64 m) : coords(static_cast<std::size_t>(n), 0), modulus(require_modulus(m)) {}
  ResidueVector(std::vector<i64> vals, i64 m) : coords(std::move(vals)), modulus(require_modulus(m)) {
    for (auto& v : coords) v = mod_reduce(v, modulus);
  }

  int size() const { return static_cast<int>(coords.size()); }

  i64 at(int i) const { return coords.at(static_cast<std::size_t>(i - 1)); }
  void set(int i, i64 v) { coords.at(static_cast<std::size_t>(i - 1)) = mod_reduce(v, modulus); }

  bool is_zero() const {
    for (i64 v : coords)
      if (v != 0) return false;
    return true;
  }

  bool operator==(const ResidueVector& o) const {
    return modulus == o.modulus && coords == o.coords;
  }
};

// Observable/frequency vectors carry n coordinates with the first forced to 0.
inline ResidueVector observable_vector(std::vector<i64> vals, i64 m) {
  ResidueVector y(std::move(vals), m);
  if (y.size() < 2) throw std::invalid_argument("observable vector needs n >= 2 coordinates");
  if (y.at(1) != 0)
    throw std::invalid_argument("observable vector must have zero first coordinate");
  return y;
}

inline ResidueVector unit_vector(int n, i64 m, int k) {
  ResidueVector e(n, m);
  e.set(k, 1);
  return e;
}

inline Residue dot(const ResidueVector& y, const ResidueVector& v) {
  if (y.size() != v.size() || y.modulus != v.modulus)
    throw std::invalid_argument("dot: dimension or modulus mismatch");
  const i64 m = y.modulus;
  i64 acc = 0;
  for (int i = 0; i < y.size(); ++i) {
    // coords < m <= 2^31 so the product fits in int64
    acc = mod_reduce(acc + y.coords[static_cast<std::size_t>(i)] * v.coords[static_cast<std::size_t>(i)] % m, m);
  }
  return Residue(acc, m);
}

// n x n upper triangular matrix over Z/mZ with unit diagonal.
class UniUpperMatrix {
 public:
  UniUpperMatrix(int n, i64 m)
      : n_(n), m_(require_modulus(m)), e_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {
    if (n < 2) throw std::invalid_argument("matrix dimension must be >= 2, got " + std::to_string(n));
    for (int i = 1; i <= n_; ++i) e_[idx(i, i)] = 1;
  }

  static UniUpperMatrix identity(int n, i64 m) { return UniUpperMatrix(n, m); }

  int n() const { return n_; }
  i64 m() const { return m_; }

  i64 at(int i, int j) const { return e_[idx(i, j)]; }

  void set(int i, int j, i64 v) {
    v = mod_reduce(v, m_);
    if (i == j && v != 1) throw std::invalid_argument("diagonal entries are fixed to 1");
    if (i > j && v != 0) throw std::invalid_argument("below-diagonal entries are fixed to 0");
    e_[idx(i, j)] = v;
  }

  ResidueVector row(int i) const {
    ResidueVector r(n_, m_);
    for (int j = 1; j <= n_; ++j) r.set(j, at(i, j));
    return r;
  }

  ResidueVector column(int j) const {
    ResidueVector c(n_, m_);
    for (int i = 1; i <= n_; ++i) c.set(i, at(i, j));
    return c;
  }

  // row (i-1) += sign * row i, i.e. left multiplication by I + sign*E(i-1, i)
  void row_add_inplace(int i, int sign) {
    if (i < 2 || i > n_) throw std::out_of_range("row_add: row index must be in [2, n]");
    if (sign != 1 && sign != -1) throw std::invalid_argument("row_add: sign must be +1 or -1");
    const std::size_t dst = idx(i - 1, 1);
    const std::size_t src = idx(i, 1);
    for (int j = i - 1; j < n_; ++j) {  // columns < i of row i are 0 except (i,i)=1
      e_[dst + static_cast<std::size_t>(j)] =
          mod_reduce(e_[dst + static_cast<std::size_t>(j)] + sign * e_[src + static_cast<std::size_t>(j)], m_);
    }
  }

  bool operator==(const UniUpperMatrix& o) const {
    return n_ == o.n_ && m_ == o.m_ && e_ == o.e_;
  }
  bool operator!=(const UniUpperMatrix& o) const { return !(*this == o); }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j - 1);
  }

  int n_;
  i64 m_;
  std::vector<i64> e_;
};

inline void require_compatible(const UniUpperMatrix& a, const UniUpperMatrix& b) {
  if (a.n() != b.n() || a.m() != b.m())
    throw std::invalid_argument("matrix dimension or modulus mismatch");
}

inline UniUpperMatrix mat_mul(const UniUpperMatrix& a, const UniUpperMatrix& b) {
  require_compatible(a, b);
  const int n = a.n();
  const i64 m = a.m();
  UniUpperMatrix c(n, m);
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      i64 acc = 0;
      for (int k = i; k <= j; ++k) acc = mod_reduce(acc + a.at(i, k) * b.at(k, j) % m, m);
      c.set(i, j, acc);
    }
  }
  return c;
}

// Back-substitution; no division needed since the diagonal is 1.
inline UniUpperMatrix mat_inverse(const UniUpperMatrix& a) {
  const int n = a.n();
  const i64 m = a.m();
  UniUpperMatrix b(n, m);
  for (int j = 2; j <= n; ++j) {
    for (int i = j - 1; i >= 1; --i) {
      i64 acc = 0;
      for (int k = i + 1; k <= j; ++k) acc = mod_reduce(acc + a.at(i, k) * b.at(k, j) % m, m);
      b.set(i, j, mod_reduce(-acc, m));
    }
  }
  return b;
}

inline UniUpperMatrix row_add(const UniUpperMatrix& a, int i, int sign) {
  UniUpperMatrix r = a;
  r.row_add_inplace(i, sign);
  return r;
}

// matrix-vector product over Z/mZ (x -> Ax), used by the observable machinery
inline ResidueVector mat_vec(const UniUpperMatrix& a, const ResidueVector& v) {
  if (a.n() != v.size() || a.m() != v.modulus)
    throw std::invalid_argument("mat_vec: dimension or modulus mismatch");
  const int n = a.n();
  const i64 m = a.m();
  ResidueVector out(n, m);
  for (int i = 1; i <= n; ++i) {
    i64 acc = 0;
    for (int j = i; j <= n; ++j) acc = mod_reduce(acc + a.at(i, j) * v.at(j) % m, m);
    out.set(i, acc);
  }
  return out;
}

// Raw elementary E(i,j): E(i,j)v = v_j e_i. Stored as (i, j, sign) where needed.
struct ElementaryMatrix {
  int i{1};
  int j{2};
  int sign{1};
};

inline ResidueVector elementary_apply(int i, int j, const ResidueVector& v) {
  ResidueVector out(v.size(), v.modulus);
  out.set(i, v.at(j));
  return out;
}

// v + sign * v_j e_i, i.e. (I + sign E(i,j)) v
inline ResidueVector elementary_update(int i, int j, int sign, const ResidueVector& v) {
  ResidueVector out = v;
  out.set(i, out.at(i) + sign * v.at(j));
  return out;
}

inline UniUpperMatrix random_unitriangular(int n, i64 m, Rng& rng) {
  UniUpperMatrix x(n, m);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      x.set(i, j, static_cast<i64>(rng.below(static_cast<std::uint64_t>(m))));
  return x;
}

}  // namespace trimix

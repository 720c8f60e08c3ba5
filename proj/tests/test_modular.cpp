#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <vector>

#include "trimix/exact.hpp"
#include "trimix/modular.hpp"
#include "trimix/rng.hpp"

using namespace trimix;

namespace {

// test-side oracle: plain integer matrix product reduced mod m
using RawMat = std::vector<std::vector<i64>>;

RawMat raw_from(const UniUpperMatrix& a) {
  RawMat r(static_cast<std::size_t>(a.n()), std::vector<i64>(static_cast<std::size_t>(a.n()), 0));
  for (int i = 1; i <= a.n(); ++i)
    for (int j = 1; j <= a.n(); ++j) r[i - 1][j - 1] = a.at(i, j);
  return r;
}

RawMat raw_mul(const RawMat& a, const RawMat& b, i64 m) {
  const std::size_t n = a.size();
  RawMat c(n, std::vector<i64>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      i64 acc = 0;
      for (std::size_t k = 0; k < n; ++k) acc = (acc + a[i][k] * b[k][j]) % m;
      c[i][j] = acc;
    }
  return c;
}

RawMat raw_elementary(int n, int i, int j) {
  RawMat e(static_cast<std::size_t>(n), std::vector<i64>(static_cast<std::size_t>(n), 0));
  e[i - 1][j - 1] = 1;
  return e;
}

bool raw_zero(const RawMat& a) {
  for (const auto& row : a)
    for (i64 v : row)
      if (v != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("residue construction and centered magnitude") {
  CHECK(Residue(5, 7).value == 5);
  CHECK(Residue(-1, 7).value == 6);
  CHECK(Residue(14, 7).value == 0);
  CHECK_THROWS_AS(Residue(0, 1), std::invalid_argument);

  CHECK(centered_magnitude(Residue(5, 7)) == 2);
  CHECK(magnitude_exceeds(Residue(5, 7), 1));
  CHECK(centered_magnitude(Residue(4, 8)) == 4);  // antipode
}

TEST_CASE("centered magnitude agrees with the set definition, exhaustively for m <= 50") {
  for (i64 m = 2; m <= 50; ++m) {
    for (i64 b = 0; b <= m; ++b) {
      // oracle: |a| > b iff a is one of {b+1, ..., m-b-1}
      std::set<i64> oracle;
      for (i64 a = b + 1; a <= m - b - 1; ++a) oracle.insert(a);
      for (i64 a = 0; a < m; ++a) {
        const bool claimed = magnitude_exceeds(Residue(a, m), b);
        CHECK(claimed == (oracle.count(a) > 0));
      }
    }
  }
}

TEST_CASE("dot products") {
  const i64 m = 7;
  UniUpperMatrix id(3, m);
  CHECK(dot(unit_vector(3, m, 2), id.row(2)).value == 1);

  ResidueVector zero(3, m);
  CHECK(dot(zero, id.row(1)).value == 0);

  CHECK_THROWS_AS(dot(ResidueVector(3, 7), ResidueVector(4, 7)), std::invalid_argument);
  CHECK_THROWS_AS(dot(ResidueVector(3, 7), ResidueVector(3, 5)), std::invalid_argument);
}

TEST_CASE("dot matches a big-integer oracle near the modulus cap") {
  const i64 m = (i64{1} << 31) - 1;
  Rng rng(0xd07u);
  for (int trial = 0; trial < 200; ++trial) {
    ResidueVector a(5, m), b(5, m);
    for (int i = 1; i <= 5; ++i) {
      a.set(i, static_cast<i64>(rng.below(static_cast<std::uint64_t>(m))));
      b.set(i, static_cast<i64>(rng.below(static_cast<std::uint64_t>(m))));
    }
    unsigned __int128 acc = 0;
    for (int i = 1; i <= 5; ++i)
      acc += static_cast<unsigned __int128>(a.at(i)) * static_cast<unsigned __int128>(b.at(i));
    const i64 expected = static_cast<i64>(acc % static_cast<unsigned __int128>(m));
    CHECK(dot(a, b).value == expected);
  }
}

TEST_CASE("observable vectors force a zero first coordinate") {
  CHECK_NOTHROW(observable_vector({0, 1, 2}, 5));
  CHECK_THROWS_AS(observable_vector({1, 0, 0}, 5), std::invalid_argument);
}

TEST_CASE("mat_mul basics") {
  UniUpperMatrix id(3, 5);
  CHECK(mat_mul(id, id) == id);

  // (I + E(1,2)) (I + E(2,3)) has (1,2)=(2,3)=(1,3)=1
  UniUpperMatrix a(3, 5), b(3, 5);
  a.set(1, 2, 1);
  b.set(2, 3, 1);
  const UniUpperMatrix c = mat_mul(a, b);
  CHECK(c.at(1, 2) == 1);
  CHECK(c.at(2, 3) == 1);
  CHECK(c.at(1, 3) == 1);

  CHECK_THROWS_AS(mat_mul(UniUpperMatrix(3, 5), UniUpperMatrix(4, 5)), std::invalid_argument);
  CHECK_THROWS_AS(mat_mul(UniUpperMatrix(3, 5), UniUpperMatrix(3, 7)), std::invalid_argument);
}

TEST_CASE("mat_inverse basics and nilpotent inverse") {
  UniUpperMatrix id(4, 6);
  CHECK(mat_inverse(id) == id);

  UniUpperMatrix a(3, 3);
  a.set(1, 2, 1);
  const UniUpperMatrix inv = mat_inverse(a);
  CHECK(inv.at(1, 2) == 2);  // -1 mod 3
  CHECK(mat_mul(a, inv) == id.identity(3, 3));
}

TEST_CASE("inverse round-trip over a seeded sample grid") {
  for (int n : {2, 3, 4, 6}) {
    for (i64 m : {2, 3, 7, 12}) {
      Rng rng(static_cast<std::uint64_t>(1000 * n + m));
      const UniUpperMatrix id = UniUpperMatrix::identity(n, m);
      for (int trial = 0; trial < 1000; ++trial) {
        const UniUpperMatrix x = random_unitriangular(n, m, rng);
        CHECK(mat_mul(x, mat_inverse(x)) == id);
        CHECK(mat_mul(mat_inverse(x), x) == id);
      }
    }
  }
}

TEST_CASE("group axioms on random triples") {
  Rng rng(0xabcdef);
  const int n = 4;
  const i64 m = 6;
  const UniUpperMatrix id = UniUpperMatrix::identity(n, m);
  for (int trial = 0; trial < 300; ++trial) {
    const UniUpperMatrix a = random_unitriangular(n, m, rng);
    const UniUpperMatrix b = random_unitriangular(n, m, rng);
    const UniUpperMatrix c = random_unitriangular(n, m, rng);
    CHECK(mat_mul(mat_mul(a, b), c) == mat_mul(a, mat_mul(b, c)));
    CHECK(mat_mul(a, id) == a);
    CHECK(mat_mul(id, a) == a);
  }
}

TEST_CASE("mat_mul agrees with the raw integer product oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const i64 m = 2 + static_cast<i64>(rng.below(30));
    const UniUpperMatrix a = random_unitriangular(n, m, rng);
    const UniUpperMatrix b = random_unitriangular(n, m, rng);
    const RawMat expected = raw_mul(raw_from(a), raw_from(b), m);
    const UniUpperMatrix c = mat_mul(a, b);
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) CHECK(c.at(i, j) == expected[i - 1][j - 1]);
  }
}

TEST_CASE("row_add basics") {
  UniUpperMatrix id(3, 3);

  UniUpperMatrix a = row_add(id, 2, 1);
  CHECK(a.at(1, 2) == 1);
  CHECK(a.at(1, 3) == 0);
  CHECK(a.at(2, 3) == 0);

  UniUpperMatrix b = row_add(id, 2, -1);
  CHECK(b.at(1, 2) == 2);  // -1 mod 3

  CHECK(row_add(row_add(id, 2, 1), 2, -1) == id);
  CHECK_THROWS_AS(row_add(id, 1, 1), std::out_of_range);
  CHECK_THROWS_AS(row_add(id, 4, 1), std::out_of_range);
}

TEST_CASE("row_add equals left multiplication by I + sign E(i-1,i)") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const i64 m = 2 + static_cast<i64>(rng.below(10));
    const UniUpperMatrix x = random_unitriangular(n, m, rng);
    const int i = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const int sign = rng.sign();
    UniUpperMatrix e(n, m);
    e.set(i - 1, i, mod_reduce(sign, m));
    CHECK(row_add(x, i, sign) == mat_mul(e, x));
  }
}

TEST_CASE("row_add is a permutation of the enumerated group, inverse to its opposite") {
  for (auto [n, m] : std::vector<std::pair<int, i64>>{{3, 3}, {3, 4}, {4, 2}}) {
    GroupTable table(n, m);
    for (int i = 2; i <= n; ++i) {
      std::vector<bool> hit(static_cast<std::size_t>(table.size), false);
      for (i64 g = 0; g < table.size; ++g) {
        const UniUpperMatrix x = table.element(g);
        const i64 img = table.index_of(row_add(x, i, 1));
        CHECK_FALSE(hit[static_cast<std::size_t>(img)]);
        hit[static_cast<std::size_t>(img)] = true;
        CHECK(table.index_of(row_add(row_add(x, i, 1), i, -1)) == g);
      }
    }
  }
}

TEST_CASE("group size formula by enumeration") {
  CHECK(GroupTable(2, 3).size == 3);
  CHECK(GroupTable(3, 3).size == 27);
  CHECK(GroupTable(4, 2).size == 64);

  // distinctness of the encoded elements
  GroupTable table(3, 4);
  std::set<std::vector<i64>> seen;
  for (i64 g = 0; g < table.size; ++g) {
    const UniUpperMatrix x = table.element(g);
    std::vector<i64> key;
    for (int i = 1; i <= 3; ++i)
      for (int j = i + 1; j <= 3; ++j) key.push_back(x.at(i, j));
    seen.insert(key);
    CHECK(table.index_of(x) == g);
  }
  CHECK(static_cast<i64>(seen.size()) == table.size);
}

TEST_CASE("elementary nilpotency: E(I-1,I) E(I-1,I) = 0 and E(I-1,I) Y E(I-1,I) = 0") {
  Rng rng(0x517);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(3));
    const i64 m = 2 + static_cast<i64>(rng.below(9));
    const int induced = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));

    const RawMat e = raw_elementary(n, induced - 1, induced);
    CHECK(raw_zero(raw_mul(e, e, m)));

    // random group element with zero [1, I-1] x [I, n] block
    UniUpperMatrix y = random_unitriangular(n, m, rng);
    for (int i = 1; i <= induced - 1; ++i)
      for (int j = induced; j <= n; ++j) y.set(i, j, 0);
    CHECK(raw_zero(raw_mul(raw_mul(e, raw_from(y), m), e, m)));
  }
}

TEST_CASE("elementary vector helpers") {
  ResidueVector v({0, 2, 3, 4}, 5);
  const ResidueVector ev = elementary_apply(2, 4, v);
  CHECK(ev.at(1) == 0);
  CHECK(ev.at(2) == 4);
  CHECK(ev.at(3) == 0);
  CHECK(ev.at(4) == 0);

  const ResidueVector uv = elementary_update(2, 4, -1, v);
  CHECK(uv.at(2) == mod_reduce(2 - 4, 5));
  CHECK(uv.at(4) == 4);
}

TEST_CASE("mat_vec matches direct evaluation") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const i64 m = 2 + static_cast<i64>(rng.below(20));
    const UniUpperMatrix a = random_unitriangular(n, m, rng);
    ResidueVector v(n, m);
    for (int i = 1; i <= n; ++i) v.set(i, static_cast<i64>(rng.below(static_cast<std::uint64_t>(m))));
    const ResidueVector got = mat_vec(a, v);
    for (int i = 1; i <= n; ++i) {
      i64 acc = 0;
      for (int j = 1; j <= n; ++j) acc = mod_reduce(acc + a.at(i, j) * v.at(j), m);
      CHECK(got.at(i) == acc);
    }
  }
}

TEST_CASE("dimension and modulus guards") {
  CHECK_THROWS_AS(UniUpperMatrix(1, 5), std::invalid_argument);
  CHECK_THROWS_AS(UniUpperMatrix(3, 1), std::invalid_argument);
  UniUpperMatrix a(3, 5);
  CHECK_THROWS_AS(a.set(2, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(a.set(3, 1, 2), std::invalid_argument);
}

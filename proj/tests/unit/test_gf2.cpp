#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ncdelay/gf2.hpp"
#include "oracle_util.hpp"

using namespace ncdelay;
using namespace ncdelay::gf2;

TEST_CASE("bitvector basics") {
  auto v = BitVector::from_string("1011");
  CHECK(v.size() == 4);
  CHECK(v.get(0));
  CHECK_FALSE(v.get(1));
  CHECK(v.popcount() == 3);
  CHECK(v.to_string() == "1011");
  v ^= BitVector::from_string("1011");
  CHECK_FALSE(v.any());
  CHECK_THROWS_AS(BitVector(0), std::invalid_argument);
  CHECK_THROWS_AS(v.get(4), std::out_of_range);
  CHECK_THROWS_AS(BitVector::from_string("10x"), std::invalid_argument);
}

TEST_CASE("bitvector xor across word boundary") {
  BitVector a(130), b(130);
  a.set(0, true);
  a.set(129, true);
  b.set(129, true);
  b.set(64, true);
  const auto c = a ^ b;
  CHECK(c.get(0));
  CHECK(c.get(64));
  CHECK_FALSE(c.get(129));
  CHECK(c.popcount() == 2);
}

TEST_CASE("rank of small matrices") {
  CHECK(rank(BitMatrix::identity(4)) == 4);
  CHECK(rank(BitMatrix(4, 4)) == 0);
  CHECK(rank(BitMatrix::from_strings({"11", "11"})) == 1);
  CHECK(rank(BitMatrix()) == 0);
}

TEST_CASE("rank agrees with naive elimination") {
  Rng rng(7);
  for (int t = 0; t < 300; ++t) {
    const std::size_t rows = 1 + uniform_below(rng, 70);
    const std::size_t cols = 1 + uniform_below(rng, 140);
    auto m = random_matrix(rows, cols, rng);
    // Sparse and duplicated rows stress pivots that share a word.
    if (t % 3 == 0 && rows > 2) m.add_row(0, 1);
    CHECK(rank(m) == testutil::naive_rank(m));
  }
}

TEST_CASE("eliminate_decode") {
  SUBCASE("two unknowns") {
    const auto m = BitMatrix::from_strings({"10", "11"});
    const auto a = BitVector::from_string("1100");
    const auto b = BitVector::from_string("0110");
    std::vector<BitVector> y{a, a ^ b};
    const auto res = eliminate_decode(m, y);
    REQUIRE(res.ok());
    CHECK(res.rank == 2);
    CHECK((*res.messages)[0] == a);
    CHECK((*res.messages)[1] == b);
  }
  SUBCASE("rank deficient") {
    const auto m = BitMatrix::from_strings({"11", "11", "11"});
    std::vector<BitVector> y(3, BitVector::from_string("1"));
    const auto res = eliminate_decode(m, y);
    CHECK_FALSE(res.ok());
    CHECK(res.rank == 1);
    CHECK(res.missing_pivots.size() == 1);
  }
  SUBCASE("dimension mismatch") {
    const auto m = BitMatrix::identity(2);
    std::vector<BitVector> y(1, BitVector::from_string("1"));
    CHECK_THROWS_AS(eliminate_decode(m, y), std::invalid_argument);
  }
  SUBCASE("random systems recover messages") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
      const std::size_t k = 1 + uniform_below(rng, 100);
      std::vector<BitVector> x;
      for (std::size_t i = 0; i < k; ++i) x.push_back(random_row(33, rng));
      auto m = random_matrix(k + 20, k, rng);
      std::vector<BitVector> y;
      for (std::size_t r = 0; r < m.rows(); ++r) {
        BitVector acc(33);
        for (std::size_t c = 0; c < k; ++c)
          if (m.get(r, c)) acc ^= x[c];
        y.push_back(acc);
      }
      const auto res = eliminate_decode(m, y);
      CHECK(res.rank == testutil::naive_rank(m));
      if (res.ok()) CHECK(*res.messages == x);
    }
  }
}

TEST_CASE("random_row") {
  SUBCASE("deterministic for equal seeds") {
    Rng a(42), b(42);
    for (int i = 0; i < 20; ++i) CHECK(random_row(100, a) == random_row(100, b));
  }
  SUBCASE("per-position frequency") {
    Rng rng(3);
    const int n = 100000;
    std::vector<int> ones(16);
    for (int i = 0; i < n; ++i) {
      const auto v = random_row(16, rng);
      for (std::size_t j = 0; j < 16; ++j) ones[j] += v.get(j);
    }
    // 5 sigma of Binomial(n, 1/2)
    for (int c : ones) CHECK(std::abs(c - n / 2) < 5 * 158);
  }
  SUBCASE("length one hits both values") {
    Rng rng(5);
    std::set<bool> seen;
    for (int i = 0; i < 64; ++i) seen.insert(random_row(1, rng).get(0));
    CHECK(seen.size() == 2);
  }
  SUBCASE("tail bits stay clear") {
    Rng rng(9);
    const auto v = random_row(70, rng);
    CHECK((v.words()[1] & ~tail_mask(70)) == 0);
  }
}

TEST_CASE("echelon basis tracks rank and span") {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const std::size_t cols = 1 + uniform_below(rng, 150);
    EchelonBasis basis(cols);
    BitMatrix seen(0, cols);
    for (std::size_t i = 0; i < cols + 5; ++i) {
      BitVector v = random_row(cols, rng);
      if (i % 4 == 3 && seen.rows() >= 2) {
        v = seen.row_vector(0) ^ seen.row_vector(seen.rows() - 1);
      }
      const bool before = basis.contains(v.words());
      const bool grew = basis.insert(v.words());
      CHECK(grew == !before);
      seen.append_row(v);
      CHECK(basis.rank() == testutil::naive_rank(seen));
      CHECK(basis.contains(v.words()));
    }
  }
}

TEST_CASE("echelon basis solves payloads") {
  Rng rng(17);
  const std::size_t k = 90;
  std::vector<BitVector> x;
  for (std::size_t i = 0; i < k; ++i) x.push_back(random_row(70, rng));
  EchelonBasis basis(k, 70);
  CHECK_THROWS(basis.solve());
  while (!basis.full()) {
    const auto g = random_row(k, rng);
    BitVector y(70);
    for (std::size_t c = 0; c < k; ++c)
      if (g.get(c)) y ^= x[c];
    basis.insert(g.words(), y.words());
  }
  CHECK(basis.solve() == x);
}

TEST_CASE("matrix helpers") {
  const auto m = BitMatrix::from_strings({"110", "011"});
  const auto t = m.transpose();
  CHECK(t.rows() == 3);
  CHECK(t.get(1, 0));
  CHECK(t.get(2, 1));
  const auto prod = m.multiply(t);  // 2 x 2
  CHECK(prod == BitMatrix::from_strings({"01", "10"}));
  std::vector<std::size_t> idx{1};
  CHECK(m.select_rows(idx) == BitMatrix::from_strings({"011"}));
  CHECK_THROWS_AS(m.get(2, 0), std::out_of_range);
  CHECK_THROWS(BitMatrix::from_strings({"10", "1"}));
}

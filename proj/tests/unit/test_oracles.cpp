#include <stdexcept>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ncdelay/oracles.hpp"
#include "oracle_util.hpp"

using namespace ncdelay;
using namespace ncdelay::oracles;
using gf2::BitMatrix;

TEST_CASE("exact rank tail") {
  CHECK(exact_rank_tail(2, 2) == Rational{5, 8});
  CHECK(exact_rank_tail(4, 2) == Rational{23, 128});
  CHECK(exact_rank_tail(3, 3) == Rational{43, 64});
  CHECK(exact_rank_tail(2, 2).value() == 0.625);
  CHECK(exact_rank_tail(3, 3).value() == 0.671875);
  CHECK(exact_rank_tail(1, 1) == Rational{1, 2});
  for (std::size_t k = 1; k <= 20; ++k) {
    for (std::size_t n = k; n * k <= 20; ++n) {
      const auto t = exact_rank_tail(n, k);
      CHECK(t.value() == doctest::Approx(closed_form_rank_tail(n, k)).epsilon(1e-12));
      CHECK(t.value() <= std::ldexp(1.0, -static_cast<int>(n - k)));
    }
  }
  CHECK_THROWS_AS(exact_rank_tail(7, 3), std::invalid_argument);
  CHECK_THROWS_AS(exact_rank_tail(0, 3), std::invalid_argument);
}

TEST_CASE("closed-form tail by an independent product") {
  double prod = 1.0;
  for (int i = 1; i <= 64; ++i) prod *= 1.0 - std::ldexp(1.0, -i);
  CHECK(closed_form_rank_tail(64, 64) == doctest::Approx(1.0 - prod));
  CHECK(1.0 - prod == doctest::Approx(0.7112).epsilon(1e-3));
}

TEST_CASE("monte carlo rank tail") {
  Rng rng(21);
  const auto small = mc_rank_tail(4, 2, 20000, rng, 0.999);
  CHECK(small.ci.lo <= 46.0 / 256);
  CHECK(small.ci.hi >= 46.0 / 256);
  const auto square = mc_rank_tail(64, 64, 20000, rng, 0.999);
  CHECK(square.ci.lo <= closed_form_rank_tail(64, 64));
  CHECK(square.ci.hi >= closed_form_rank_tail(64, 64));
  CHECK_THROWS_AS(mc_rank_tail(4, 2, 0, rng), std::invalid_argument);
}

TEST_CASE("rblt construction") {
  Rng rng(22);
  RbltParams one;
  one.w_star = 1;
  one.r_star = 6;
  one.r_l = {4};
  const auto m1 = build_rblt(one, rng);
  CHECK(m1.rows() == 6);
  CHECK(m1.cols() == 4);

  RbltParams p;
  p.w_star = 3;
  p.r_star = 4;
  p.r_l = {3, 2, 4};
  p.filler = Filler::zero;
  const auto z = build_rblt(p, rng);
  CHECK(z.rows() == 12);
  CHECK(z.cols() == 9);
  // Blocks right of the diagonal are empty; columns of block j start at offset(j).
  const std::vector<std::size_t> off{0, 3, 5, 9};
  for (std::size_t bi = 0; bi < 3; ++bi)
    for (std::size_t bj = bi + 1; bj < 3; ++bj)
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = off[bj]; c < off[bj + 1]; ++c) CHECK_FALSE(z.get(bi * 4 + r, c));

  p.filler = Filler::copied_rows;
  const auto cp = build_rblt(p, rng);
  for (std::size_t bi = 0; bi < 3; ++bi)
    for (std::size_t bj = bi + 1; bj < 3; ++bj)
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = off[bj]; c < off[bj + 1]; ++c) CHECK(cp.get(bi * 4 + r, c) == cp.get(bj * 4 + r, c));

  RbltParams bad = p;
  bad.r_l = {5, 2, 4};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.r_l = {1, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  RbltParams hbad = p;
  hbad.orientation = Orientation::horizontal;
  CHECK_THROWS_AS(hbad.validate(), std::invalid_argument);
}

TEST_CASE("rblt closed form") {
  RbltParams p;
  p.w_star = 1;
  p.r_star = 10;
  p.r_l = {8};
  const auto b = rblt_tail_bound(p, 5);
  CHECK(b.n_star == 8);
  CHECK(b.u_star == 1);
  CHECK(b.value == doctest::Approx((1 - 1.0 / 256) * std::exp2(-7)));
  CHECK(b.value == doctest::Approx(0.00778).epsilon(1e-3));
  CHECK_FALSE(b.vacuous);
  CHECK_THROWS_AS(rblt_tail_bound(p, 8), std::invalid_argument);

  RbltParams v;
  v.w_star = 3;
  v.r_star = 5;
  v.r_l = {5, 3, 4};
  double prev = 1e300;
  for (std::size_t g = 0; g < 12; ++g) {
    const auto bg = rblt_tail_bound(v, g);
    CHECK(bg.value < prev);
    prev = bg.value;
    CHECK(bg.vacuous == (bg.value > 1.0));
  }

  // Square blocks: both orientations reduce to the same expression.
  RbltParams sq;
  sq.w_star = 3;
  sq.r_star = 4;
  sq.r_l = {4, 4, 4};
  RbltParams hq = sq;
  hq.orientation = Orientation::horizontal;
  for (std::size_t g = 0; g < 12; ++g) CHECK(rblt_tail_bound(sq, g).value == doctest::Approx(rblt_tail_bound(hq, g).value));

  // Horizontal, hand evaluated: n*=6, u*=ceil(4/3)=2, exponent -2+6-2*4+(4-3)*1 = -3.
  RbltParams h;
  h.w_star = 2;
  h.r_star = 3;
  h.r_l = {4, 5};
  h.orientation = Orientation::horizontal;
  const auto hb = rblt_tail_bound(h, 2);
  CHECK(hb.u_star == 2);
  CHECK(hb.value == doctest::Approx(2 * (1 - 1.0 / 8) * std::exp2(-3)));
}

TEST_CASE("rblt monte carlo respects the bound") {
  Rng rng(23);
  for (auto filler : {Filler::zero, Filler::independent_random, Filler::copied_rows}) {
    RbltParams p;
    p.w_star = 2;
    p.r_star = 6;
    p.r_l = {5, 4};
    p.filler = filler;
    for (std::size_t g = 0; g < 9; g += 2) {
      const auto e = mc_rblt_tail(p, g, 4000, rng, 0.999);
      CHECK(e.fraction <= rblt_tail_bound(p, g).value + (e.ci.hi - e.ci.lo));
    }
  }
  RbltParams single;
  single.w_star = 1;
  single.r_star = 8;
  single.r_l = {6};
  const auto a = mc_rblt_tail(single, 0, 20000, rng, 0.999);
  const double exact = closed_form_rank_tail(8, 6);
  CHECK(a.ci.lo <= exact);
  CHECK(a.ci.hi >= exact);
}

TEST_CASE("square vertical blocks are no worse than dense") {
  Rng rng(24);
  RbltParams p;
  p.w_star = 3;
  p.r_star = 4;
  p.r_l = {4, 4, 4};
  p.filler = Filler::independent_random;
  for (std::size_t g = 0; g < 4; ++g) {
    const auto e = mc_rblt_tail(p, g, 20000, rng, 0.999);
    double dense = 0.0;
    {
      std::size_t hits = 0;
      for (int t = 0; t < 20000; ++t) hits += gf2::rank(gf2::random_matrix(12, 12, rng)) < 12 - g;
      dense = hits / 20000.0;
    }
    const auto de = stats::wilson(static_cast<std::size_t>(dense * 20000 + 0.5), 20000, 0.999);
    CHECK(e.ci.lo <= de.hi);
  }
}

TEST_CASE("density transfer") {
  Rng rng(25);
  const auto id = density_transfer_check(BitMatrix::identity(3), 2, 3, 0, rng);
  CHECK(id.pass);
  CHECK(id.exhaustive);
  CHECK(id.outcomes == 64);

  const auto twin = density_transfer_check(BitMatrix::from_strings({"1010", "1010"}), 3, 1, 0, rng);
  CHECK(twin.pass);
  CHECK(twin.outcomes == 8);

  const auto r2 = density_transfer_check(BitMatrix::from_strings({"101", "011", "110"}), 2, 2, 0, rng);
  CHECK(r2.pass);
  CHECK(r2.outcomes == 16);
  for (auto c : r2.counts) CHECK(c == r2.counts.front());

  const auto mc = density_transfer_check(4, 8, 3, 50000, rng);
  CHECK_FALSE(mc.exhaustive);
  CHECK(mc.pass);
  CHECK(mc.chi_square <= mc.critical);

  CHECK_THROWS_AS(density_transfer_check(BitMatrix::from_strings({"11", "11"}), 2, 2, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(density_transfer_check(13, 4, 1, 10, rng), std::invalid_argument);
}

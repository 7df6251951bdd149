#include "ncdelay/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ncdelay::oracles {

using gf2::BitMatrix;
using gf2::Word;

namespace {

// Rank of up to 64 rows of at most 64 bits each.
std::size_t small_rank(const std::uint64_t* rows, std::size_t n) {
  std::uint64_t basis[64] = {};
  std::size_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v = rows[i];
    while (v != 0) {
      const int b = 63 - std::countl_zero(v);
      if (basis[b] == 0) {
        basis[b] = v;
        ++r;
        break;
      }
      v ^= basis[b];
    }
  }
  return r;
}

McEstimate finish(std::size_t hits, std::size_t trials, double confidence) {
  McEstimate e;
  e.hits = hits;
  e.trials = trials;
  e.fraction = static_cast<double>(hits) / static_cast<double>(trials);
  e.ci = stats::wilson(hits, trials, confidence);
  return e;
}

}  // namespace

Rational exact_rank_tail(std::size_t n, std::size_t k) {
  if (n == 0 || k == 0 || n * k > 20) {
    throw std::invalid_argument("exact_rank_tail: need 1 <= n*k <= 20, got n=" + std::to_string(n) +
                                ", k=" + std::to_string(k));
  }
  const std::uint64_t total = std::uint64_t{1} << (n * k);
  const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  std::uint64_t deficient = 0;
  std::uint64_t rows[20];
  for (std::uint64_t x = 0; x < total; ++x) {
    for (std::size_t i = 0; i < n; ++i) rows[i] = (x >> (i * k)) & mask;
    if (small_rank(rows, n) < k) ++deficient;
  }
  const std::uint64_t g = std::gcd(deficient, total);
  return {deficient / g, total / g};
}

double closed_form_rank_tail(std::size_t n, std::size_t k) {
  if (k > n) return 1.0;
  double full = 1.0;
  for (std::size_t i = 0; i < k; ++i) full *= 1.0 - std::ldexp(1.0, static_cast<int>(i) - static_cast<int>(n));
  return 1.0 - full;
}

McEstimate mc_rank_tail(std::size_t n, std::size_t k, std::size_t trials, Rng& rng, double confidence) {
  if (trials == 0) throw std::invalid_argument("mc_rank_tail: trials must be positive");
  if (k == 0) throw std::invalid_argument("mc_rank_tail: k must be positive");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    if (gf2::rank(gf2::random_matrix(n, k, rng)) < k) ++hits;
  }
  return finish(hits, trials, confidence);
}

// ---------------------------------------------------------------- RBLT

std::size_t RbltParams::cols() const noexcept { return std::accumulate(r_l.begin(), r_l.end(), std::size_t{0}); }

void RbltParams::validate() const {
  if (w_star == 0 || r_star == 0) throw std::invalid_argument("rblt: w_star and r_star must be positive");
  if (r_l.size() != w_star) throw std::invalid_argument("rblt: r_l must have w_star entries");
  for (std::size_t l = 0; l < r_l.size(); ++l) {
    const bool ok = orientation == Orientation::vertical ? r_l[l] <= r_star : r_l[l] >= r_star;
    if (!ok) {
      throw std::invalid_argument("rblt: r_l[" + std::to_string(l) + "] = " + std::to_string(r_l[l]) +
                                  (orientation == Orientation::vertical ? " exceeds" : " is below") +
                                  " r_star = " + std::to_string(r_star));
    }
  }
  if (cols() == 0) throw std::invalid_argument("rblt: no columns");
}

BitMatrix build_rblt(const RbltParams& params, Rng& rng) {
  params.validate();
  const std::size_t rs = params.r_star;
  BitMatrix t(params.rows(), params.cols());
  std::vector<std::size_t> offset(params.w_star + 1, 0);
  for (std::size_t l = 0; l < params.w_star; ++l) offset[l + 1] = offset[l] + params.r_l[l];

  for (std::size_t bi = 0; bi < params.w_star; ++bi) {
    for (std::size_t bj = 0; bj <= bi; ++bj) {
      for (std::size_t r = 0; r < rs; ++r) {
        for (std::size_t c = offset[bj]; c < offset[bj + 1]; ++c) {
          t.set(bi * rs + r, c, (rng() >> 63) != 0);
        }
      }
    }
  }
  if (params.filler == Filler::zero) return t;
  for (std::size_t bi = 0; bi < params.w_star; ++bi) {
    for (std::size_t bj = bi + 1; bj < params.w_star; ++bj) {
      for (std::size_t r = 0; r < rs; ++r) {
        for (std::size_t c = offset[bj]; c < offset[bj + 1]; ++c) {
          const bool bit = params.filler == Filler::independent_random ? (rng() >> 63) != 0
                                                                       : t.get(bj * rs + r, c);
          t.set(bi * rs + r, c, bit);
        }
      }
    }
  }
  return t;
}

RbltBound rblt_tail_bound(const RbltParams& params, std::size_t gamma) {
  params.validate();
  RbltBound b;
  b.gamma = gamma;
  b.r_min = *std::min_element(params.r_l.begin(), params.r_l.end());
  b.r_max = *std::max_element(params.r_l.begin(), params.r_l.end());
  const auto rs = static_cast<double>(params.r_star);
  const auto w = static_cast<double>(params.w_star);
  const auto g = static_cast<double>(gamma);
  const auto rmin = static_cast<double>(b.r_min);
  if (params.orientation == Orientation::vertical) {
    b.n_star = params.cols();
  } else {
    b.n_star = params.w_star * params.r_star;
  }
  if (gamma >= b.n_star) {
    throw std::invalid_argument("rblt_tail_bound: gamma = " + std::to_string(gamma) + " must be below n_star = " +
                                std::to_string(b.n_star));
  }
  const auto n = static_cast<double>(b.n_star);
  if (params.orientation == Orientation::vertical) {
    if (b.r_min == 0) throw std::invalid_argument("rblt_tail_bound: vertical bound needs r_min >= 1");
    b.u_star = (b.n_star - gamma + b.r_min - 1) / b.r_min;
    const double u = static_cast<double>(b.u_star);
    b.value = u * (1.0 - std::ldexp(1.0, -static_cast<int>(b.r_max))) *
              std::exp2(-g + n - w * rs + (rs - rmin) * (u - 1.0));
  } else {
    b.u_star = (b.n_star - gamma + params.r_star - 1) / params.r_star;
    const double u = static_cast<double>(b.u_star);
    b.value = u * (1.0 - std::exp2(-rs)) * std::exp2(-g + n - w * rmin + (rmin - rs) * (u - 1.0));
  }
  b.vacuous = b.value > 1.0;
  return b;
}

McEstimate mc_rblt_tail(const RbltParams& params, std::size_t gamma, std::size_t trials, Rng& rng,
                        double confidence) {
  if (trials == 0) throw std::invalid_argument("mc_rblt_tail: trials must be positive");
  params.validate();
  const std::size_t n_star =
      params.orientation == Orientation::vertical ? params.cols() : params.w_star * params.r_star;
  if (gamma >= n_star) throw std::invalid_argument("mc_rblt_tail: gamma must be below n_star");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    if (gf2::rank(build_rblt(params, rng)) < n_star - gamma) ++hits;
  }
  return finish(hits, trials, confidence);
}

// ---------------------------------------------------------------- density transfer

DensityReport density_transfer_check(const BitMatrix& t, std::size_t cols_q, std::size_t gamma,
                                     std::size_t trials, Rng& rng, double alpha) {
  if (t.rows() == 0 || t.cols() == 0 || cols_q == 0) throw std::invalid_argument("density_transfer_check: empty dimension");
  if (t.rows() > 12 || t.cols() > 12 || cols_q > 12) {
    throw std::invalid_argument("density_transfer_check: dimensions are capped at 12");
  }
  DensityReport rep;
  rep.gamma = gamma;
  gf2::EchelonBasis basis(t.cols());
  for (std::size_t r = 0; r < t.rows() && rep.rows.size() < gamma; ++r) {
    if (basis.insert(t.row(r))) rep.rows.push_back(r);
  }
  if (rep.rows.size() < gamma) throw std::invalid_argument("density_transfer_check: gamma exceeds rank(T)");
  if (gamma * cols_q > 16) throw std::invalid_argument("density_transfer_check: more than 2^16 joint outcomes");
  rep.outcomes = std::size_t{1} << (gamma * cols_q);
  rep.counts.assign(rep.outcomes, 0);

  std::vector<std::uint64_t> sel;
  for (auto r : rep.rows) sel.push_back(t.row(r)[0]);
  const std::size_t n_q = t.cols();
  const std::uint64_t qmask = (std::uint64_t{1} << cols_q) - 1;
  std::vector<std::uint64_t> q(n_q);

  auto tally = [&] {
    std::uint64_t outcome = 0;
    for (std::size_t s = 0; s < sel.size(); ++s) {
      std::uint64_t acc = 0;
      for (std::uint64_t bits = sel[s]; bits != 0; bits &= bits - 1) acc ^= q[std::countr_zero(bits)];
      outcome |= acc << (s * cols_q);
    }
    ++rep.counts[outcome];
  };

  rep.exhaustive = n_q * cols_q <= 20;
  if (rep.exhaustive) {
    const std::uint64_t total = std::uint64_t{1} << (n_q * cols_q);
    for (std::uint64_t x = 0; x < total; ++x) {
      for (std::size_t i = 0; i < n_q; ++i) q[i] = (x >> (i * cols_q)) & qmask;
      tally();
    }
    rep.samples = total;
    rep.pass = std::all_of(rep.counts.begin(), rep.counts.end(), [&](std::uint64_t c) { return c == rep.counts[0]; });
    return rep;
  }

  if (trials == 0) throw std::invalid_argument("density_transfer_check: trials must be positive");
  for (std::size_t i = 0; i < trials; ++i) {
    for (auto& row : q) row = rng() & qmask;
    tally();
  }
  rep.samples = trials;
  const double expected = static_cast<double>(trials) / static_cast<double>(rep.outcomes);
  for (auto c : rep.counts) {
    const double d = static_cast<double>(c) - expected;
    rep.chi_square += d * d / expected;
  }
  rep.critical = rep.outcomes > 1 ? stats::chi_square_critical(static_cast<double>(rep.outcomes - 1), alpha) : 0.0;
  rep.pass = rep.outcomes == 1 || rep.chi_square <= rep.critical;
  return rep;
}

DensityReport density_transfer_check(std::size_t rows_t, std::size_t cols_t, std::size_t cols_q,
                                     std::size_t trials, Rng& rng, double alpha) {
  if (rows_t == 0 || cols_t == 0 || rows_t > 12 || cols_t > 12) {
    throw std::invalid_argument("density_transfer_check: dimensions must lie in [1, 12]");
  }
  const BitMatrix t = gf2::random_matrix(rows_t, cols_t, rng);
  return density_transfer_check(t, cols_q, gf2::rank(t), trials, rng, alpha);
}

}  // namespace ncdelay::oracles

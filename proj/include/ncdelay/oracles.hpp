#pragma once

// Small-instance checks of the rank and density lemmas: exhaustive where the
// instance space fits in 2^20, Monte Carlo with Wilson intervals otherwise.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ncdelay/gf2.hpp"
#include "ncdelay/rng.hpp"
#include "ncdelay/stats.hpp"

namespace ncdelay::oracles {

/// Exhaustive budget, in enumerated matrices.
inline constexpr std::uint64_t kExhaustiveLimit = std::uint64_t{1} << 20;

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct McEstimate {
  std::size_t hits = 0;
  std::size_t trials = 0;
  double fraction = 0.0;
  stats::Interval ci;
};

/// Exact Pr{rank < k} over uniform n x k matrices, reduced to lowest terms.
/// Throws std::invalid_argument unless 1 <= n*k <= 20.
Rational exact_rank_tail(std::size_t n, std::size_t k);

/// 1 - prod_{i=0}^{k-1} (1 - 2^{i-n}), the closed-form rank deficiency
/// probability of a uniform n x k matrix (n >= k).
double closed_form_rank_tail(std::size_t n, std::size_t k);

/// Throws std::invalid_argument if trials == 0.
McEstimate mc_rank_tail(std::size_t n, std::size_t k, std::size_t trials, Rng& rng, double confidence = 0.95);

enum class Orientation { vertical, horizontal };

/// Rule for the blocks above the block diagonal.
enum class Filler {
  zero,
  independent_random,
  copied_rows,  // row t of block (i, j), j > i, repeats row t of dense block (j, j)
};

struct RbltParams {
  std::size_t w_star = 1;
  std::size_t r_star = 1;
  std::vector<std::size_t> r_l;  // block column widths, one per block
  Orientation orientation = Orientation::vertical;
  Filler filler = Filler::independent_random;

  std::size_t rows() const noexcept { return w_star * r_star; }
  std::size_t cols() const noexcept;
  /// Throws std::invalid_argument on a length mismatch or a width that breaks
  /// the orientation's ordering against r_star.
  void validate() const;
};

/// w_star * r_star rows, sum(r_l) columns; block (i, j) with j <= i holds
/// i.i.d. uniform bits, the rest follows the filler rule.
gf2::BitMatrix build_rblt(const RbltParams& params, Rng& rng);

struct RbltBound {
  std::size_t n_star = 0;
  std::size_t u_star = 0;
  std::size_t r_min = 0;
  std::size_t r_max = 0;
  std::size_t gamma = 0;
  double value = 0.0;
  bool vacuous = false;  // value > 1
};

/// Closed-form bound on Pr{rank(T) < n_star - gamma}.
/// Throws std::invalid_argument if gamma >= n_star or params are invalid.
RbltBound rblt_tail_bound(const RbltParams& params, std::size_t gamma);

/// Empirical Pr{rank(T) < n_star - gamma} over freshly built matrices.
McEstimate mc_rblt_tail(const RbltParams& params, std::size_t gamma, std::size_t trials, Rng& rng,
                        double confidence = 0.95);

struct DensityReport {
  bool pass = false;
  bool exhaustive = false;
  std::size_t gamma = 0;             // selected independent rows of T
  std::vector<std::size_t> rows;     // their indices
  std::size_t outcomes = 0;          // 2^(gamma * cols_q)
  std::uint64_t samples = 0;
  std::vector<std::uint64_t> counts;  // per joint outcome
  double chi_square = 0.0;
  double critical = 0.0;
};

/// Checks that the rows of T Q picked out by `gamma` linearly independent rows
/// of T are jointly uniform when Q (T.cols() x cols_q) is uniform. Enumerates
/// every Q when T.cols() * cols_q <= 20 and requires exact equifrequency;
/// otherwise samples `trials` matrices and applies a chi-square test at level
/// `alpha`. Throws std::invalid_argument if a dimension exceeds 12, gamma
/// exceeds rank(T), or there are more than 2^16 joint outcomes.
DensityReport density_transfer_check(const gf2::BitMatrix& t, std::size_t cols_q, std::size_t gamma,
                                     std::size_t trials, Rng& rng, double alpha = 1e-3);

/// Same check for a uniformly drawn rows_t x cols_t matrix T and gamma = rank(T).
DensityReport density_transfer_check(std::size_t rows_t, std::size_t cols_t, std::size_t cols_q,
                                     std::size_t trials, Rng& rng, double alpha = 1e-3);

}  // namespace ncdelay::oracles

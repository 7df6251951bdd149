#pragma once

// Sample summaries and binomial confidence intervals.

#include <cstddef>
#include <span>
#include <vector>

namespace ncdelay::stats {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Two-sided Wilson score interval for `successes` out of `n`.
/// Throws std::invalid_argument if n == 0, successes > n or confidence
/// outside (0, 1).
Interval wilson(std::size_t successes, std::size_t n, double confidence = 0.95);

struct Proportion {
  std::size_t count = 0;
  std::size_t n = 0;
  double fraction = 0.0;
  Interval ci;
};

/// Share of samples strictly greater than `threshold`, with a Wilson interval.
/// Throws std::invalid_argument on an empty sample.
Proportion exceed_fraction(std::span<const double> samples, double threshold, double confidence = 0.95);

double mean(std::span<const double> xs);

/// Nearest-rank quantile of an unsorted sample, prob in [0, 1].
double quantile(std::span<const double> xs, double prob);

/// Nearest-rank quantile of an already sorted sample.
double sorted_quantile(std::span<const double> sorted, double prob);

/// Upper critical value of a chi-square law with `dof` degrees of freedom.
double chi_square_critical(double dof, double alpha);

}  // namespace ncdelay::stats

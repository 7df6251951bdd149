#include "ncdelay/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace ncdelay::stats {

Interval wilson(std::size_t successes, std::size_t n, double confidence) {
  if (n == 0) throw std::invalid_argument("wilson: no samples");
  if (successes > n) throw std::invalid_argument("wilson: successes exceed samples");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("wilson: confidence must lie in (0, 1)");
  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 0.5 + confidence / 2.0);
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  if (successes == 0) ci.lo = 0.0;
  if (successes == n) ci.hi = 1.0;
  return ci;
}

Proportion exceed_fraction(std::span<const double> samples, double threshold, double confidence) {
  if (samples.empty()) throw std::invalid_argument("failure_fraction: empty sample");
  Proportion out;
  out.n = samples.size();
  out.count = static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [threshold](double x) { return x > threshold; }));
  out.fraction = static_cast<double>(out.count) / static_cast<double>(out.n);
  out.ci = wilson(out.count, out.n, confidence);
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sorted_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile: prob must lie in [0, 1]");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(prob * n));
  if (rank == 0) rank = 1;
  return sorted[std::min(rank, sorted.size()) - 1];
}

double quantile(std::span<const double> xs, double prob) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return sorted_quantile(v, prob);
}

double chi_square_critical(double dof, double alpha) {
  const boost::math::chi_squared_distribution<double> chi(dof);
  return boost::math::quantile(boost::math::complement(chi, alpha));
}

}  // namespace ncdelay::stats

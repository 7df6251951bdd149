#pragma once

// Closed-form coding-delay upper bounds and the partition quantities behind them.
//
// Every (1+o(1)) factor is evaluated as 1 and every asymptotic side condition
// is instantiated as a finite inequality with a configurable implied constant.
// Logarithms are base 2 except inside the Chernoff slack.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ncdelay::bounds {

enum class Regime {
  dense_delay,
  dense_avg,
  dense_delay_unequal,
  dense_avg_unequal,
  cc_delay,
  cc_avg,
  cc_delay_unequal,
  cc_avg_unequal,
  ccp_delay,
  ccp_avg,
  ccp_delay_unequal,
  ccp_avg_unequal,
};

std::string_view to_string(Regime r) noexcept;
/// Throws std::invalid_argument on an unknown name.
Regime parse_regime(std::string_view name);
const std::vector<Regime>& all_regimes();

bool is_dense(Regime r) noexcept;
bool is_cc(Regime r) noexcept;
bool is_ccp(Regime r) noexcept;
bool is_unequal(Regime r) noexcept;
bool is_average(Regime r) noexcept;

/// Growth function f(k) of the unequal-average regimes.
enum class Growth { log2_k, log2_log2_k, sqrt_k };
double growth(Growth g, double k);

struct BoundQuery {
  Regime regime = Regime::dense_delay;
  double k = 0;
  double L = 1;
  double q = 1;
  double epsilon = 0.05;
  double p = 1.0;
  std::optional<double> gamma_e;  // required by the unequal regimes
  double gamma_a = 0.25;
  double gamma_b = 0.08;
  double gamma_c = 0.2;
  Growth f_k = Growth::log2_k;
  /// Implied constant of every Omega/o side condition.
  double implied_constant = 1.0;

  double delta() const;  // min(gamma_e / p, 1)
  double alpha() const noexcept { return k / q; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct PartitionPlan {
  double w = 0;      // partition count
  double w_T = 0;    // active partitions, L(w - L + 1)
  double phi = 0;    // expected packets per partition (per chunk)
  double gamma_star = 0;
  double r = 0;      // per-partition packet floor
  bool vacuous = false;  // gamma_star >= 1
  bool degenerate = false;  // the w formula fell below 1
};

struct BoundValue {
  double value = 0;
  std::optional<double> w_used;
  bool constraints_ok = true;
  std::vector<std::string> violations;
  bool asymptotic_note = true;
};

struct ChernoffSlack {
  double gamma_star = 0;
  double r = 0;
  bool vacuous = false;
};

/// gamma* = sqrt((2/phi) ln(2 w_T / eps)) and r = floor((1 - gamma*) phi);
/// gamma* >= 1 is reported vacuous with r = 0.
ChernoffSlack gamma_star(double phi, double w_T, double epsilon);

/// Unclamped, unrounded partition count of the regime.
double w_formula(const BoundQuery& q);

/// w = max(L, round(w_formula)) and the quantities derived from it, with
/// N_T = k / p as the reference horizon.
PartitionPlan partition_plan(const BoundQuery& q);

double active_partitions(double w, double L);

/// Dense and chunked regimes. Throws std::invalid_argument for a CCP regime
/// or a missing gamma_e.
BoundValue delay_bound(const BoundQuery& q);

/// Precoded regimes. Throws std::invalid_argument for other regimes or
/// constants outside [0, 1).
BoundValue ccp_bound(const BoundQuery& q);

/// Dispatches to delay_bound or ccp_bound.
BoundValue evaluate(const BoundQuery& q);

/// Smallest chunk size the regime's Omega conditions admit (CCP only).
double ccp_alpha_threshold(const BoundQuery& q);

}  // namespace ncdelay::bounds

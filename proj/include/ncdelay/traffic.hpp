#pragma once

// Per-link transmission opportunities and Bernoulli losses.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ncdelay/rng.hpp"

namespace ncdelay::traffic {

enum class ScheduleKind { regular, poisson };

struct TrafficSpec {
  ScheduleKind kind = ScheduleKind::regular;
  std::vector<double> p;       // per-link success probabilities in (0, 1]
  std::vector<double> lambda;  // per-link Poisson rates in (0, 1]; poisson only

  std::size_t links() const noexcept { return p.size(); }
  void validate() const;

  static TrafficSpec regular(std::vector<double> p);
  static TrafficSpec poisson(std::vector<double> lambda, std::vector<double> p);
};

struct LinkEvent {
  std::size_t link = 1;  // 1-based, link i joins v_{i-1} and v_i
  double time = 0.0;
  bool success = false;
};

/// events[i] holds the sorted events of link i + 1.
using Schedule = std::vector<std::vector<LinkEvent>>;

/// Lazily generated opportunity times of one link: 1, 2, 3, ... for regular
/// traffic, cumulative exponential gaps for Poisson traffic.
class OpportunityStream {
 public:
  OpportunityStream(ScheduleKind kind, double rate, Rng rng);
  double next();

 private:
  ScheduleKind kind_;
  double rate_;
  double t_ = 0.0;
  Rng rng_;
};

/// Streams used by both the materialized schedule and the simulator, so the
/// two agree event for event.
Rng opportunity_rng(std::uint64_t seed, std::size_t link);
Rng loss_rng(std::uint64_t seed, std::size_t link);
OpportunityStream opportunity_stream(const TrafficSpec& spec, std::uint64_t seed, std::size_t link);

/// Opportunities in (0, horizon] for every link, success flags unset.
/// Throws std::invalid_argument if horizon <= 0.
Schedule build_schedule(const TrafficSpec& spec, double horizon, std::uint64_t seed);

/// Draws each opportunity's success independently with its link's p_i.
/// Throws std::invalid_argument on a probability outside (0, 1] or a link
/// count mismatch.
void apply_losses(Schedule& schedule, std::span<const double> p, std::uint64_t seed);

struct EquivalentParams {
  double p = 1.0;                  // min p_i, or min lambda_i p_i for Poisson
  std::optional<double> gamma_e;   // min |param_i - param_{i-1}|; absent when L = 1
  bool unequal = false;            // all per-link parameters pairwise distinct
};

EquivalentParams equivalent_min_param(const TrafficSpec& spec);

/// Per-link equivalent parameters p_i or lambda_i p_i.
std::vector<double> equivalent_params(const TrafficSpec& spec);

}  // namespace ncdelay::traffic

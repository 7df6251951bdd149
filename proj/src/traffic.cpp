#include "ncdelay/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ncdelay::traffic {

namespace {

void check_probability(double v, const char* what, std::size_t i) {
  if (!(v > 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + "[" + std::to_string(i) + "] = " +
                                std::to_string(v) + " lies outside (0, 1]");
  }
}

}  // namespace

void TrafficSpec::validate() const {
  if (p.empty()) throw std::invalid_argument("traffic: at least one link is required");
  for (std::size_t i = 0; i < p.size(); ++i) check_probability(p[i], "traffic.p", i);
  if (kind == ScheduleKind::poisson) {
    if (lambda.size() != p.size()) {
      throw std::invalid_argument("traffic.lambda must have one rate per link");
    }
    for (std::size_t i = 0; i < lambda.size(); ++i) check_probability(lambda[i], "traffic.lambda", i);
  } else if (!lambda.empty() && lambda.size() != p.size()) {
    throw std::invalid_argument("traffic.lambda must have one rate per link");
  }
}

TrafficSpec TrafficSpec::regular(std::vector<double> p) {
  return {ScheduleKind::regular, std::move(p), {}};
}

TrafficSpec TrafficSpec::poisson(std::vector<double> lambda, std::vector<double> p) {
  return {ScheduleKind::poisson, std::move(p), std::move(lambda)};
}

OpportunityStream::OpportunityStream(ScheduleKind kind, double rate, Rng rng)
    : kind_(kind), rate_(rate), rng_(std::move(rng)) {}

double OpportunityStream::next() {
  if (kind_ == ScheduleKind::regular) {
    t_ += 1.0;
  } else {
    t_ += exponential(rng_, rate_);
  }
  return t_;
}

Rng opportunity_rng(std::uint64_t seed, std::size_t link) {
  return make_stream(seed, StreamTag::opportunity, link);
}

Rng loss_rng(std::uint64_t seed, std::size_t link) {
  return make_stream(seed, StreamTag::loss, link);
}

OpportunityStream opportunity_stream(const TrafficSpec& spec, std::uint64_t seed, std::size_t link) {
  const double rate = spec.kind == ScheduleKind::poisson ? spec.lambda.at(link - 1) : 1.0;
  return {spec.kind, rate, opportunity_rng(seed, link)};
}

Schedule build_schedule(const TrafficSpec& spec, double horizon, std::uint64_t seed) {
  spec.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("build_schedule: horizon must be positive");
  Schedule out(spec.links());
  for (std::size_t i = 1; i <= spec.links(); ++i) {
    auto stream = opportunity_stream(spec, seed, i);
    auto& events = out[i - 1];
    if (spec.kind == ScheduleKind::regular) events.reserve(static_cast<std::size_t>(std::floor(horizon)));
    for (double t = stream.next(); t <= horizon; t = stream.next()) events.push_back({i, t, false});
  }
  return out;
}

void apply_losses(Schedule& schedule, std::span<const double> p, std::uint64_t seed) {
  if (p.size() != schedule.size()) throw std::invalid_argument("apply_losses: link count mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) check_probability(p[i], "p", i);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    auto rng = loss_rng(seed, i + 1);
    for (auto& e : schedule[i]) e.success = bernoulli(rng, p[i]);
  }
}

std::vector<double> equivalent_params(const TrafficSpec& spec) {
  std::vector<double> eq = spec.p;
  if (spec.kind == ScheduleKind::poisson) {
    for (std::size_t i = 0; i < eq.size(); ++i) eq[i] *= spec.lambda.at(i);
  }
  return eq;
}

EquivalentParams equivalent_min_param(const TrafficSpec& spec) {
  spec.validate();
  const auto eq = equivalent_params(spec);
  EquivalentParams out;
  out.p = *std::min_element(eq.begin(), eq.end());
  if (eq.size() > 1) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < eq.size(); ++i) gap = std::min(gap, std::abs(eq[i] - eq[i - 1]));
    out.gamma_e = gap;
  }
  auto sorted = eq;
  std::sort(sorted.begin(), sorted.end());
  out.unequal = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  return out;
}

}  // namespace ncdelay::traffic

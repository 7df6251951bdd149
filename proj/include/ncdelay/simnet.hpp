#pragma once

// One coding-delay trial over a line network v_0 -> v_1 -> ... -> v_L.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ncdelay/codec.hpp"
#include "ncdelay/traffic.hpp"

namespace ncdelay::sim {

/// How events of different links at the same instant see each other.
enum class SameInstantOrder {
  upstream_first,  // a packet received at t can be forwarded downstream at t
  strictly_later,  // it can only be forwarded after t
};

struct NetworkConfig {
  codec::CodeConfig code;
  traffic::TrafficSpec traffic;
  /// Censoring horizon; defaults to 4 * symbols / p.
  std::optional<double> horizon_cap;
  /// Carry payloads end to end and decode them at the sink.
  bool payload_mode = false;
  SameInstantOrder order = SameInstantOrder::upstream_first;

  std::size_t links() const noexcept { return traffic.links(); }
  double effective_horizon_cap() const;
  std::size_t payload_bits() const { return code.payload_dim.value_or(64); }
  void validate() const;
};

struct TrialResult {
  std::uint64_t seed = 0;
  /// Time the sink could first recover all messages; nullopt if censored.
  std::optional<double> coding_delay;
  double horizon_cap = 0.0;
  std::vector<std::optional<double>> chunk_decode_time;
  std::vector<std::uint64_t> packets_sent;        // per link
  std::vector<std::uint64_t> packets_successful;  // per link
  /// Successful opportunities wasted because the chosen chunk was empty.
  std::uint64_t empty_chunk_events = 0;
  std::size_t sink_rank = 0;
  /// Recovered messages (payload mode, uncensored trials only).
  std::optional<std::vector<gf2::BitVector>> decoded;

  bool censored() const noexcept { return !coding_delay.has_value(); }
  /// Delay, with censored trials reported at the censoring horizon.
  double delay_or_cap() const noexcept { return coding_delay.value_or(horizon_cap); }

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

/// Read-only view of every packet delivered over a link.
struct Delivery {
  std::size_t link;
  double time;
  const codec::Packet& packet;
  std::size_t sink_rank;  // after ingest when link == L
};
using DeliveryObserver = std::function<void(const Delivery&)>;

/// Per-trial seed for trial `index` of a batch: mix64(master_seed, index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

/// Runs one trial. Censoring is reported in the result, not thrown; invalid
/// configurations throw std::invalid_argument.
TrialResult run_trial(const NetworkConfig& cfg, std::uint64_t seed,
                      const DeliveryObserver& observer = {});

/// The k source messages a payload-mode trial with this seed transmits.
std::vector<gf2::BitVector> source_messages(const NetworkConfig& cfg, std::uint64_t seed);

/// Fraction of chunks not decoded by time `horizon` (undefined or later decode time).
double undecodable_fraction_at(const TrialResult& tr, double horizon);

}  // namespace ncdelay::sim

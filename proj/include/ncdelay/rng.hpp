#pragma once

// Deterministic random streams.
//
// Every random quantity in a trial is drawn from a named stream derived from
// the trial seed, so results depend only on (configuration, seed) and never on
// thread scheduling or the order in which unrelated components consume draws.
// Only raw engine output is used; the distribution helpers below are defined
// here rather than taken from <random> so that sequences are identical across
// standard library implementations.

#include <cstdint>
#include <random>

namespace ncdelay {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Combines two 64-bit values into a well-mixed seed:
///   mix64(a, b) = splitmix64(a ^ splitmix64(b + 0x9E3779B97F4A7C15)).
/// Used for per-trial seeds, mix64(master_seed, trial_index).
std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept;

/// Stream purposes within one trial.
enum class StreamTag : std::uint64_t {
  opportunity = 1,  // per-link transmission times
  loss = 2,         // per-link Bernoulli outcomes
  chunk = 3,        // per-node chunk selection
  coefficient = 4,  // per-node coding coefficients
  message = 5,      // source message payloads
  precode = 6,      // precode generator
};

/// Engine for stream (tag, index) of the trial identified by `seed`.
Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

/// True with probability p. Always consumes exactly one draw.
bool bernoulli(Rng& rng, double p) noexcept;

/// Uniform integer in [0, n), n >= 1 (Lemire's multiply-and-reject).
std::uint64_t uniform_below(Rng& rng, std::uint64_t n) noexcept;

/// Exponential variate with the given rate (> 0).
double exponential(Rng& rng, double rate) noexcept;

}  // namespace ncdelay

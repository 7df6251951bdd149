#include "ncdelay/rng.hpp"

#include <cmath>

namespace ncdelay {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x9E3779B97F4A7C15ULL));
}

Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
  const std::uint64_t s = mix64(mix64(seed, static_cast<std::uint64_t>(tag)), index);
  return Rng{s};
}

double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool bernoulli(Rng& rng, double p) noexcept {
  return uniform01(rng) < p;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) noexcept {
  __extension__ using u128 = unsigned __int128;
  u128 m = static_cast<u128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double exponential(Rng& rng, double rate) noexcept {
  // 1 - u lies in (0, 1], so the log is finite.
  return -std::log1p(-uniform01(rng)) / rate;
}

}  // namespace ncdelay

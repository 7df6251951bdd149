#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ncdelay/simnet.hpp"

using namespace ncdelay;
using namespace ncdelay::sim;

namespace {

NetworkConfig line(std::size_t k, std::vector<double> p, std::size_t q = 1) {
  NetworkConfig n;
  n.code = q == 1 ? codec::CodeConfig::dense(k) : codec::CodeConfig::chunked(k, q);
  n.traffic = traffic::TrafficSpec::regular(std::move(p));
  return n;
}

}  // namespace

TEST_CASE("single link, single message") {
  auto net = line(1, {1.0});
  net.horizon_cap = 1000.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // The source draws one coefficient bit per opportunity; the first 1 decodes.
    auto rng = make_stream(seed, StreamTag::coefficient, 0);
    double expect = 1.0;
    while (!gf2::random_row(1, rng).get(0)) expect += 1.0;
    const auto r = run_trial(net, seed);
    REQUIRE(r.coding_delay);
    CHECK(*r.coding_delay == expect);
  }
}

TEST_CASE("same-instant forwarding") {
  auto net = line(1, {1.0, 1.0});
  net.horizon_cap = 1000.0;
  bool saw_one = false;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const auto r = run_trial(net, seed);
    REQUIRE(r.coding_delay);
    saw_one = saw_one || *r.coding_delay == 1.0;
  }
  CHECK(saw_one);
  net.order = SameInstantOrder::strictly_later;
  for (std::uint64_t seed = 0; seed < 64; ++seed) CHECK(*run_trial(net, seed).coding_delay >= 2.0);
}

TEST_CASE("trial invariants") {
  for (std::size_t L : {1u, 2u, 3u}) {
    for (std::size_t q : {1u, 4u}) {
      auto net = line(32, std::vector<double>(L, 0.7), q);
      for (std::uint64_t seed = 0; seed < 8; ++seed) {
        std::vector<gf2::EchelonBasis> received;
        for (std::size_t i = 0; i < L; ++i) received.emplace_back(net.code.alpha() * q);
        std::vector<std::uint64_t> delivered(L + 1, 0);
        std::size_t last_rank = 0;
        bool in_span = true;
        bool monotone = true;
        const auto r = run_trial(net, seed, [&](const Delivery& d) {
          ++delivered[d.link];
          // Embed the chunk GEV into the global coefficient space.
          gf2::BitVector g(net.code.k);
          for (std::size_t j = 0; j < d.packet.gev.size(); ++j)
            if (d.packet.gev.get(j)) g.set(d.packet.chunk * net.code.alpha() + j, true);
          if (d.link >= 2) in_span = in_span && received[d.link - 2].contains(g.words());
          if (d.link <= L - 1) received[d.link - 1].insert(g.words());
          monotone = monotone && d.sink_rank >= last_rank;
          last_rank = d.sink_rank;
        });
        CHECK(in_span);
        CHECK(monotone);
        REQUIRE(r.coding_delay);
        CHECK(*r.coding_delay >= 32.0);
        CHECK(r.sink_rank == 32);
        std::uint64_t empty = r.empty_chunk_events;
        for (std::size_t i = 0; i < L; ++i) {
          CHECK(r.packets_successful[i] <= r.packets_sent[i]);
          if (i == 0) CHECK(delivered[1] == r.packets_successful[0]);
        }
        std::uint64_t lost_to_empty = 0;
        for (std::size_t i = 1; i < L; ++i) lost_to_empty += r.packets_successful[i] - delivered[i + 1];
        CHECK(lost_to_empty == empty);
      }
    }
  }
}

TEST_CASE("reproducible and seed-sensitive") {
  const auto net = line(64, {0.8, 0.6}, 4);
  CHECK(run_trial(net, 99) == run_trial(net, 99));
  bool differs = false;
  for (std::uint64_t s = 1; s < 5; ++s) differs = differs || run_trial(net, 100) != run_trial(net, 100 + s);
  CHECK(differs);
  CHECK(trial_seed(1, 2) == mix64(1, 2));
}

TEST_CASE("payload round trip") {
  auto net = line(48, {0.9, 0.8, 0.7}, 4);
  net.payload_mode = true;
  net.code.payload_dim = 40;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = run_trial(net, seed);
    REQUIRE(r.decoded);
    CHECK(*r.decoded == source_messages(net, seed));
  }
}

TEST_CASE("precoded trial") {
  codec::PrecodeConfig pc;
  pc.margin = 4;
  NetworkConfig net;
  net.code = codec::CodeConfig::precoded(256, 16, pc);
  net.traffic = traffic::TrafficSpec::regular({0.9, 0.9});
  net.payload_mode = true;
  net.code.payload_dim = 16;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = run_trial(net, seed);
    REQUIRE(r.coding_delay);
    REQUIRE(r.decoded);
    CHECK(*r.decoded == source_messages(net, seed));
    CHECK(undecodable_fraction_at(r, *r.coding_delay) <= pc.erasure_fraction() + 1e-9);
  }
}

TEST_CASE("censoring") {
  auto net = line(64, {0.5});
  net.horizon_cap = 10.0;
  const auto r = run_trial(net, 1);
  CHECK(r.censored());
  CHECK(r.delay_or_cap() == 10.0);
  CHECK(line(64, {0.5}).effective_horizon_cap() == doctest::Approx(512.0));
  net.horizon_cap = 0.0;
  CHECK_THROWS_AS(run_trial(net, 1), std::invalid_argument);
}

TEST_CASE("undecodable fraction") {
  const auto net = line(64, {0.8, 0.8}, 8);
  const auto r = run_trial(net, 5);
  REQUIRE(r.coding_delay);
  CHECK(undecodable_fraction_at(r, 0.0) == 1.0);
  CHECK(undecodable_fraction_at(r, *r.coding_delay) == 0.0);
  CHECK(undecodable_fraction_at(r, *r.coding_delay + 10) == 0.0);
  double prev = 1.0;
  for (double t = 0; t <= *r.coding_delay; t += 1.0) {
    const double f = undecodable_fraction_at(r, t);
    CHECK(f <= prev);
    prev = f;
  }
}

TEST_CASE("invalid networks") {
  auto net = line(10, {0.5}, 1);
  net.code.q = 3;
  CHECK_THROWS_AS(run_trial(net, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_trial(line(10, {}), 1), std::invalid_argument);
}

#include <stdexcept>
#include <algorithm>
#include <map>
#include <string>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "ncdelay/codec.hpp"
#include "ncdelay/stats.hpp"
#include "oracle_util.hpp"

using namespace ncdelay;
using namespace ncdelay::codec;
using gf2::BitMatrix;
using gf2::BitVector;

namespace {

std::vector<BitVector> random_messages(std::size_t k, std::size_t dim, Rng& rng) {
  std::vector<BitVector> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(gf2::random_row(dim, rng));
  return out;
}

BitVector weighted_xor(const BitVector& gev, const std::vector<BitVector>& syms, std::size_t base) {
  BitVector acc(syms.front().size());
  for (std::size_t j = 0; j < gev.size(); ++j)
    if (gev.get(j)) acc ^= syms[base + j];
  return acc;
}

}  // namespace

TEST_CASE("code config validation") {
  CHECK_NOTHROW(CodeConfig::dense(8).validate());
  CHECK_NOTHROW(CodeConfig::chunked(8, 4).validate());
  CHECK_THROWS_AS(CodeConfig::chunked(8, 3).validate(), std::invalid_argument);
  CHECK_THROWS_AS(CodeConfig::dense(0).validate(), std::invalid_argument);
  auto c = CodeConfig::dense(8);
  c.q = 2;
  CHECK_THROWS(c.validate());
  CHECK(CodeConfig::chunked(8, 4).alpha() == 2);
}

TEST_CASE("precode sizes") {
  PrecodeConfig pc;
  pc.gamma_a = 0.25;
  pc.gamma_b = 0.08;
  CHECK(pc.intermediate_count(4096) == 4096 + 410);
  const auto eps = PrecodeConfig::with_epsilon(0.25, 0.08, 0.01);
  CHECK(eps.margin == 7);
  const auto aligned = pc.aligned_to(4096, 64);
  CHECK(aligned.intermediate_count(4096) % 64 == 0);
  CHECK(aligned.intermediate_count(4096) < 4096 + 410 + 64);
  const auto code = CodeConfig::precoded(4096, 64, pc);
  CHECK(code.alpha() == 64);
  CHECK(code.symbols() == code.q * 64);
  PrecodeConfig bad;
  bad.gamma_b = 1.0;
  CHECK_THROWS(bad.validate(4));
}

TEST_CASE("select_chunk") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(select_chunk(1, rng) == 0);
  CHECK_THROWS_AS(select_chunk(0, rng), std::invalid_argument);
  const std::size_t n = 100000;
  std::vector<std::size_t> counts(4);
  for (std::size_t i = 0; i < n; ++i) ++counts[select_chunk(4, rng)];
  for (auto c : counts) {
    const auto ci = stats::wilson(c, n, 0.999);
    CHECK(ci.lo <= 0.25);
    CHECK(ci.hi >= 0.25);
  }
}

TEST_CASE("source_emit") {
  Rng rng(2);
  const auto msgs = random_messages(2, 24, rng);
  SourceSymbols syms{msgs};
  const auto cfg = CodeConfig::dense(2);
  std::set<std::string> gevs;
  for (int i = 0; i < 200; ++i) {
    const auto p = source_emit(cfg, 0, syms, rng);
    CHECK(p.gev.size() == 2);
    REQUIRE(p.payload);
    CHECK(*p.payload == weighted_xor(p.gev, msgs, 0));
    gevs.insert(p.gev.to_string());
  }
  CHECK(gevs.size() == 4);

  SUBCASE("chunk offsets") {
    const auto m8 = random_messages(8, 10, rng);
    SourceSymbols s8{m8};
    const auto c = CodeConfig::chunked(8, 4);
    for (std::uint32_t ch = 0; ch < 4; ++ch) {
      const auto p = source_emit(c, ch, s8, rng);
      CHECK(p.chunk == ch);
      CHECK(*p.payload == weighted_xor(p.gev, m8, ch * 2));
    }
    CHECK_THROWS_AS(source_emit(c, 4, s8, rng), std::out_of_range);
  }
  SUBCASE("no payloads") {
    const auto p = source_emit(cfg, 0, SourceSymbols{}, rng);
    CHECK_FALSE(p.payload);
  }
}

TEST_CASE("node_recode") {
  Rng rng(4);
  NodeBuffer buf(2, 16, 12);
  CHECK_FALSE(node_recode(buf, 0, rng).has_value());
  CHECK_THROWS_AS(NodeBuffer(1, 4, 0), std::invalid_argument);

  const auto msgs = random_messages(32, 12, rng);
  SourceSymbols syms{msgs};
  const auto cfg = CodeConfig::chunked(32, 2);
  BitMatrix rows(0, 16);
  for (int i = 0; i < 9; ++i) {
    auto p = source_emit(cfg, 1, syms, rng);
    buf.push(p);
    rows.append_row(p.gev);
  }
  CHECK(buf.count(1) == 9);
  CHECK(buf.count(0) == 0);
  CHECK(buf.total() == 9);
  const auto r0 = testutil::naive_rank(rows);
  for (int t = 0; t < 50; ++t) {
    const auto p = node_recode(buf, 1, rng);
    REQUIRE(p);
    CHECK(p->chunk == 1);
    CHECK(*p->payload == weighted_xor(p->gev, msgs, 16));
    BitMatrix ext = rows;
    ext.append_row(p->gev);
    CHECK(testutil::naive_rank(ext) == r0);
  }
  SUBCASE("push validation") {
    Packet bad{0, BitVector(3), BitVector(12)};
    CHECK_THROWS_AS(buf.push(bad), std::invalid_argument);
    Packet nopay{0, BitVector(16), std::nullopt};
    CHECK_THROWS_AS(buf.push(nopay), std::invalid_argument);
    Packet far{5, BitVector(16), BitVector(12)};
    CHECK_THROWS_AS(buf.push(far), std::out_of_range);
  }
}

TEST_CASE("recoded coefficients are uniform over the buffer") {
  // With two independent buffered rows every combination, zero included,
  // should appear about a quarter of the time.
  Rng rng(6);
  NodeBuffer buf(1, 2, std::nullopt);
  buf.push({0, BitVector::from_string("10"), std::nullopt});
  buf.push({0, BitVector::from_string("01"), std::nullopt});
  std::map<std::string, std::size_t> seen;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) ++seen[node_recode(buf, 0, rng)->gev.to_string()];
  CHECK(seen.size() == 4);
  for (const auto& [g, c] : seen) {
    const auto ci = stats::wilson(c, n, 0.999);
    CHECK(ci.lo <= 0.25);
    CHECK(ci.hi >= 0.25);
  }
}

TEST_CASE("sink") {
  SUBCASE("alpha one decodes on the first nonzero GEV") {
    SinkState sink(1, 1, std::nullopt);
    CHECK_FALSE(sink.ingest({0, BitVector::from_string("0"), std::nullopt}, 1.0));
    CHECK_FALSE(sink.decoded(0));
    CHECK(sink.ingest({0, BitVector::from_string("1"), std::nullopt}, 2.0));
    CHECK(sink.decode_time(0) == 2.0);
    CHECK(sink.all_decoded());
  }
  SUBCASE("duplicate packet changes nothing") {
    SinkState sink(2, 3, std::nullopt);
    const Packet p{1, BitVector::from_string("110"), std::nullopt};
    CHECK(sink.ingest(p, 1.0));
    CHECK_FALSE(sink.ingest(p, 2.0));
    CHECK(sink.rank(1) == 1);
    CHECK(sink.total_rank() == 1);
    CHECK(sink.non_innovative() == 1);
    CHECK(sink.received() == 2);
  }
  SUBCASE("any order of independent rows decodes at the last one") {
    Rng rng(8);
    const std::size_t alpha = 6;
    const auto msgs = random_messages(alpha, 20, rng);
    std::vector<std::size_t> order(alpha);
    std::iota(order.begin(), order.end(), 0);
    std::vector<BitVector> rows;
    BitMatrix m(0, alpha);
    while (rows.size() < alpha) {
      auto g = gf2::random_row(alpha, rng);
      BitMatrix ext = m;
      ext.append_row(g);
      if (testutil::naive_rank(ext) > m.rows()) {
        m = ext;
        rows.push_back(g);
      }
    }
    for (int t = 0; t < 20; ++t) {
      std::shuffle(order.begin(), order.end(), rng);
      SinkState sink(1, alpha, 20);
      for (std::size_t i = 0; i < alpha; ++i) {
        const auto& g = rows[order[i]];
        sink.ingest({0, g, weighted_xor(g, msgs, 0)}, static_cast<double>(i + 1));
        CHECK(sink.decoded(0) == (i + 1 == alpha));
      }
      CHECK(sink.decode_time(0) == static_cast<double>(alpha));
      CHECK(sink.chunk_symbols(0) == msgs);
    }
  }
}

TEST_CASE("precode") {
  Rng rng(10);
  SUBCASE("identity without redundancy") {
    PrecodeConfig pc;
    pc.gamma_b = 0.0;
    const auto msgs = random_messages(5, 9, rng);
    const auto out = precode_encode(msgs, pc, rng);
    CHECK(out.generator == BitMatrix::identity(5));
    CHECK(out.intermediate == msgs);
  }
  SUBCASE("outputs follow the generator rows") {
    PrecodeConfig pc;
    pc.gamma_a = 0.0;
    pc.gamma_b = 0.5;
    pc.margin = 2;
    const auto msgs = random_messages(4, 16, rng);
    const auto out = precode_encode(msgs, pc, rng);
    REQUIRE(out.generator.rows() == 8);
    for (std::size_t r = 0; r < 8; ++r) {
      BitVector acc(16);
      for (std::size_t c = 0; c < 4; ++c)
        if (out.generator.get(r, c)) acc ^= msgs[c];
      CHECK(out.intermediate[r] == acc);
    }
    for (std::size_t r = 0; r < 4; ++r) CHECK(out.intermediate[r] == msgs[r]);
  }
  SUBCASE("decodes after erasures") {
    PrecodeConfig pc;
    pc.gamma_a = 0.25;
    pc.gamma_b = 0.2;
    pc.margin = 14;
    const std::size_t k = 64;
    const std::size_t kp = pc.intermediate_count(k);
    REQUIRE(kp == 64 + 16 + 14);
    const std::size_t erase = kp - k - 14;
    const int trials = 10000;
    int ok = 0;
    std::vector<std::size_t> idx(kp);
    for (int t = 0; t < trials; ++t) {
      const auto msgs = random_messages(k, 8, rng);
      const auto out = precode_encode(msgs, pc, rng);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(kp - erase);
      BitMatrix rows(0, k);
      std::vector<BitVector> surv;
      for (auto i : idx) {
        rows.append_row(out.generator.row(i));
        surv.push_back(out.intermediate[i]);
      }
      idx.resize(kp);
      const auto dec = precode_decode(rows, surv);
      if (dec) {
        CHECK(*dec == msgs);
        ++ok;
      }
    }
    CHECK(static_cast<double>(ok) / trials >= 1.0 - 1.0 / 1024.0);
  }
  SUBCASE("survivor sets") {
    PrecodeConfig pc;
    pc.margin = 4;
    const auto msgs = random_messages(20, 8, rng);
    const auto out = precode_encode(msgs, pc, rng);
    CHECK(precode_decode(out.generator, out.intermediate) == msgs);
    std::vector<std::size_t> sys(20);
    std::iota(sys.begin(), sys.end(), 0);
    const auto top = out.generator.select_rows(sys);
    std::vector<BitVector> top_vals(out.intermediate.begin(), out.intermediate.begin() + 20);
    CHECK(precode_decode(top, top_vals) == msgs);
    std::vector<std::size_t> few(19);
    std::iota(few.begin(), few.end(), 3);
    std::vector<BitVector> few_vals;
    for (auto i : few) few_vals.push_back(out.intermediate[i]);
    CHECK_FALSE(precode_decode(out.generator.select_rows(few), few_vals).has_value());
    CHECK_THROWS_AS(precode_decode(top, few_vals), std::invalid_argument);
  }
}

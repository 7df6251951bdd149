#include "ncdelay/simnet.hpp"

#include <cmath>
#include <stdexcept>

namespace ncdelay::sim {

using codec::Packet;
using gf2::BitVector;

double NetworkConfig::effective_horizon_cap() const {
  if (horizon_cap) return *horizon_cap;
  const double p = traffic::equivalent_min_param(traffic).p;
  return 4.0 * static_cast<double>(code.symbols()) / p;
}

void NetworkConfig::validate() const {
  code.validate();
  traffic.validate();
  if (horizon_cap && !(*horizon_cap > 0.0)) throw std::invalid_argument("network.horizon_cap must be positive");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return mix64(master_seed, index);
}

std::vector<BitVector> source_messages(const NetworkConfig& cfg, std::uint64_t seed) {
  auto rng = make_stream(seed, StreamTag::message);
  std::vector<BitVector> msgs;
  msgs.reserve(cfg.code.k);
  for (std::size_t i = 0; i < cfg.code.k; ++i) msgs.push_back(gf2::random_row(cfg.payload_bits(), rng));
  return msgs;
}

namespace {

struct PrecodeTracker {
  gf2::BitMatrix generator;
  gf2::EchelonBasis basis;
  std::size_t recovered = 0;
  std::size_t needed = 0;

  bool done() const noexcept { return recovered >= needed && basis.full(); }
};

}  // namespace

TrialResult run_trial(const NetworkConfig& cfg, std::uint64_t seed, const DeliveryObserver& observer) {
  cfg.validate();
  const auto& code = cfg.code;
  const std::size_t L = cfg.links();
  const std::size_t q = code.q;
  const std::size_t alpha = code.alpha();
  const double cap = cfg.effective_horizon_cap();
  const std::optional<std::size_t> payload_dim =
      cfg.payload_mode ? std::optional<std::size_t>(cfg.payload_bits()) : std::nullopt;

  TrialResult res;
  res.seed = seed;
  res.horizon_cap = cap;
  res.packets_sent.assign(L, 0);
  res.packets_successful.assign(L, 0);

  std::optional<PrecodeTracker> tracker;
  if (code.precode) {
    auto prng = make_stream(seed, StreamTag::precode);
    auto g = codec::precode_generator(code.k, *code.precode, prng);
    const auto n = static_cast<double>(g.rows());
    const auto needed =
        static_cast<std::size_t>(std::ceil((1.0 - code.precode->erasure_fraction()) * n - 1e-9));
    tracker.emplace(PrecodeTracker{std::move(g), gf2::EchelonBasis(code.k), 0, needed});
  }

  codec::SourceSymbols symbols;
  if (cfg.payload_mode) {
    auto msgs = source_messages(cfg, seed);
    symbols.payloads = tracker ? codec::precode_apply(tracker->generator, msgs) : std::move(msgs);
  }

  // Node i transmits over link i + 1.
  std::vector<Rng> chunk_rng;
  std::vector<Rng> coeff_rng;
  for (std::size_t node = 0; node < L; ++node) {
    chunk_rng.push_back(make_stream(seed, StreamTag::chunk, node));
    coeff_rng.push_back(make_stream(seed, StreamTag::coefficient, node));
  }
  std::vector<traffic::OpportunityStream> opportunities;
  std::vector<Rng> losses;
  std::vector<double> next_time(L);
  for (std::size_t i = 1; i <= L; ++i) {
    opportunities.push_back(traffic::opportunity_stream(cfg.traffic, seed, i));
    losses.push_back(traffic::loss_rng(seed, i));
    next_time[i - 1] = opportunities.back().next();
  }

  // buffers[i] belongs to interior node v_i, 1 <= i < L.
  std::vector<codec::NodeBuffer> buffers;
  buffers.reserve(L);
  for (std::size_t i = 0; i < L; ++i) buffers.emplace_back(i == 0 ? 0 : q, alpha, payload_dim);
  codec::SinkState sink(q, alpha, payload_dim);

  const bool upstream_first = cfg.order == SameInstantOrder::upstream_first;
  for (;;) {
    std::size_t li = 0;
    for (std::size_t j = 1; j < L; ++j) {
      if (next_time[j] < next_time[li] || (!upstream_first && next_time[j] == next_time[li])) li = j;
    }
    const double now = next_time[li];
    if (now > cap) break;
    next_time[li] = opportunities[li].next();

    ++res.packets_sent[li];
    if (!bernoulli(losses[li], cfg.traffic.p[li])) continue;
    ++res.packets_successful[li];

    const std::size_t sender = li;
    const std::uint32_t chunk = code.is_dense() ? 0 : codec::select_chunk(q, chunk_rng[sender]);
    std::optional<Packet> pkt;
    if (sender == 0) {
      pkt = codec::source_emit(code, chunk, symbols, coeff_rng[0]);
    } else {
      pkt = codec::node_recode(buffers[sender], chunk, coeff_rng[sender]);
      if (!pkt) {
        ++res.empty_chunk_events;
        continue;
      }
    }

    const std::size_t link = li + 1;
    if (link < L) {
      buffers[link].push(*pkt);
      if (observer) observer({link, now, *pkt, sink.total_rank()});
      continue;
    }

    const bool was_decoded = sink.decoded(chunk);
    sink.ingest(*pkt, now);
    if (observer) observer({link, now, *pkt, sink.total_rank()});
    if (tracker && !was_decoded && sink.decoded(chunk)) {
      const std::size_t base = static_cast<std::size_t>(chunk) * alpha;
      for (std::size_t r = base; r < base + alpha; ++r) tracker->basis.insert(tracker->generator.row(r));
      tracker->recovered += alpha;
    }
    const bool done = tracker ? tracker->done() : sink.all_decoded();
    if (done) {
      res.coding_delay = now;
      break;
    }
  }

  res.chunk_decode_time = sink.decode_times();
  res.sink_rank = sink.total_rank();

  if (cfg.payload_mode && res.coding_delay) {
    if (!tracker) {
      std::vector<BitVector> out;
      out.reserve(code.k);
      for (std::uint32_t c = 0; c < q; ++c) {
        auto part = sink.chunk_symbols(c);
        for (auto& v : part) out.push_back(std::move(v));
      }
      res.decoded = std::move(out);
    } else {
      gf2::BitMatrix rows(0, code.k);
      std::vector<BitVector> survivors;
      for (std::uint32_t c = 0; c < q; ++c) {
        if (!sink.decoded(c)) continue;
        auto part = sink.chunk_symbols(c);
        for (std::size_t j = 0; j < alpha; ++j) {
          rows.append_row(tracker->generator.row(static_cast<std::size_t>(c) * alpha + j));
          survivors.push_back(std::move(part[j]));
        }
      }
      res.decoded = codec::precode_decode(rows, survivors);
    }
  }
  return res;
}

double undecodable_fraction_at(const TrialResult& tr, double horizon) {
  if (tr.chunk_decode_time.empty()) return 1.0;
  std::size_t missing = 0;
  for (const auto& t : tr.chunk_decode_time) {
    if (!t || *t > horizon) ++missing;
  }
  return static_cast<double>(missing) / static_cast<double>(tr.chunk_decode_time.size());
}

}  // namespace ncdelay::sim

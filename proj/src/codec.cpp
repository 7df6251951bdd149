#include "ncdelay/codec.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ncdelay::codec {

using gf2::Word;

// ---------------------------------------------------------------- configs

std::size_t PrecodeConfig::intermediate_count(std::size_t k) const {
  const double extra = erasure_fraction() * static_cast<double>(k);
  // Tolerance keeps exact products such as 0.1 * 4096 from rounding up twice.
  const auto parity = static_cast<std::size_t>(std::ceil(extra - 1e-9));
  return k + parity + margin;
}

void PrecodeConfig::validate(std::size_t k) const {
  if (!(gamma_a >= 0.0 && gamma_a < 1.0)) throw std::invalid_argument("precode.gamma_a must lie in [0, 1)");
  if (!(gamma_b >= 0.0 && gamma_b < 1.0)) throw std::invalid_argument("precode.gamma_b must lie in [0, 1)");
  if (intermediate_count(k) < k) throw std::invalid_argument("precode: k' < k");
}

PrecodeConfig PrecodeConfig::with_epsilon(double gamma_a, double gamma_b, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("precode: epsilon must lie in (0, 1)");
  PrecodeConfig pc;
  pc.gamma_a = gamma_a;
  pc.gamma_b = gamma_b;
  pc.margin = static_cast<std::size_t>(std::ceil(std::log2(1.0 / epsilon)));
  return pc;
}

PrecodeConfig PrecodeConfig::aligned_to(std::size_t k, std::size_t alpha) const {
  if (alpha == 0) throw std::invalid_argument("precode: alpha must be positive");
  PrecodeConfig pc = *this;
  const std::size_t rem = pc.intermediate_count(k) % alpha;
  if (rem != 0) pc.margin += alpha - rem;
  return pc;
}

std::size_t CodeConfig::symbols() const {
  return precode ? precode->intermediate_count(k) : k;
}

void CodeConfig::validate() const {
  if (k == 0) throw std::invalid_argument("code.k must be positive");
  if (q == 0) throw std::invalid_argument("code.q must be positive");
  if (precode) precode->validate(k);
  const std::size_t n = symbols();
  if (n % q != 0) {
    throw std::invalid_argument("code.q = " + std::to_string(q) + " does not divide the " +
                                std::to_string(n) + " coded symbols");
  }
  if (scheme == Scheme::dense && q != 1) throw std::invalid_argument("code: a dense code has q = 1");
  if (scheme == Scheme::dense && precode) throw std::invalid_argument("code: precoding requires a chunked code");
  if (payload_dim && *payload_dim == 0) throw std::invalid_argument("code.payload_dim must be positive");
}

CodeConfig CodeConfig::dense(std::size_t k) {
  CodeConfig c;
  c.k = k;
  return c;
}

CodeConfig CodeConfig::chunked(std::size_t k, std::size_t q) {
  CodeConfig c;
  c.k = k;
  c.q = q;
  c.scheme = Scheme::chunked;
  return c;
}

CodeConfig CodeConfig::precoded(std::size_t k, std::size_t alpha, const PrecodeConfig& pc) {
  CodeConfig c;
  c.k = k;
  c.scheme = Scheme::chunked;
  c.precode = pc.aligned_to(k, alpha);
  c.q = c.precode->intermediate_count(k) / alpha;
  return c;
}

// ---------------------------------------------------------------- source / interior

std::uint32_t select_chunk(std::size_t q, Rng& rng) {
  if (q == 0) throw std::invalid_argument("select_chunk: q must be positive");
  return static_cast<std::uint32_t>(uniform_below(rng, q));
}

Packet source_emit(const CodeConfig& cfg, std::uint32_t chunk, const SourceSymbols& symbols, Rng& rng) {
  if (chunk >= cfg.q) throw std::out_of_range("source_emit: chunk index out of range");
  const std::size_t alpha = cfg.alpha();
  Packet p{chunk, gf2::random_row(alpha, rng), std::nullopt};
  if (symbols.payloads) {
    const auto& msgs = *symbols.payloads;
    const std::size_t base = static_cast<std::size_t>(chunk) * alpha;
    BitVector acc(msgs.at(base).size());
    const auto gev = p.gev.words();
    for (std::size_t w = 0; w < gev.size(); ++w) {
      Word bits = gev[w];
      while (bits != 0) {
        const std::size_t j = w * gf2::kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
        acc ^= msgs[base + j];
        bits &= bits - 1;
      }
    }
    p.payload = std::move(acc);
  }
  return p;
}

NodeBuffer::NodeBuffer(std::size_t chunks, std::size_t alpha, std::optional<std::size_t> payload_dim)
    : alpha_(alpha), payload_dim_(payload_dim) {
  if (payload_dim_ && *payload_dim_ == 0) throw std::invalid_argument("NodeBuffer: payload_dim must be positive");
  gevs_.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) gevs_.emplace_back(0, alpha);
  if (payload_dim_) {
    payloads_.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) payloads_.emplace_back(0, *payload_dim_);
  }
}

void NodeBuffer::push(const Packet& p) {
  if (p.chunk >= gevs_.size()) throw std::out_of_range("NodeBuffer::push: chunk index out of range");
  if (p.gev.size() != alpha_) throw std::invalid_argument("NodeBuffer::push: GEV length differs from alpha");
  if (payload_dim_) {
    if (!p.payload) throw std::invalid_argument("NodeBuffer::push: payload missing");
    if (p.payload->size() != *payload_dim_) throw std::invalid_argument("NodeBuffer::push: payload length mismatch");
  }
  gevs_[p.chunk].append_row(p.gev);
  if (payload_dim_) payloads_[p.chunk].append_row(*p.payload);
}

std::size_t NodeBuffer::total() const noexcept {
  std::size_t n = 0;
  for (const auto& m : gevs_) n += m.rows();
  return n;
}

namespace {

// XORs into `out` the rows of `m` whose coefficient bit is set.
void combine_rows(const BitMatrix& m, std::span<const Word> coeffs, std::span<Word> out) {
  const std::size_t stride = m.words_per_row();
  Word* __restrict dst = out.data();
  for (std::size_t w = 0; w < coeffs.size(); ++w) {
    Word bits = coeffs[w];
    while (bits != 0) {
      const std::size_t r = w * gf2::kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
      const Word* __restrict src = m.row(r).data();
      for (std::size_t i = 0; i < stride; ++i) dst[i] ^= src[i];
      bits &= bits - 1;
    }
  }
}

}  // namespace

std::optional<Packet> node_recode(const NodeBuffer& buf, std::uint32_t chunk, Rng& rng) {
  const std::size_t m = buf.count(chunk);
  if (m == 0) return std::nullopt;

  thread_local std::vector<Word> coeffs;
  coeffs.assign(gf2::words_for(m), 0);
  gf2::fill_random(coeffs, m, rng);

  Packet p{chunk, BitVector(buf.alpha()), std::nullopt};
  combine_rows(buf.gevs(chunk), coeffs, p.gev.words());
  if (buf.has_payloads()) {
    const auto& pay = buf.payloads(chunk);
    BitVector acc(pay.cols());
    combine_rows(pay, coeffs, acc.words());
    p.payload = std::move(acc);
  }
  return p;
}

// ---------------------------------------------------------------- sink

SinkState::SinkState(std::size_t chunks, std::size_t alpha, std::optional<std::size_t> payload_dim)
    : alpha_(alpha), decode_time_(chunks) {
  bases_.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) bases_.emplace_back(alpha, payload_dim.value_or(0));
}

bool SinkState::ingest(const Packet& pkt, double now) {
  auto& basis = bases_.at(pkt.chunk);
  ++received_;
  std::span<const Word> payload;
  if (pkt.payload) payload = pkt.payload->words();
  if (!basis.insert(pkt.gev.words(), payload)) {
    ++non_innovative_;
    return false;
  }
  ++total_rank_;
  if (basis.full() && !decode_time_[pkt.chunk]) {
    decode_time_[pkt.chunk] = now;
    ++decoded_count_;
  }
  return true;
}

std::vector<BitVector> SinkState::chunk_symbols(std::uint32_t chunk) const {
  return bases_.at(chunk).solve();
}

// ---------------------------------------------------------------- precode

BitMatrix precode_generator(std::size_t k, const PrecodeConfig& pc, Rng& rng) {
  pc.validate(k);
  const std::size_t total = pc.intermediate_count(k);
  BitMatrix g = BitMatrix::identity(k);
  g.reserve_rows(total);
  std::vector<Word> row(gf2::words_for(k));
  for (std::size_t r = k; r < total; ++r) {
    gf2::fill_random(row, k, rng);
    g.append_row(row);
  }
  return g;
}

std::vector<BitVector> precode_apply(const BitMatrix& generator, std::span<const BitVector> messages) {
  if (messages.size() != generator.cols()) {
    throw std::invalid_argument("precode: message count differs from generator width");
  }
  if (messages.empty()) return {};
  const std::size_t dim = messages.front().size();
  std::vector<BitVector> out;
  out.reserve(generator.rows());
  for (std::size_t r = 0; r < generator.rows(); ++r) {
    BitVector acc(dim);
    const auto row = generator.row(r);
    for (std::size_t w = 0; w < row.size(); ++w) {
      Word bits = row[w];
      while (bits != 0) {
        const std::size_t j = w * gf2::kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
        acc ^= messages[j];
        bits &= bits - 1;
      }
    }
    out.push_back(std::move(acc));
  }
  return out;
}

PrecodeOutput precode_encode(std::span<const BitVector> messages, const PrecodeConfig& pc, Rng& rng) {
  if (messages.empty()) throw std::invalid_argument("precode_encode: no messages");
  for (const auto& m : messages) {
    if (m.size() != messages.front().size()) throw std::invalid_argument("precode_encode: ragged messages");
  }
  BitMatrix g = precode_generator(messages.size(), pc, rng);
  auto intermediate = precode_apply(g, messages);
  return {std::move(intermediate), std::move(g)};
}

std::optional<std::vector<BitVector>> precode_decode(const BitMatrix& survivor_rows,
                                                     std::span<const BitVector> survivors) {
  if (survivor_rows.rows() != survivors.size()) {
    throw std::invalid_argument("precode_decode: survivors misaligned with generator rows");
  }
  if (survivors.empty()) return std::nullopt;
  // Incremental insertion keeps the mostly-systematic survivor set cheap to reduce.
  gf2::EchelonBasis basis(survivor_rows.cols(), survivors.front().size());
  for (std::size_t r = 0; r < survivors.size() && !basis.full(); ++r) {
    basis.insert(survivor_rows.row(r), survivors[r].words());
  }
  if (!basis.full()) return std::nullopt;
  return basis.solve();
}

}  // namespace ncdelay::codec

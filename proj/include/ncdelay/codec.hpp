#pragma once

// Dense, chunked and precoded-chunked coding at source, interior and sink nodes.
//
// A dense code is the single-chunk case. Every packet carries the global
// encoding vector (GEV) of its chunk; payloads are optional and only needed
// when a trial must reproduce the message bits.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ncdelay/gf2.hpp"
#include "ncdelay/rng.hpp"

namespace ncdelay::codec {

using gf2::BitMatrix;
using gf2::BitVector;

/// Systematic random linear precode producing k' intermediate packets from k
/// messages.
struct PrecodeConfig {
  double gamma_a = 0.25;
  double gamma_b = 0.08;
  std::size_t margin = 0;

  /// Tolerated fraction of lost intermediate packets, (1 + gamma_a) * gamma_b.
  double erasure_fraction() const noexcept { return (1.0 + gamma_a) * gamma_b; }
  /// k' = ceil((1 + (1 + gamma_a) gamma_b) k) + margin.
  std::size_t intermediate_count(std::size_t k) const;
  void validate(std::size_t k) const;

  /// margin = ceil(log2(1 / epsilon)).
  static PrecodeConfig with_epsilon(double gamma_a, double gamma_b, double epsilon);
  /// Grows the margin so that k' is a multiple of `alpha`.
  PrecodeConfig aligned_to(std::size_t k, std::size_t alpha) const;
};

enum class Scheme { dense, chunked };

struct CodeConfig {
  std::size_t k = 1;
  std::size_t q = 1;
  Scheme scheme = Scheme::dense;
  /// Bits per message vector; absent for GEV-only runs.
  std::optional<std::size_t> payload_dim;
  std::optional<PrecodeConfig> precode;

  /// Number of symbols the chunked code operates on: k, or k' when precoded.
  std::size_t symbols() const;
  std::size_t alpha() const { return symbols() / q; }
  bool is_dense() const noexcept { return scheme == Scheme::dense; }

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  static CodeConfig dense(std::size_t k);
  static CodeConfig chunked(std::size_t k, std::size_t q);
  /// Chunked code of chunk size `alpha` over a precode aligned to alpha.
  static CodeConfig precoded(std::size_t k, std::size_t alpha, const PrecodeConfig& pc);
};

struct Packet {
  std::uint32_t chunk = 0;
  BitVector gev;
  std::optional<BitVector> payload;
};

/// The source's symbols (messages, or intermediate packets under a precode).
struct SourceSymbols {
  std::optional<std::vector<BitVector>> payloads;
};

/// Uniform chunk index in [0, q). Throws std::invalid_argument if q == 0.
std::uint32_t select_chunk(std::size_t q, Rng& rng);

/// Fresh packet for `chunk`: uniform GEV of length alpha and, when `symbols`
/// carries payloads, the GEV-weighted XOR of that chunk's symbols.
Packet source_emit(const CodeConfig& cfg, std::uint32_t chunk, const SourceSymbols& symbols,
                   Rng& rng);

/// Append-only per-chunk packet store of an interior node.
class NodeBuffer {
 public:
  NodeBuffer(std::size_t chunks, std::size_t alpha, std::optional<std::size_t> payload_dim);

  void push(const Packet& p);
  std::size_t chunks() const noexcept { return gevs_.size(); }
  std::size_t alpha() const noexcept { return alpha_; }
  std::size_t count(std::uint32_t chunk) const { return gevs_.at(chunk).rows(); }
  std::size_t total() const noexcept;
  const BitMatrix& gevs(std::uint32_t chunk) const { return gevs_.at(chunk); }
  const BitMatrix& payloads(std::uint32_t chunk) const { return payloads_.at(chunk); }
  bool has_payloads() const noexcept { return payload_dim_.has_value(); }

 private:
  std::size_t alpha_;
  std::optional<std::size_t> payload_dim_;
  std::vector<BitMatrix> gevs_;
  std::vector<BitMatrix> payloads_;
};

/// Random GF(2) combination of the buffered packets of `chunk`: one uniform
/// local coefficient per buffered packet, the all-zero combination included.
/// Returns nullopt when the chunk's buffer is empty.
std::optional<Packet> node_recode(const NodeBuffer& buf, std::uint32_t chunk, Rng& rng);

/// Per-chunk decoder at the sink. Only innovative rows are stored.
class SinkState {
 public:
  SinkState(std::size_t chunks, std::size_t alpha, std::optional<std::size_t> payload_dim);

  /// Returns whether the packet increased its chunk's rank. Records the
  /// decode time the first time a chunk reaches rank alpha.
  bool ingest(const Packet& pkt, double now);

  std::size_t chunks() const noexcept { return bases_.size(); }
  std::size_t alpha() const noexcept { return alpha_; }
  std::size_t rank(std::uint32_t chunk) const { return bases_.at(chunk).rank(); }
  std::size_t total_rank() const noexcept { return total_rank_; }
  bool decoded(std::uint32_t chunk) const { return decode_time_.at(chunk).has_value(); }
  std::optional<double> decode_time(std::uint32_t chunk) const { return decode_time_.at(chunk); }
  const std::vector<std::optional<double>>& decode_times() const noexcept { return decode_time_; }
  std::size_t decoded_count() const noexcept { return decoded_count_; }
  bool all_decoded() const noexcept { return decoded_count_ == bases_.size(); }
  std::uint64_t received() const noexcept { return received_; }
  std::uint64_t non_innovative() const noexcept { return non_innovative_; }

  /// Symbols of a decoded chunk; requires payload tracking.
  std::vector<BitVector> chunk_symbols(std::uint32_t chunk) const;

 private:
  std::size_t alpha_;
  std::vector<gf2::EchelonBasis> bases_;
  std::vector<std::optional<double>> decode_time_;
  std::size_t decoded_count_ = 0;
  std::size_t total_rank_ = 0;
  std::uint64_t received_ = 0;
  std::uint64_t non_innovative_ = 0;
};

struct PrecodeOutput {
  std::vector<BitVector> intermediate;
  /// k' x k; row i expresses intermediate packet i over the messages.
  BitMatrix generator;
};

/// k' x k systematic generator: identity on top, uniform random rows below.
BitMatrix precode_generator(std::size_t k, const PrecodeConfig& pc, Rng& rng);

/// Throws std::invalid_argument if k' < k or messages are ragged.
PrecodeOutput precode_encode(std::span<const BitVector> messages, const PrecodeConfig& pc, Rng& rng);
/// Applies an existing generator to messages.
std::vector<BitVector> precode_apply(const BitMatrix& generator, std::span<const BitVector> messages);

/// Recovers the messages from surviving intermediate packets and their
/// generator rows. nullopt iff the surviving rows have rank < k. Throws
/// std::invalid_argument on misaligned inputs.
std::optional<std::vector<BitVector>> precode_decode(const BitMatrix& survivor_rows,
                                                     std::span<const BitVector> survivors);

}  // namespace ncdelay::codec

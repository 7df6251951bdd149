#pragma once

// Bit-packed GF(2) vectors and matrices.
//
// Rows are stored row-major in 64-bit words, bit j of a row living in word
// j / 64 at bit position j % 64. Bits past the logical length of a row are
// always zero, so word-wise equality and popcounts are exact.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ncdelay/rng.hpp"

namespace ncdelay::gf2 {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) noexcept {
  return (bits + kWordBits - 1) / kWordBits;
}

/// Mask selecting the valid bits of the last word of a `bits`-long row.
constexpr Word tail_mask(std::size_t bits) noexcept {
  const std::size_t rem = bits % kWordBits;
  return rem == 0 ? ~Word{0} : (Word{1} << rem) - 1;
}

/// dst ^= src over equal-length word spans.
inline void xor_words(std::span<Word> dst, std::span<const Word> src) noexcept {
  Word* d = dst.data();
  const Word* s = src.data();
  const std::size_t n = dst.size();
  for (std::size_t i = 0; i < n; ++i) d[i] ^= s[i];
}

/// Index of the lowest set bit at or after word `from`, or `npos`.
std::size_t first_set_bit(std::span<const Word> row, std::size_t from_word = 0) noexcept;
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

class BitVector {
 public:
  /// All-zero vector of dimension `len`; throws std::invalid_argument if len == 0.
  explicit BitVector(std::size_t len);
  /// Parses a string of '0'/'1' characters, bit 0 first.
  static BitVector from_string(std::string_view bits);
  static BitVector from_words(std::span<const Word> words, std::size_t len);

  std::size_t size() const noexcept { return len_; }
  bool get(std::size_t i) const;
  void set(std::size_t i, bool value);
  bool any() const noexcept;
  std::size_t popcount() const noexcept;

  std::span<Word> words() noexcept { return words_; }
  std::span<const Word> words() const noexcept { return words_; }

  BitVector& operator^=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend bool operator==(const BitVector&, const BitVector&) = default;

  std::string to_string() const;

 private:
  std::size_t len_;
  std::vector<Word> words_;
};

class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  static BitMatrix identity(std::size_t n);
  /// One string of '0'/'1' per row; all rows must share a length.
  static BitMatrix from_strings(std::initializer_list<std::string_view> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t words_per_row() const noexcept { return stride_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  /// Bounds-checked access; throws std::out_of_range.
  bool get(std::size_t r, std::size_t c) const;
  void set(std::size_t r, std::size_t c, bool value);

  std::span<const Word> row(std::size_t r) const noexcept {
    return {data_.data() + r * stride_, stride_};
  }
  std::span<Word> row(std::size_t r) noexcept { return {data_.data() + r * stride_, stride_}; }
  BitVector row_vector(std::size_t r) const;

  void append_row(std::span<const Word> words);
  void append_row(const BitVector& v);
  void reserve_rows(std::size_t n) { data_.reserve(n * stride_); }

  void swap_rows(std::size_t a, std::size_t b) noexcept;
  /// row(dst) ^= row(src)
  void add_row(std::size_t src, std::size_t dst) noexcept;

  /// Rows selected by `indices`, in that order.
  BitMatrix select_rows(std::span<const std::size_t> indices) const;
  BitMatrix transpose() const;
  BitMatrix multiply(const BitMatrix& rhs) const;

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<Word> data_;
};

/// Row rank over GF(2). Empty matrices have rank 0.
std::size_t rank(const BitMatrix& m);

struct DecodeResult {
  std::size_t rank = 0;
  /// Present iff rank == cols; messages[j] is the j-th unknown.
  std::optional<std::vector<BitVector>> messages;
  /// Columns left without a pivot (empty on success).
  std::vector<std::size_t> missing_pivots;

  bool ok() const noexcept { return messages.has_value(); }
};

/// Solves m * x = payloads by Gaussian elimination. Pivot for column c is the
/// lowest-indexed remaining row with bit c set. Throws std::invalid_argument on
/// a dimension mismatch.
DecodeResult eliminate_decode(const BitMatrix& m, std::span<const BitVector> payloads);

/// Fills the first `bits` bits of `out` with uniform bits; one engine call per word.
void fill_random(std::span<Word> out, std::size_t bits, Rng& rng);

/// Uniform random vector of dimension `len`; throws on len == 0.
BitVector random_row(std::size_t len, Rng& rng);
BitMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// Incrementally maintained row-echelon basis of a subspace of GF(2)^cols.
///
/// Each stored row has a distinct pivot, its lowest set bit, and is zero in
/// the words before the pivot's word. Rows pivoting in the same word are
/// reduced against each other within that word. Optionally carries one payload row per basis row, transformed in
/// lockstep, so the basis can solve for the unit vectors once full.
class EchelonBasis {
 public:
  explicit EchelonBasis(std::size_t cols, std::size_t payload_bits = 0);

  std::size_t cols() const noexcept { return cols_; }
  std::size_t rank() const noexcept { return rank_; }
  bool full() const noexcept { return rank_ == cols_; }
  bool has_pivot(std::size_t col) const noexcept { return slot_of_[col] != kNone; }

  /// Reduces `row` (and `payload`, if tracked) and inserts it when
  /// innovative. Returns whether the rank increased. Inputs are not modified.
  bool insert(std::span<const Word> row, std::span<const Word> payload = {});
  /// True iff `row` lies in the current span.
  bool contains(std::span<const Word> row) const;


  /// Solves for the payloads of the unit vectors e_0..e_{cols-1}.
  /// Requires full() and payload tracking.
  std::vector<BitVector> solve() const;

 private:
  static constexpr std::uint32_t kNone = static_cast<std::uint32_t>(-1);

  std::size_t cols_;
  std::size_t stride_;
  std::size_t payload_bits_;
  std::size_t payload_stride_;
  std::size_t rank_ = 0;
  std::vector<std::uint32_t> slot_of_;  // pivot column -> slot
  std::vector<std::uint32_t> pivot_of_;  // slot -> pivot column
  std::vector<Word> pivot_mask_;         // pivot columns, by word
  std::vector<Word> rows_;
  std::vector<Word> payloads_;
  std::vector<Word> scratch_;
  std::vector<Word> scratch_payload_;
};

}  // namespace ncdelay::gf2

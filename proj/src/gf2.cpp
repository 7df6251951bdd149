#include "ncdelay/gf2.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace ncdelay::gf2 {

std::size_t first_set_bit(std::span<const Word> row, std::size_t from_word) noexcept {
  for (std::size_t w = from_word; w < row.size(); ++w) {
    if (row[w] != 0) return w * kWordBits + static_cast<std::size_t>(std::countr_zero(row[w]));
  }
  return npos;
}

// ---------------------------------------------------------------- BitVector

BitVector::BitVector(std::size_t len) : len_(len), words_(words_for(len), 0) {
  if (len == 0) throw std::invalid_argument("BitVector: length must be positive");
}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i, true);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("BitVector: expected only '0' and '1'");
    }
  }
  return v;
}

BitVector BitVector::from_words(std::span<const Word> words, std::size_t len) {
  BitVector v(len);
  if (words.size() < v.words_.size()) throw std::invalid_argument("BitVector: too few words");
  std::copy_n(words.begin(), v.words_.size(), v.words_.begin());
  v.words_.back() &= tail_mask(len);
  return v;
}

bool BitVector::get(std::size_t i) const {
  if (i >= len_) throw std::out_of_range("BitVector::get");
  return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
}

void BitVector::set(std::size_t i, bool value) {
  if (i >= len_) throw std::out_of_range("BitVector::set");
  const Word bit = Word{1} << (i % kWordBits);
  if (value) {
    words_[i / kWordBits] |= bit;
  } else {
    words_[i / kWordBits] &= ~bit;
  }
}

bool BitVector::any() const noexcept {
  return std::any_of(words_.begin(), words_.end(), [](Word w) { return w != 0; });
}

std::size_t BitVector::popcount() const noexcept {
  std::size_t n = 0;
  for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.len_ != len_) throw std::invalid_argument("BitVector: dimension mismatch");
  xor_words(words_, other.words_);
  return *this;
}

std::string BitVector::to_string() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

// ---------------------------------------------------------------- BitMatrix

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), stride_(words_for(cols)), data_(rows * stride_, 0) {}

BitMatrix BitMatrix::identity(std::size_t n) {
  BitMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

BitMatrix BitMatrix::from_strings(std::initializer_list<std::string_view> rows) {
  if (rows.size() == 0) return {};
  const std::size_t cols = rows.begin()->size();
  BitMatrix m(0, cols);
  for (std::string_view r : rows) {
    if (r.size() != cols) throw std::invalid_argument("BitMatrix: ragged rows");
    m.append_row(BitVector::from_string(r));
  }
  return m;
}

bool BitMatrix::get(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw std::out_of_range("BitMatrix::get");
  return (data_[r * stride_ + c / kWordBits] >> (c % kWordBits)) & 1U;
}

void BitMatrix::set(std::size_t r, std::size_t c, bool value) {
  if (r >= rows_ || c >= cols_) throw std::out_of_range("BitMatrix::set");
  Word& w = data_[r * stride_ + c / kWordBits];
  const Word bit = Word{1} << (c % kWordBits);
  w = value ? (w | bit) : (w & ~bit);
}

BitVector BitMatrix::row_vector(std::size_t r) const {
  if (r >= rows_) throw std::out_of_range("BitMatrix::row_vector");
  return BitVector::from_words(row(r), cols_);
}

void BitMatrix::append_row(std::span<const Word> words) {
  if (words.size() < stride_) throw std::invalid_argument("BitMatrix::append_row: short row");
  data_.insert(data_.end(), words.begin(), words.begin() + static_cast<std::ptrdiff_t>(stride_));
  if (stride_ > 0) data_.back() &= tail_mask(cols_);
  ++rows_;
}

void BitMatrix::append_row(const BitVector& v) {
  if (v.size() != cols_) throw std::invalid_argument("BitMatrix::append_row: dimension mismatch");
  append_row(v.words());
}

void BitMatrix::swap_rows(std::size_t a, std::size_t b) noexcept {
  if (a == b) return;
  std::swap_ranges(data_.begin() + static_cast<std::ptrdiff_t>(a * stride_),
                   data_.begin() + static_cast<std::ptrdiff_t>((a + 1) * stride_),
                   data_.begin() + static_cast<std::ptrdiff_t>(b * stride_));
}

void BitMatrix::add_row(std::size_t src, std::size_t dst) noexcept {
  xor_words(row(dst), row(src));
}

BitMatrix BitMatrix::select_rows(std::span<const std::size_t> indices) const {
  BitMatrix out(0, cols_);
  out.reserve_rows(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows_) throw std::out_of_range("BitMatrix::select_rows");
    out.append_row(row(i));
  }
  return out;
}

BitMatrix BitMatrix::transpose() const {
  BitMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto src = row(r);
    for (std::size_t w = 0; w < stride_; ++w) {
      Word bits = src[w];
      while (bits != 0) {
        const std::size_t c = w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
        t.data_[c * t.stride_ + r / kWordBits] |= Word{1} << (r % kWordBits);
        bits &= bits - 1;
      }
    }
  }
  return t;
}

BitMatrix BitMatrix::multiply(const BitMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("BitMatrix::multiply: dimension mismatch");
  BitMatrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto src = row(r);
    auto dst = out.row(r);
    for (std::size_t w = 0; w < stride_; ++w) {
      Word bits = src[w];
      while (bits != 0) {
        const std::size_t k = w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
        xor_words(dst, rhs.row(k));
        bits &= bits - 1;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- elimination

namespace {

// Forward Gauss-Jordan elimination on `m` (and `payloads`, if non-empty).
// Returns the pivot row count; pivot_cols[i] is the column of pivot row i.
std::size_t reduce(BitMatrix& m, std::vector<BitVector>* payloads,
                   std::vector<std::size_t>& pivot_cols) {
  std::size_t next = 0;
  for (std::size_t c = 0; c < m.cols() && next < m.rows(); ++c) {
    const std::size_t w = c / kWordBits;
    const Word bit = Word{1} << (c % kWordBits);
    std::size_t pivot = npos;
    for (std::size_t r = next; r < m.rows(); ++r) {
      if (m.row(r)[w] & bit) {
        pivot = r;
        break;
      }
    }
    if (pivot == npos) continue;
    m.swap_rows(pivot, next);
    if (payloads) std::swap((*payloads)[pivot], (*payloads)[next]);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r != next && (m.row(r)[w] & bit)) {
        m.add_row(next, r);
        if (payloads) (*payloads)[r] ^= (*payloads)[next];
      }
    }
    pivot_cols.push_back(c);
    ++next;
  }
  return next;
}

}  // namespace

std::size_t rank(const BitMatrix& m) {
  if (m.empty()) return 0;
  BitMatrix work = m;
  std::vector<std::size_t> pivots;
  return reduce(work, nullptr, pivots);
}

DecodeResult eliminate_decode(const BitMatrix& m, std::span<const BitVector> payloads) {
  if (payloads.size() != m.rows()) {
    throw std::invalid_argument("eliminate_decode: payload count differs from matrix rows");
  }
  for (const auto& p : payloads) {
    if (p.size() != payloads.front().size()) {
      throw std::invalid_argument("eliminate_decode: payloads differ in dimension");
    }
  }

  BitMatrix work = m;
  std::vector<BitVector> rhs(payloads.begin(), payloads.end());
  std::vector<std::size_t> pivot_cols;
  DecodeResult result;
  result.rank = m.empty() ? 0 : reduce(work, &rhs, pivot_cols);

  if (result.rank < m.cols()) {
    std::size_t i = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (i < pivot_cols.size() && pivot_cols[i] == c) {
        ++i;
      } else {
        result.missing_pivots.push_back(c);
      }
    }
    return result;
  }
  for (std::size_t r = result.rank; r < rhs.size(); ++r) {
    if (rhs[r].any()) throw std::invalid_argument("eliminate_decode: inconsistent system");
  }
  rhs.resize(result.rank, BitVector(payloads.empty() ? 1 : payloads.front().size()));
  result.messages = std::move(rhs);
  return result;
}

// ---------------------------------------------------------------- random

void fill_random(std::span<Word> out, std::size_t bits, Rng& rng) {
  const std::size_t n = words_for(bits);
  for (std::size_t w = 0; w < n; ++w) out[w] = rng();
  if (n > 0) out[n - 1] &= tail_mask(bits);
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), Word{0});
}

BitVector random_row(std::size_t len, Rng& rng) {
  BitVector v(len);
  fill_random(v.words(), len, rng);
  return v;
}

BitMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  BitMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) fill_random(m.row(r), cols, rng);
  return m;
}

// ---------------------------------------------------------------- EchelonBasis

EchelonBasis::EchelonBasis(std::size_t cols, std::size_t payload_bits)
    : cols_(cols),
      stride_(words_for(cols)),
      payload_bits_(payload_bits),
      payload_stride_(words_for(payload_bits)),
      slot_of_(cols, kNone),
      pivot_of_(cols, kNone),
      pivot_mask_(stride_, 0),
      scratch_(stride_),
      scratch_payload_(payload_stride_) {
  rows_.reserve(cols * stride_);
  payloads_.reserve(cols * payload_stride_);
}

// Rows are zero before their pivot word, and the rows whose pivots share a
// word are reduced against each other inside that word. Reducing a vector
// word by word therefore needs exactly the rows of the pivot bits it has set
// in the current word.
bool EchelonBasis::insert(std::span<const Word> row, std::span<const Word> payload) {
  if (rank_ == cols_) return false;
  std::copy_n(row.begin(), stride_, scratch_.begin());
  const bool with_payload = payload_stride_ > 0 && !payload.empty();
  if (with_payload) std::copy_n(payload.begin(), payload_stride_, scratch_payload_.begin());
  Word* __restrict dst = scratch_.data();
  const std::size_t stride = stride_;

  for (std::size_t w = 0; w < stride; ++w) {
    for (Word m = dst[w] & pivot_mask_[w]; m != 0; m &= m - 1) {
      const std::uint32_t slot = slot_of_[w * kWordBits + static_cast<std::size_t>(std::countr_zero(m))];
      const Word* __restrict src = rows_.data() + slot * stride;
      for (std::size_t i = w; i < stride; ++i) dst[i] ^= src[i];
      if (with_payload) xor_words(scratch_payload_, {payloads_.data() + slot * payload_stride_, payload_stride_});
    }
    if (dst[w] == 0) continue;

    const std::size_t c = w * kWordBits + static_cast<std::size_t>(std::countr_zero(dst[w]));
    const Word bit = Word{1} << (c % kWordBits);
    if (payload_stride_ > 0 && !with_payload) std::fill(scratch_payload_.begin(), scratch_payload_.end(), Word{0});
    for (Word m = pivot_mask_[w]; m != 0; m &= m - 1) {
      const std::uint32_t slot = slot_of_[w * kWordBits + static_cast<std::size_t>(std::countr_zero(m))];
      Word* __restrict r = rows_.data() + slot * stride;
      if ((r[w] & bit) == 0) continue;
      for (std::size_t i = w; i < stride; ++i) r[i] ^= dst[i];
      if (payload_stride_ > 0) {
        xor_words({payloads_.data() + slot * payload_stride_, payload_stride_}, scratch_payload_);
      }
    }
    slot_of_[c] = static_cast<std::uint32_t>(rank_);
    pivot_of_[rank_] = static_cast<std::uint32_t>(c);
    pivot_mask_[w] |= bit;
    rows_.insert(rows_.end(), scratch_.begin(), scratch_.end());
    if (payload_stride_ > 0) payloads_.insert(payloads_.end(), scratch_payload_.begin(), scratch_payload_.end());
    ++rank_;
    return true;
  }
  return false;
}

bool EchelonBasis::contains(std::span<const Word> row) const {
  std::vector<Word> work(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(stride_));
  for (std::size_t w = 0; w < stride_; ++w) {
    for (Word m = work[w] & pivot_mask_[w]; m != 0; m &= m - 1) {
      const std::uint32_t slot = slot_of_[w * kWordBits + static_cast<std::size_t>(std::countr_zero(m))];
      const Word* src = rows_.data() + slot * stride_;
      for (std::size_t i = w; i < stride_; ++i) work[i] ^= src[i];
    }
    if (work[w] != 0) return false;
  }
  return true;
}

std::vector<BitVector> EchelonBasis::solve() const {
  if (!full()) throw std::logic_error("EchelonBasis::solve: basis is not full rank");
  if (payload_bits_ == 0) throw std::logic_error("EchelonBasis::solve: payloads not tracked");
  std::vector<BitVector> x(cols_, BitVector(payload_bits_));
  for (std::size_t c = cols_; c-- > 0;) {
    const std::uint32_t slot = slot_of_[c];
    auto& xc = x[c];
    std::copy_n(payloads_.begin() + static_cast<std::ptrdiff_t>(slot * payload_stride_),
                payload_stride_, xc.words().begin());
    const Word* r = rows_.data() + slot * stride_;
    for (std::size_t w = c / kWordBits; w < stride_; ++w) {
      Word bits = r[w];
      if (w == c / kWordBits) bits &= ~((Word{2} << (c % kWordBits)) - 1);  // strictly above c
      while (bits != 0) {
        const std::size_t j = w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
        xc ^= x[j];
        bits &= bits - 1;
      }
    }
  }
  return x;
}

}  // namespace ncdelay::gf2

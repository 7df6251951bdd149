#pragma once

// Naive reference implementations used to cross-check the packed code.

#include <cstddef>
#include <vector>

#include "ncdelay/gf2.hpp"

namespace testutil {

using Dense = std::vector<std::vector<int>>;

inline Dense to_dense(const ncdelay::gf2::BitMatrix& m) {
  Dense d(m.rows(), std::vector<int>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) d[r][c] = m.get(r, c) ? 1 : 0;
  return d;
}

inline std::size_t naive_rank(Dense d) {
  if (d.empty()) return 0;
  const std::size_t cols = d[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < d.size(); ++c) {
    std::size_t piv = rank;
    while (piv < d.size() && d[piv][c] == 0) ++piv;
    if (piv == d.size()) continue;
    std::swap(d[piv], d[rank]);
    for (std::size_t r = 0; r < d.size(); ++r) {
      if (r != rank && d[r][c]) {
        for (std::size_t j = 0; j < cols; ++j) d[r][j] ^= d[rank][j];
      }
    }
    ++rank;
  }
  return rank;
}

inline std::size_t naive_rank(const ncdelay::gf2::BitMatrix& m) { return naive_rank(to_dense(m)); }

}  // namespace testutil

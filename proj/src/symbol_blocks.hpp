#pragma once

// Helpers shared by the solver sources: corner blocks of a partitioned
// symbol, frequency shifts and Taylor vectors.

#include <algorithm>

#include "superopt/fourier_symbols.hpp"

namespace superopt::detail {

inline MatrixSymbol corner(const MatrixSymbol& s, int r0, int c0, int nr, int nc) {
  return s.block(r0, c0, nr, nc, BlockPartition{nr, 0, nc, 0});
}

/// Row block [r0, r0 + nr) of a column symbol, as an nr x 1 column.
inline MatrixSymbol rows_of(const MatrixSymbol& column, int r0, int nr) {
  return column.block(r0, 0, nr, 1, BlockPartition{nr, 0, 1, 0});
}

/// z^s * sym.
inline MatrixSymbol shifted(const MatrixSymbol& sym, int s) {
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : sym.coeffs()) out[k + s] = c;
  return MatrixSymbol(sym.partition(), std::move(out));
}

/// Taylor coefficients (k >= 0) of entry (i, j).
inline CVector taylor_entry(const MatrixSymbol& sym, int i, int j) {
  CVector c = CVector::Zero(sym.positive_degree() + 1);
  for (const auto& [k, m] : sym.coeffs()) {
    if (k >= 0) c(k) = m(i, j);
  }
  return c;
}

/// Embeds an m1 x n1 grid into the top-left corner of m x n zero matrices.
inline MatrixGrid embed_corner(const MatrixGrid& q, int m, int n) {
  MatrixGrid out(q.size());
  for (std::size_t l = 0; l < q.size(); ++l) {
    out[l] = CMatrix::Zero(m, n);
    out[l].topLeftCorner(q[l].rows(), q[l].cols()) = q[l];
  }
  return out;
}

inline MatrixGrid corner(const MatrixGrid& g, int r0, int c0, int nr, int nc) {
  MatrixGrid out(g.size());
  for (std::size_t l = 0; l < g.size(); ++l) out[l] = g[l].block(r0, c0, nr, nc);
  return out;
}

}  // namespace superopt::detail

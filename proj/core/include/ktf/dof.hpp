#pragma once

#include "ktf/penalty.hpp"

#include <vector>

namespace ktf {

/// Penalty rows judged nonzero at the fit, under a tolerance relative to the
/// largest penalty magnitude.
struct ActiveSet {
    std::vector<Index> rows;  // sorted
    double tol = 0.0;
};

ActiveSet active_set(const GridSignal& fit, const KroneckerPenalty& penalty, double tol);

/// One maximal polynomial run on an axis-aligned line, padded by k border
/// sites; `knowns` counts sites already pinned by neighboring pieces.
struct Piece {
    int axis = 0;       // 1-based
    Index base = 0;     // flat index of the line's first site
    Index stride = 0;
    int start = 0, end = 0;  // 1-based positions along the line, inclusive
    int knowns = 0;
    bool set = false;

    int length() const { return end - start + 1; }
};

struct PieceTable {
    std::vector<Piece> pieces;
    std::vector<std::vector<int>> site_pieces;  // per flat site, piece ids
    std::vector<uint8_t> site_set;
};

/// Build the per-line polynomial pieces from an active-row mask laid out in
/// penalty row order. Lines shorter than k+2 carry no tests and become one
/// whole-line piece.
PieceTable make_polynomial_pieces(const KroneckerPenalty& penalty,
                                  const std::vector<uint8_t>& active_rows);

/// nullity(D_{-A}) by polynomial-piece spreading in O(ndk) time; unbiased
/// degrees-of-freedom estimate of the fit.
Index dof_estimate(const GridSignal& fit, int k, double tol = 1e-8);
Index dof_estimate(const KroneckerPenalty& penalty, const std::vector<uint8_t>& active_rows);

/// Dense-rank oracle: assembles D_{-A} and returns n - rank (relative rank
/// tolerance 1e-9). Test scale only (n <= 5000).
Index dof_oracle_dense(const GridSignal& fit, int k, double tol = 1e-8);
Index dof_oracle_dense(const KroneckerPenalty& penalty, const std::vector<uint8_t>& active_rows);

/// Shared thresholding: |(D fit)_r| > tol * max(1, ||D fit||_inf).
std::vector<uint8_t> active_row_mask(const GridSignal& fit, const KroneckerPenalty& penalty,
                                     double tol);

}  // namespace ktf

#pragma once

#include "ktf/lattice.hpp"

#include <optional>
#include <vector>

namespace ktf {

/// Banded order-`order` difference operator on one axis: (N-order) rows,
/// row r supported on columns r..r+order. Uniform designs give the pure
/// binomial stencil; general designs use the gap-weighted recursion
/// normalized so the uniform case reduces to pure differences.
struct Diff1d {
    int N = 0;
    int order = 0;
    std::vector<double> design;
    // rows() x (order+1), row-major
    std::vector<double> coef;

    int rows() const { return N > order ? N - order : 0; }
    const double* row(int r) const { return coef.data() + static_cast<size_t>(r) * (order + 1); }

    /// theta (length N) -> differences (length rows())
    void apply(const double* theta, Index tstride, double* out, Index ostride) const;
    /// adjoint scatter-add: out += D^T v
    void apply_transpose_add(const double* v, Index vstride, double* out, Index ostride) const;
};

Diff1d build_diff_1d(const std::vector<double>& design, int order);

/// The Kronecker penalty operator of a given order (the KTF penalty has
/// order k+1): d row blocks, block j applying the axis-j Diff1d along every
/// axis-j line. Matrix-free; row blocks ordered by axis, rows within a block
/// lexicographic in the retained multi-indices (last axis fastest).
class KroneckerPenalty {
  public:
    KroneckerPenalty() = default;
    KroneckerPenalty(LatticeShape shape, int order);
    static KroneckerPenalty for_ktf(const LatticeShape& shape, int k) {
        return KroneckerPenalty(shape, k + 1);
    }

    const LatticeShape& shape() const { return shape_; }
    int order() const { return order_; }
    int k() const { return order_ - 1; }
    const Diff1d& axis_op(int axis) const { return ops_[static_cast<size_t>(axis - 1)]; }

    Index rows() const { return m_; }
    Index block_rows(int axis) const { return block_rows_[static_cast<size_t>(axis - 1)]; }
    Index block_offset(int axis) const { return block_off_[static_cast<size_t>(axis - 1)]; }

    void apply(const GridSignal& theta, std::vector<double>& out) const;
    std::vector<double> apply(const GridSignal& theta) const;
    GridSignal apply_transpose(const std::vector<double>& v) const;
    void apply_transpose_add(const std::vector<double>& v, GridSignal& out) const;

    double ktv(const GridSignal& theta) const;
    /// (order)^d null-space dimension; degenerate axes (N_j < order) refuse.
    Index nullity() const;
    /// max over columns of the l1 norm of |D|; equals 2^order * d on uniform
    /// lattices with every N_j >= 2*order+1.
    double max_row_l1() const;

  private:
    LatticeShape shape_;
    int order_ = 0;
    std::vector<Diff1d> ops_;
    std::vector<Index> block_rows_, block_off_;
    Index m_ = 0;
};

/// Proposition-6 split D^(k+1) = M . D^(j): `inner` is the order-j Kronecker
/// penalty (j=0: d stacked identities) and M applies order-(k+1-j)
/// differences line-wise inside each axis block. Uniform lattices only.
struct PenaltySplit {
    int j = 0;
    int k = 0;
    LatticeShape shape;
    std::optional<KroneckerPenalty> inner;  // engaged iff j >= 1
    // Lattice carrying block l of the inner output (axis-l extent N_l - j).
    std::vector<LatticeShape> block_shapes;
    std::vector<Index> block_off;        // into the stacked inner output
    std::vector<Index> outer_block_off;  // into the full-penalty row space
    Index inner_rows = 0;
    Index outer_rows = 0;
    int outer_order = 0;  // k+1-j
    // Order-(k+1-j) line operator per axis block; identity when outer_order=0.
    std::vector<Diff1d> outer_ops;

    bool inner_is_identity_stack() const { return j == 0; }

    std::vector<double> inner_apply(const GridSignal& theta) const;
    GridSignal inner_apply_transpose(const std::vector<double>& w) const;
    /// M w — output rows in full-penalty order.
    std::vector<double> outer_apply(const std::vector<double>& w) const;
};

PenaltySplit decompose(const KroneckerPenalty& penalty, int j);

}  // namespace ktf

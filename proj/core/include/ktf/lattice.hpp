#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ktf {

using Index = std::int64_t;

/// Cartesian lattice: per-axis counts N_j and strictly increasing design
/// points z_{.j}. Uniform axes use z_i = i/N_j, i = 1..N_j.
struct LatticeShape {
    std::vector<int> dims;
    std::vector<std::vector<double>> designs;
    bool uniform = true;  // every axis evenly spaced

    LatticeShape() = default;

    static LatticeShape make_uniform(std::vector<int> dims);
    static LatticeShape make_general(std::vector<std::vector<double>> designs);

    int d() const { return static_cast<int>(dims.size()); }
    Index n() const;
    /// Flat-index strides, last axis fastest (stride of the last axis is 1).
    std::vector<Index> strides() const;

    bool operator==(const LatticeShape& o) const {
        return dims == o.dims && designs == o.designs;
    }
};

/// 1-based lattice coordinates, one per axis.
struct MultiIndex {
    std::vector<int> coords;
};

/// One real value per lattice site, vectorized last-axis-fastest
/// (lexicographic over (i_1,...,i_d) with i_d moving quickest).
struct GridSignal {
    LatticeShape shape;
    std::vector<double> values;

    GridSignal() = default;
    GridSignal(LatticeShape s, std::vector<double> v);
    static GridSignal zeros(const LatticeShape& s);

    Index n() const { return static_cast<Index>(values.size()); }
    double& operator[](Index i) { return values[static_cast<size_t>(i)]; }
    double operator[](Index i) const { return values[static_cast<size_t>(i)]; }
};

Index flat_index(const LatticeShape& shape, const MultiIndex& idx);
MultiIndex multi_index(const LatticeShape& shape, Index flat);

/// Order-fold one-step forward difference along `axis` (1-based). Entries
/// where the full stencil runs off the lattice are zero; order 0 is identity.
GridSignal forward_diff(const GridSignal& signal, int axis, int order);

/// All axis-aligned lines for `axis` (1-based), each listing its sites in
/// increasing coordinate order; together they partition the index set.
std::vector<std::vector<Index>> lines(const LatticeShape& shape, int axis);

/// Line = arithmetic progression base + t*stride, t = 0..count-1. Lines are
/// visited in lexicographic order of the remaining coordinates.
void for_each_line(const LatticeShape& shape, int axis,
                   const std::function<void(Index base, Index stride, int count)>& fn);

/// Same walk, also tracking the base offset in a lattice whose `axis` extent
/// is replaced by `reduced_extent` (used to scatter per-line outputs).
void for_each_line_reduced(const LatticeShape& shape, int axis, int reduced_extent,
                           const std::function<void(Index base, Index stride, int count,
                                                    Index rbase, Index rstride)>& fn);

}  // namespace ktf

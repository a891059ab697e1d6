#include "ktf/penalty.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ktf {

void Diff1d::apply(const double* theta, Index tstride, double* out, Index ostride) const {
    const int p = rows();
    for (int r = 0; r < p; ++r) {
        const double* w = row(r);
        double acc = 0.0;
        for (int c = 0; c <= order; ++c) acc += w[c] * theta[(r + c) * tstride];
        out[r * ostride] = acc;
    }
}

void Diff1d::apply_transpose_add(const double* v, Index vstride, double* out, Index ostride) const {
    const int p = rows();
    for (int r = 0; r < p; ++r) {
        const double* w = row(r);
        const double vr = v[r * vstride];
        for (int c = 0; c <= order; ++c) out[(r + c) * ostride] += w[c] * vr;
    }
}

Diff1d build_diff_1d(const std::vector<double>& design, int order) {
    if (order < 1) throw std::invalid_argument("build_diff_1d: order must be >= 1");
    for (size_t i = 0; i + 1 < design.size(); ++i) {
        if (!(design[i] < design[i + 1]))
            throw std::invalid_argument("build_diff_1d: design must be strictly increasing");
    }
    Diff1d D;
    D.N = static_cast<int>(design.size());
    D.order = order;
    D.design = design;
    if (D.N <= order) return D;  // empty operator

    // Mean gap sets the scale: the uniform case reduces to pure differences.
    const double hbar = (D.N > 1) ? (design.back() - design.front()) / (D.N - 1) : 1.0;

    // D^(1) rows (-1, 1)
    std::vector<double> cur(static_cast<size_t>(D.N - 1) * 2);
    for (int r = 0; r < D.N - 1; ++r) {
        cur[static_cast<size_t>(r) * 2 + 0] = -1.0;
        cur[static_cast<size_t>(r) * 2 + 1] = 1.0;
    }
    // D^(m+1) = D1 . diag(m*hbar / (z_{i+m} - z_i)) . D^(m)
    for (int m = 1; m < order; ++m) {
        const int pm = D.N - m;      // rows of D^(m)
        const int pn = D.N - m - 1;  // rows of D^(m+1)
        std::vector<double> next(static_cast<size_t>(pn) * (m + 2), 0.0);
        for (int r = 0; r < pn; ++r) {
            const double wlo = m * hbar / (design[static_cast<size_t>(r + m)] - design[static_cast<size_t>(r)]);
            const double whi = m * hbar / (design[static_cast<size_t>(r + 1 + m)] - design[static_cast<size_t>(r + 1)]);
            double* dst = next.data() + static_cast<size_t>(r) * (m + 2);
            const double* lo = cur.data() + static_cast<size_t>(r) * (m + 1);
            const double* hi = cur.data() + static_cast<size_t>(r + 1) * (m + 1);
            for (int c = 0; c <= m; ++c) dst[c] -= wlo * lo[c];
            for (int c = 0; c <= m; ++c) dst[c + 1] += whi * hi[c];
        }
        cur = std::move(next);
        (void)pm;
    }
    D.coef = std::move(cur);
    return D;
}

KroneckerPenalty::KroneckerPenalty(LatticeShape shape, int order)
    : shape_(std::move(shape)), order_(order) {
    if (order_ < 1) throw std::invalid_argument("penalty: order must be >= 1");
    const int d = shape_.d();
    ops_.reserve(static_cast<size_t>(d));
    block_rows_.resize(static_cast<size_t>(d));
    block_off_.resize(static_cast<size_t>(d));
    Index off = 0;
    for (int j = 0; j < d; ++j) {
        ops_.push_back(build_diff_1d(shape_.designs[static_cast<size_t>(j)], order_));
        Index lines = 1;
        for (int l = 0; l < d; ++l)
            if (l != j) lines *= shape_.dims[static_cast<size_t>(l)];
        block_rows_[static_cast<size_t>(j)] = static_cast<Index>(ops_.back().rows()) * lines;
        block_off_[static_cast<size_t>(j)] = off;
        off += block_rows_[static_cast<size_t>(j)];
    }
    m_ = off;
}

void KroneckerPenalty::apply(const GridSignal& theta, std::vector<double>& out) const {
    if (!(theta.shape == shape_)) throw std::invalid_argument("penalty apply: shape mismatch");
    out.assign(static_cast<size_t>(m_), 0.0);
    for (int axis = 1; axis <= shape_.d(); ++axis) {
        const Diff1d& D = ops_[static_cast<size_t>(axis - 1)];
        if (D.rows() == 0) continue;
        double* block = out.data() + block_off_[static_cast<size_t>(axis - 1)];
        for_each_line_reduced(shape_, axis, D.rows(),
                              [&](Index base, Index stride, int, Index rbase, Index rstride) {
                                  D.apply(theta.values.data() + base, stride, block + rbase, rstride);
                              });
    }
}

std::vector<double> KroneckerPenalty::apply(const GridSignal& theta) const {
    std::vector<double> out;
    apply(theta, out);
    return out;
}

void KroneckerPenalty::apply_transpose_add(const std::vector<double>& v, GridSignal& out) const {
    if (static_cast<Index>(v.size()) != m_) throw std::invalid_argument("penalty adjoint: length mismatch");
    for (int axis = 1; axis <= shape_.d(); ++axis) {
        const Diff1d& D = ops_[static_cast<size_t>(axis - 1)];
        if (D.rows() == 0) continue;
        const double* block = v.data() + block_off_[static_cast<size_t>(axis - 1)];
        for_each_line_reduced(shape_, axis, D.rows(),
                              [&](Index base, Index stride, int, Index rbase, Index rstride) {
                                  D.apply_transpose_add(block + rbase, rstride,
                                                        out.values.data() + base, stride);
                              });
    }
}

GridSignal KroneckerPenalty::apply_transpose(const std::vector<double>& v) const {
    GridSignal out = GridSignal::zeros(shape_);
    apply_transpose_add(v, out);
    return out;
}

double KroneckerPenalty::ktv(const GridSignal& theta) const {
    if (!(theta.shape == shape_)) throw std::invalid_argument("ktv: shape mismatch");
    double s = 0.0;
    std::vector<double> buf;
    for (int axis = 1; axis <= shape_.d(); ++axis) {
        const Diff1d& D = ops_[static_cast<size_t>(axis - 1)];
        if (D.rows() == 0) continue;
        buf.resize(static_cast<size_t>(D.rows()));
        for_each_line(shape_, axis, [&](Index base, Index stride, int) {
            D.apply(theta.values.data() + base, stride, buf.data(), 1);
            for (int r = 0; r < D.rows(); ++r) s += std::abs(buf[static_cast<size_t>(r)]);
        });
    }
    return s;
}

Index KroneckerPenalty::nullity() const {
    Index nl = 1;
    for (int j = 0; j < shape_.d(); ++j) {
        if (shape_.dims[static_cast<size_t>(j)] < order_)
            throw std::domain_error("nullity: degenerate lattice (N_j < k+1); use the dense DoF oracle");
        nl *= order_;
    }
    return nl;
}

double KroneckerPenalty::max_row_l1() const {
    GridSignal acc = GridSignal::zeros(shape_);
    for (int axis = 1; axis <= shape_.d(); ++axis) {
        const Diff1d& D = ops_[static_cast<size_t>(axis - 1)];
        if (D.rows() == 0) continue;
        for_each_line(shape_, axis, [&](Index base, Index stride, int) {
            for (int r = 0; r < D.rows(); ++r) {
                const double* w = D.row(r);
                for (int c = 0; c <= D.order; ++c)
                    acc[base + (r + c) * stride] += std::abs(w[c]);
            }
        });
    }
    double mx = 0.0;
    for (double v : acc.values) mx = std::max(mx, v);
    return mx;
}

PenaltySplit decompose(const KroneckerPenalty& penalty, int j) {
    const int k = penalty.k();
    if (j < 0 || j > k + 1) throw std::out_of_range("decompose: split index out of range");
    if (j >= 1 && !penalty.shape().uniform)
        throw std::invalid_argument("decompose: splits with j >= 1 need a uniform lattice");

    PenaltySplit s;
    s.j = j;
    s.k = k;
    s.shape = penalty.shape();
    s.outer_order = k + 1 - j;
    s.outer_rows = penalty.rows();
    const int d = s.shape.d();

    if (j >= 1) s.inner.emplace(s.shape, j);

    Index off = 0, out_off = 0;
    for (int l = 0; l < d; ++l) {
        LatticeShape bs = s.shape;
        const int reduced = std::max(0, bs.dims[static_cast<size_t>(l)] - j);
        bs.dims[static_cast<size_t>(l)] = reduced;
        if (j > 0 && reduced > 0) bs = LatticeShape::make_uniform(bs.dims);
        s.block_shapes.push_back(bs);
        s.block_off.push_back(off);
        s.outer_block_off.push_back(out_off);
        off += bs.n();
        if (s.outer_order >= 1 && reduced > 0) {
            // j = 0 keeps the true axis design; reduced axes are uniform
            const std::vector<double> des =
                (j == 0) ? s.shape.designs[static_cast<size_t>(l)]
                         : LatticeShape::make_uniform({reduced}).designs[0];
            s.outer_ops.push_back(build_diff_1d(des, s.outer_order));
        } else {
            s.outer_ops.push_back(Diff1d{});
        }
        if (bs.n() > 0) {
            if (s.outer_order == 0) {
                out_off += bs.n();
            } else if (s.outer_ops.back().rows() > 0) {
                out_off += static_cast<Index>(s.outer_ops.back().rows()) *
                           (bs.n() / bs.dims[static_cast<size_t>(l)]);
            }
        }
    }
    s.inner_rows = off;
    return s;
}

std::vector<double> PenaltySplit::inner_apply(const GridSignal& theta) const {
    std::vector<double> out(static_cast<size_t>(inner_rows), 0.0);
    if (j == 0) {
        const Index n = theta.n();
        for (int l = 0; l < shape.d(); ++l)
            std::memcpy(out.data() + block_off[static_cast<size_t>(l)], theta.values.data(),
                        sizeof(double) * static_cast<size_t>(n));
        return out;
    }
    inner->apply(theta, out);
    return out;
}

GridSignal PenaltySplit::inner_apply_transpose(const std::vector<double>& w) const {
    if (j == 0) {
        GridSignal out = GridSignal::zeros(shape);
        const Index n = out.n();
        for (int l = 0; l < shape.d(); ++l) {
            const double* blk = w.data() + block_off[static_cast<size_t>(l)];
            for (Index i = 0; i < n; ++i) out[i] += blk[i];
        }
        return out;
    }
    return inner->apply_transpose(w);
}

std::vector<double> PenaltySplit::outer_apply(const std::vector<double>& w) const {
    if (static_cast<Index>(w.size()) != inner_rows)
        throw std::invalid_argument("outer_apply: length mismatch");
    std::vector<double> out(static_cast<size_t>(outer_rows), 0.0);
    for (int l = 0; l < shape.d(); ++l) {
        const LatticeShape& bs = block_shapes[static_cast<size_t>(l)];
        if (bs.n() == 0) continue;
        const double* blk = w.data() + block_off[static_cast<size_t>(l)];
        if (outer_order == 0) {
            std::memcpy(out.data() + outer_block_off[static_cast<size_t>(l)], blk,
                        sizeof(double) * static_cast<size_t>(bs.n()));
            continue;
        }
        const Diff1d& D = outer_ops[static_cast<size_t>(l)];
        if (D.rows() == 0) continue;
        double* oblk = out.data() + outer_block_off[static_cast<size_t>(l)];
        for_each_line_reduced(bs, l + 1, D.rows(),
                              [&](Index base, Index stride, int, Index rbase, Index rstride) {
                                  D.apply(blk + base, stride, oblk + rbase, rstride);
                              });
    }
    return out;
}

}  // namespace ktf

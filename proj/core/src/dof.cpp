#include "ktf/dof.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ktf {

std::vector<uint8_t> active_row_mask(const GridSignal& fit, const KroneckerPenalty& penalty,
                                     double tol) {
    if (tol < 0) throw std::invalid_argument("active_set: negative tolerance");
    const std::vector<double> v = penalty.apply(fit);
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    const double cut = tol * std::max(1.0, vmax);
    std::vector<uint8_t> mask(v.size(), 0);
    for (size_t i = 0; i < v.size(); ++i) mask[i] = std::abs(v[i]) > cut ? 1 : 0;
    return mask;
}

ActiveSet active_set(const GridSignal& fit, const KroneckerPenalty& penalty, double tol) {
    ActiveSet A;
    A.tol = tol;
    const auto mask = active_row_mask(fit, penalty, tol);
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) A.rows.push_back(static_cast<Index>(i));
    return A;
}

PieceTable make_polynomial_pieces(const KroneckerPenalty& penalty,
                                  const std::vector<uint8_t>& active_rows) {
    if (static_cast<Index>(active_rows.size()) != penalty.rows())
        throw std::invalid_argument("make_polynomial_pieces: mask length mismatch");
    const LatticeShape& shape = penalty.shape();
    const int k = penalty.k();

    PieceTable T;
    T.site_pieces.assign(static_cast<size_t>(shape.n()), {});
    T.site_set.assign(static_cast<size_t>(shape.n()), 0);

    for (int axis = 1; axis <= shape.d(); ++axis) {
        const Diff1d& D = penalty.axis_op(axis);
        const int tests = D.rows();  // N' = N - k - 1 when positive
        const uint8_t* block = active_rows.data() + penalty.block_offset(axis);
        const int N = shape.dims[static_cast<size_t>(axis - 1)];

        for_each_line_reduced(
            shape, axis, std::max(tests, 0),
            [&](Index base, Index stride, int, Index rbase, Index rstride) {
                auto add_piece = [&](int start, int end) {
                    Piece p;
                    p.axis = axis;
                    p.base = base;
                    p.stride = stride;
                    p.start = start;
                    p.end = std::min(end, N);
                    const int id = static_cast<int>(T.pieces.size());
                    for (int i = p.start; i <= p.end; ++i)
                        T.site_pieces[static_cast<size_t>(base + (i - 1) * stride)].push_back(id);
                    T.pieces.push_back(p);
                };
                if (tests <= 0) {
                    add_piece(1, N);  // nothing to test: the whole line is one piece
                    return;
                }
                auto vanishes = [&](int j) {  // 1-based test position
                    return block[rbase + (j - 1) * rstride] == 0;
                };
                int j = 1;
                while (j <= N) {
                    const int start = j;
                    int end = j;
                    while (j <= tests && vanishes(j)) ++j;
                    if (j != start) end = j + k;
                    add_piece(start, end);
                    ++j;
                }
            });
    }
    return T;
}

Index dof_estimate(const KroneckerPenalty& penalty, const std::vector<uint8_t>& active_rows) {
    const int k = penalty.k();
    PieceTable T = make_polynomial_pieces(penalty, active_rows);

    Index df = 0;
    std::vector<int> stack;
    for (int pid = 0; pid < static_cast<int>(T.pieces.size()); ++pid) {
        Piece& p = T.pieces[static_cast<size_t>(pid)];
        if (p.set) continue;
        df += std::max(0, std::min(p.length(), k + 1) - p.knowns);
        p.set = true;
        stack.push_back(pid);
        while (!stack.empty()) {
            const int qid = stack.back();
            stack.pop_back();
            const Piece q = T.pieces[static_cast<size_t>(qid)];
            for (int i = q.start; i <= q.end; ++i) {
                const Index site = q.base + static_cast<Index>(i - 1) * q.stride;
                if (T.site_set[static_cast<size_t>(site)]) continue;
                T.site_set[static_cast<size_t>(site)] = 1;
                for (int rid : T.site_pieces[static_cast<size_t>(site)]) {
                    Piece& r = T.pieces[static_cast<size_t>(rid)];
                    if (r.set) continue;
                    ++r.knowns;
                    if (r.knowns > k) {
                        r.set = true;
                        stack.push_back(rid);
                    }
                }
            }
        }
    }
    return df;
}

Index dof_estimate(const GridSignal& fit, int k, double tol) {
    const KroneckerPenalty penalty = KroneckerPenalty::for_ktf(fit.shape, k);
    return dof_estimate(penalty, active_row_mask(fit, penalty, tol));
}

Index dof_oracle_dense(const KroneckerPenalty& penalty, const std::vector<uint8_t>& active_rows) {
    const Index n = penalty.shape().n();
    if (n > 5000) throw std::domain_error("dof_oracle_dense: size cap exceeded (n <= 5000)");
    Index kept = 0;
    for (uint8_t a : active_rows)
        if (!a) ++kept;
    if (kept == 0) return n;

    Eigen::MatrixXd Dm = Eigen::MatrixXd::Zero(kept, n);
    // walk rows exactly like apply() and keep the inactive ones
    Index out_r = 0;
    const LatticeShape& shape = penalty.shape();
    for (int axis = 1; axis <= shape.d(); ++axis) {
        const Diff1d& D = penalty.axis_op(axis);
        if (D.rows() == 0) continue;
        const uint8_t* block = active_rows.data() + penalty.block_offset(axis);
        for_each_line_reduced(shape, axis, D.rows(),
                              [&](Index base, Index stride, int, Index rbase, Index rstride) {
                                  for (int r = 0; r < D.rows(); ++r) {
                                      if (block[rbase + r * rstride]) continue;
                                      const double* w = D.row(r);
                                      for (int c = 0; c <= D.order; ++c)
                                          Dm(out_r, base + (r + c) * stride) = w[c];
                                      ++out_r;
                                  }
                              });
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(1e-9);
    qr.compute(Dm);
    return n - static_cast<Index>(qr.rank());
}

Index dof_oracle_dense(const GridSignal& fit, int k, double tol) {
    const KroneckerPenalty penalty = KroneckerPenalty::for_ktf(fit.shape, k);
    return dof_oracle_dense(penalty, active_row_mask(fit, penalty, tol));
}

}  // namespace ktf

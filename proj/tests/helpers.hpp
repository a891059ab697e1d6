#pragma once

#include "ktf/dof.hpp"
#include "ktf/lattice.hpp"
#include "ktf/penalty.hpp"

#include <Eigen/Dense>

#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace ktf::testing {

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

/// Independent dense construction of the order-`order` difference matrix:
/// plain convolution recursion for uniform designs, gap-weighted recursion
/// (normalized by the mean gap) otherwise.
inline Eigen::MatrixXd dense_diff(const std::vector<double>& z, int order) {
    const int N = static_cast<int>(z.size());
    auto d1 = [](int n) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n - 1, n);
        for (int r = 0; r < n - 1; ++r) {
            D(r, r) = -1;
            D(r, r + 1) = 1;
        }
        return D;
    };
    if (N <= order) return Eigen::MatrixXd::Zero(0, N);
    Eigen::MatrixXd D = d1(N);
    const double hbar = (z.back() - z.front()) / (N - 1);
    for (int m = 1; m < order; ++m) {
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N - m, N - m);
        for (int i = 0; i < N - m; ++i)
            W(i, i) = m * hbar / (z[static_cast<size_t>(i + m)] - z[static_cast<size_t>(i)]);
        D = d1(N - m) * W * D;
    }
    return D;
}

/// Dense KTF penalty operator with the axis-1-first Kronecker convention.
inline Eigen::MatrixXd dense_penalty(const LatticeShape& shape, int order) {
    const int d = shape.d();
    std::vector<Eigen::MatrixXd> diffs, eyes;
    for (int j = 0; j < d; ++j) {
        diffs.push_back(dense_diff(shape.designs[static_cast<size_t>(j)], order));
        eyes.push_back(Eigen::MatrixXd::Identity(shape.dims[static_cast<size_t>(j)],
                                                 shape.dims[static_cast<size_t>(j)]));
    }
    Eigen::Index total_rows = 0;
    std::vector<Eigen::MatrixXd> blocks;
    for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd B = (j == 0) ? diffs[0] : eyes[0];
        for (int l = 1; l < d; ++l) B = kron(B, l == j ? diffs[static_cast<size_t>(l)] : eyes[static_cast<size_t>(l)]);
        total_rows += B.rows();
        blocks.push_back(std::move(B));
    }
    Eigen::MatrixXd D(total_rows, shape.n());
    Eigen::Index at = 0;
    for (const auto& B : blocks) {
        D.middleRows(at, B.rows()) = B;
        at += B.rows();
    }
    return D;
}

inline Eigen::MatrixXd dense_from_apply(const KroneckerPenalty& pen) {
    const Index n = pen.shape().n();
    Eigen::MatrixXd D(pen.rows(), n);
    GridSignal e = GridSignal::zeros(pen.shape());
    for (Index c = 0; c < n; ++c) {
        e[c] = 1.0;
        const std::vector<double> col = pen.apply(e);
        for (Index r = 0; r < pen.rows(); ++r) D(r, c) = col[static_cast<size_t>(r)];
        e[c] = 0.0;
    }
    return D;
}

inline GridSignal random_signal(const LatticeShape& shape, std::mt19937& rng, double lo = -1.0,
                                double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    GridSignal g = GridSignal::zeros(shape);
    for (double& v : g.values) v = dist(rng);
    return g;
}

/// Evaluations of a random polynomial with max per-axis degree k.
inline GridSignal random_max_degree_poly(const LatticeShape& shape, int k, std::mt19937& rng) {
    const int d = shape.d();
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> coef;
    Index terms = 1;
    for (int j = 0; j < d; ++j) terms *= (k + 1);
    for (Index t = 0; t < terms; ++t) coef.push_back(dist(rng));

    GridSignal g = GridSignal::zeros(shape);
    std::vector<int> site(static_cast<size_t>(d), 0);
    for (Index f = 0; f < g.n(); ++f) {
        double val = 0.0;
        std::vector<int> deg(static_cast<size_t>(d), 0);
        for (Index t = 0; t < terms; ++t) {
            double mono = coef[static_cast<size_t>(t)];
            for (int j = 0; j < d; ++j) {
                const double x =
                    shape.designs[static_cast<size_t>(j)][static_cast<size_t>(site[static_cast<size_t>(j)])];
                for (int a = 0; a < deg[static_cast<size_t>(j)]; ++a) mono *= x;
            }
            val += mono;
            for (int j = d - 1; j >= 0; --j) {
                if (++deg[static_cast<size_t>(j)] <= k) break;
                deg[static_cast<size_t>(j)] = 0;
            }
        }
        g[f] = val;
        for (int j = d - 1; j >= 0; --j) {
            if (++site[static_cast<size_t>(j)] < shape.dims[static_cast<size_t>(j)]) break;
            site[static_cast<size_t>(j)] = 0;
        }
    }
    return g;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const GridSignal& g) { return max_abs(g.values); }

/// 1-d signal whose order-(k+1) differences realize exactly the requested
/// nonzero pattern (forward substitution against the stencil).
inline GridSignal signal_from_pattern(int N, int k, const std::vector<int>& pattern,
                                      std::mt19937& rng) {
    const auto shape = LatticeShape::make_uniform({N});
    const Diff1d D = build_diff_1d(shape.designs[0], k + 1);
    if (static_cast<int>(pattern.size()) != D.rows())
        throw std::invalid_argument("signal_from_pattern: pattern length");
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::uniform_real_distribution<double> init(-1, 1);
    GridSignal g = GridSignal::zeros(shape);
    for (int i = 0; i < std::min(N, k + 1); ++i) g[i] = init(rng);
    for (int r = 0; r < D.rows(); ++r) {
        const double target = pattern[static_cast<size_t>(r)] ? mag(rng) : 0.0;
        const double* w = D.row(r);
        double acc = 0;
        for (int c = 0; c < k + 1; ++c) acc += w[c] * g[r + c];
        g[r + k + 1] = (target - acc) / w[k + 1];
    }
    return g;
}

/// Piecewise-polynomial test signal: polynomial trend plus a few random
/// half-space ramps (realizes nontrivial but feasible active patterns).
inline GridSignal random_piecewise_poly(const LatticeShape& shape, int k, std::mt19937& rng) {
    GridSignal g = random_max_degree_poly(shape, k, rng);
    std::uniform_int_distribution<int> axis_pick(1, shape.d());
    std::uniform_real_distribution<double> mag(-2, 2);
    const int jumps = 1 + static_cast<int>(rng() % 4);
    for (int t = 0; t < jumps; ++t) {
        const int axis = axis_pick(rng);
        const int N = shape.dims[static_cast<size_t>(axis - 1)];
        const int at = 1 + static_cast<int>(rng() % static_cast<unsigned>(N));
        const double step = mag(rng);
        for (Index f = 0; f < g.n(); ++f) {
            const MultiIndex m = multi_index(shape, f);
            const int c = m.coords[static_cast<size_t>(axis - 1)];
            if (c >= at) g[f] += step * std::pow(c - at + 1, std::min(k, 2));
        }
    }
    return g;
}

/// Connected components of the grid graph after deleting active edges
/// (independent check of the k=0 degrees of freedom).
inline int union_find_components(const GridSignal& fit, double tol) {
    const KroneckerPenalty pen = KroneckerPenalty::for_ktf(fit.shape, 0);
    const auto mask = active_row_mask(fit, pen, tol);
    const Index n = fit.shape.n();
    std::vector<Index> parent(static_cast<size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<Index(Index)> find = [&](Index a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] =
                parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    };
    for (int axis = 1; axis <= fit.shape.d(); ++axis) {
        const Diff1d& D = pen.axis_op(axis);
        if (D.rows() == 0) continue;
        const uint8_t* block = mask.data() + pen.block_offset(axis);
        for_each_line_reduced(fit.shape, axis, D.rows(),
                              [&](Index base, Index stride, int, Index rbase, Index rstride) {
                                  for (int r = 0; r < D.rows(); ++r) {
                                      if (block[rbase + r * rstride]) continue;
                                      const Index a = find(base + r * stride);
                                      const Index b = find(base + (r + 1) * stride);
                                      if (a != b) parent[static_cast<size_t>(a)] = b;
                                  }
                              });
    }
    std::vector<uint8_t> seen(static_cast<size_t>(n), 0);
    int comps = 0;
    for (Index i = 0; i < n; ++i) {
        const Index r = find(i);
        if (!seen[static_cast<size_t>(r)]) {
            seen[static_cast<size_t>(r)] = 1;
            ++comps;
        }
    }
    return comps;
}

}  // namespace ktf::testing

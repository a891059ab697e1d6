#include "ktf/spectral.hpp"

#include "ktf/dct.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace ktf {

namespace {

Eigen::MatrixXd dense_gram(const Diff1d& D) {
    const int N = D.N;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
    for (int r = 0; r < D.rows(); ++r) {
        const double* w = D.row(r);
        for (int a = 0; a <= D.order; ++a)
            for (int b = 0; b <= D.order; ++b) G(r + a, r + b) += w[a] * w[b];
    }
    return G;
}

/// Orthonormal polynomial basis (degrees 0..deg) on the given points.
Eigen::MatrixXd legendre_basis(const std::vector<double>& z, int deg) {
    const int N = static_cast<int>(z.size());
    const double lo = z.front(), hi = z.back();
    const double mid = 0.5 * (lo + hi), half = hi > lo ? 0.5 * (hi - lo) : 1.0;
    Eigen::MatrixXd V(N, deg + 1);
    for (int i = 0; i < N; ++i) {
        const double t = (z[static_cast<size_t>(i)] - mid) / half;
        double p = 1.0;
        for (int a = 0; a <= deg; ++a) {
            V(i, a) = p;
            p *= t;
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, deg + 1);
    // degree-a column should still have a positive leading coefficient
    Eigen::MatrixXd R = qr.matrixQR().topRows(deg + 1).triangularView<Eigen::Upper>();
    for (int a = 0; a <= deg; ++a)
        if (R(a, a) < 0) Q.col(a) = -Q.col(a);
    return Q;
}

void fix_sign(std::vector<double>& vectors, int N) {
    const int L = static_cast<int>(vectors.size()) / N;
    for (int l = 0; l < L; ++l) {
        double* v = vectors.data() + static_cast<size_t>(l) * N;
        for (int i = 0; i < N; ++i) {
            if (std::abs(v[i]) > 1e-12) {
                if (v[i] < 0)
                    for (int t = 0; t < N; ++t) v[t] = -v[t];
                break;
            }
        }
    }
}

/// Apply an N x N matrix (row-major accessor) along every `axis` line.
template <typename MatAt>
void tensor_apply_axis(GridSignal& g, int axis, int N, MatAt at) {
    std::vector<double> in(static_cast<size_t>(N)), out(static_cast<size_t>(N));
    for_each_line(g.shape, axis, [&](Index base, Index stride, int count) {
        for (int t = 0; t < count; ++t) in[static_cast<size_t>(t)] = g[base + t * stride];
        for (int r = 0; r < N; ++r) {
            double acc = 0.0;
            for (int c = 0; c < N; ++c) acc += at(r, c) * in[static_cast<size_t>(c)];
            out[static_cast<size_t>(r)] = acc;
        }
        for (int t = 0; t < count; ++t) g[base + t * stride] = out[static_cast<size_t>(t)];
    });
}

}  // namespace

std::vector<double> chain_laplacian_eigvals(int N) {
    if (N < 1) throw std::invalid_argument("chain_laplacian_eigvals: N must be >= 1");
    std::vector<double> e(static_cast<size_t>(N));
    for (int l = 1; l <= N; ++l) {
        const double s = std::sin(M_PI * (l - 1) / (2.0 * N));
        e[static_cast<size_t>(l - 1)] = 4.0 * s * s;
    }
    return e;
}

AxisSpectrum axis_spectrum(int N, int k) {
    if (N < 1) throw std::invalid_argument("axis_spectrum: N must be >= 1");
    AxisSpectrum S;
    S.N = N;
    S.k = k;
    const int nz = std::min(k + 1, N);

    const auto design = LatticeShape::make_uniform({N}).designs[0];
    Eigen::MatrixXd G;
    if (N > k + 1) {
        G = dense_gram(build_diff_1d(design, k + 1));
    } else {
        G = Eigen::MatrixXd::Zero(N, N);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success) throw std::runtime_error("axis_spectrum: eigensolver failed");

    S.rho.assign(static_cast<size_t>(N), 0.0);
    S.vectors.assign(static_cast<size_t>(N) * N, 0.0);
    for (int l = 0; l < N; ++l) {
        S.rho[static_cast<size_t>(l)] = l < nz ? 0.0 : es.eigenvalues()(l);
        for (int i = 0; i < N; ++i)
            S.vectors[static_cast<size_t>(l) * N + i] = es.eigenvectors()(i, l);
    }
    // null space: use the discrete Legendre orthogonal polynomials
    const Eigen::MatrixXd P = legendre_basis(design, nz - 1);
    for (int l = 0; l < nz; ++l)
        for (int i = 0; i < N; ++i) S.vectors[static_cast<size_t>(l) * N + i] = P(i, l);
    fix_sign(S.vectors, N);
    return S;
}

GramEigvals::GramEigvals(const LatticeShape& shape, int k) {
    if (!shape.uniform) throw std::invalid_argument("gram_eigvals: uniform designs required");
    dims_ = shape.dims;
    n_ = shape.n();
    for (int N : dims_) spectra_.push_back(axis_spectrum(N, k));
}

double GramEigvals::xi(const std::vector<int>& ranks) const {
    if (ranks.size() != dims_.size()) throw std::invalid_argument("gram_eigvals: rank arity");
    double s = 0.0;
    for (size_t j = 0; j < ranks.size(); ++j) {
        const int r = ranks[j];
        if (r < 0 || r >= dims_[j]) throw std::out_of_range("gram_eigvals: rank out of range");
        s += spectra_[j].rho[static_cast<size_t>(r)];
    }
    return s;
}

std::vector<double> GramEigvals::materialize() const {
    std::vector<double> out(static_cast<size_t>(n_), 0.0);
    const int d = static_cast<int>(dims_.size());
    std::vector<int> coord(static_cast<size_t>(d), 0);
    for (Index i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j)
            s += spectra_[static_cast<size_t>(j)].rho[static_cast<size_t>(coord[static_cast<size_t>(j)])];
        out[static_cast<size_t>(i)] = s;
        for (int j = d - 1; j >= 0; --j) {
            if (++coord[static_cast<size_t>(j)] < dims_[static_cast<size_t>(j)]) break;
            coord[static_cast<size_t>(j)] = 0;
        }
    }
    return out;
}

double gram_operator_norm(const KroneckerPenalty& penalty) {
    double s = 0.0;
    for (int j = 1; j <= penalty.shape().d(); ++j) {
        const Diff1d& D = penalty.axis_op(j);
        if (D.rows() == 0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_gram(D), Eigen::EigenvaluesOnly);
        s += es.eigenvalues()(D.N - 1);
    }
    return std::max(s, 1e-300);
}

GridSignal eigenmaps_fit(const GridSignal& y, int k, const std::vector<std::vector<int>>& Q) {
    const LatticeShape& shape = y.shape;
    const int d = shape.d();
    std::vector<uint8_t> mask(static_cast<size_t>(shape.n()), 0);
    const auto str = shape.strides();
    for (const auto& ranks : Q) {
        if (static_cast<int>(ranks.size()) != d)
            throw std::invalid_argument("eigenmaps_fit: rank arity mismatch");
        Index f = 0;
        for (int j = 0; j < d; ++j) {
            if (ranks[static_cast<size_t>(j)] < 0 ||
                ranks[static_cast<size_t>(j)] >= shape.dims[static_cast<size_t>(j)])
                throw std::out_of_range("eigenmaps_fit: rank out of range");
            f += static_cast<Index>(ranks[static_cast<size_t>(j)]) * str[static_cast<size_t>(j)];
        }
        mask[static_cast<size_t>(f)] = 1;
    }

    std::vector<AxisSpectrum> spectra;
    for (int N : shape.dims) spectra.push_back(axis_spectrum(N, k));

    GridSignal c = y;
    // into the eigenbasis: coefficients c = (U_1^T ox ... ox U_d^T) y
    for (int axis = 1; axis <= d; ++axis) {
        const AxisSpectrum& S = spectra[static_cast<size_t>(axis - 1)];
        tensor_apply_axis(c, axis, S.N, [&](int r, int cc) { return S.vec(r, cc); });
    }
    for (Index i = 0; i < c.n(); ++i)
        if (!mask[static_cast<size_t>(i)]) c[i] = 0.0;
    // back
    for (int axis = 1; axis <= d; ++axis) {
        const AxisSpectrum& S = spectra[static_cast<size_t>(axis - 1)];
        tensor_apply_axis(c, axis, S.N, [&](int r, int cc) { return S.vec(cc, r); });
    }
    return c;
}

GridSignal eigenmaps_fit_box(const GridSignal& y, int k, int tau) {
    const int d = y.shape.d();
    std::vector<std::vector<int>> Q;
    std::vector<int> coord(static_cast<size_t>(d), 0);
    while (true) {
        Q.push_back(coord);
        int j = d - 1;
        for (; j >= 0; --j) {
            const int cap = std::min(tau, y.shape.dims[static_cast<size_t>(j)]);
            if (++coord[static_cast<size_t>(j)] < cap) break;
            coord[static_cast<size_t>(j)] = 0;
        }
        if (j < 0) break;
    }
    return eigenmaps_fit(y, k, Q);
}

int eigenmaps_tau(double C_n, Index n, int k, int d, int N) {
    const double s = static_cast<double>(k + 1) / d;
    const double taud = std::pow(C_n * std::pow(static_cast<double>(n), s - 0.5), 1.0 / s);
    int tau = static_cast<int>(std::llround(std::pow(std::max(taud, 1.0), 1.0 / d)));
    return std::clamp(tau, std::min(k + 2, N), N);
}

GridSignal poly_projection(const GridSignal& y, int k) {
    const int d = y.shape.d();
    for (int N : y.shape.dims)
        if (N < k + 1) throw std::domain_error("poly_projection: degenerate lattice (N_j < k+1)");
    GridSignal out = y;
    for (int axis = 1; axis <= d; ++axis) {
        const int N = y.shape.dims[static_cast<size_t>(axis - 1)];
        const Eigen::MatrixXd P = legendre_basis(y.shape.designs[static_cast<size_t>(axis - 1)],
                                                 std::min(k, N - 1));
        const Eigen::MatrixXd proj = P * P.transpose();
        tensor_apply_axis(out, axis, N, [&](int r, int c) { return proj(r, c); });
    }
    return out;
}

GridSignal laplacian_smoother(const GridSignal& y, int power, double gamma) {
    if (gamma < 0) throw std::invalid_argument("laplacian_smoother: negative gamma");
    if (gamma == 0) return y;
    DctSolver solver(y.shape);
    return solver.solve(y, gamma, power);
}

GridSignal kernel_smoother(const GridSignal& y, double bandwidth) {
    if (!(bandwidth > 0)) throw std::invalid_argument("kernel_smoother: bandwidth must be positive");
    const int d = y.shape.d();
    GridSignal num = y;
    std::vector<std::vector<double>> row_sums(static_cast<size_t>(d));
    for (int axis = 1; axis <= d; ++axis) {
        const auto& z = y.shape.designs[static_cast<size_t>(axis - 1)];
        const int N = static_cast<int>(z.size());
        Eigen::MatrixXd W(N, N);
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) {
                const double u = (z[static_cast<size_t>(r)] - z[static_cast<size_t>(c)]) / bandwidth;
                W(r, c) = std::exp(-0.5 * u * u);
            }
        auto& rs = row_sums[static_cast<size_t>(axis - 1)];
        rs.resize(static_cast<size_t>(N));
        for (int r = 0; r < N; ++r) rs[static_cast<size_t>(r)] = W.row(r).sum();
        tensor_apply_axis(num, axis, N, [&](int r, int c) { return W(r, c); });
    }
    // denominator is the tensor product of per-axis weight sums
    std::vector<int> coord(static_cast<size_t>(d), 0);
    for (Index i = 0; i < num.n(); ++i) {
        double den = 1.0;
        for (int j = 0; j < d; ++j)
            den *= row_sums[static_cast<size_t>(j)][static_cast<size_t>(coord[static_cast<size_t>(j)])];
        num[i] /= den;
        for (int j = d - 1; j >= 0; --j) {
            if (++coord[static_cast<size_t>(j)] < y.shape.dims[static_cast<size_t>(j)]) break;
            coord[static_cast<size_t>(j)] = 0;
        }
    }
    return num;
}

}  // namespace ktf

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "ktf/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>

using namespace ktf;
using namespace ktf::testing;

TEST_CASE("chain laplacian eigenvalues: closed form and dense oracle") {
    const auto e2 = chain_laplacian_eigvals(2);
    CHECK(e2[0] == doctest::Approx(0.0));
    CHECK(e2[1] == doctest::Approx(2.0));
    CHECK(chain_laplacian_eigvals(1) == std::vector<double>{0.0});

    for (int N = 2; N <= 12; ++N) {
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
        for (int i = 0; i + 1 < N; ++i) {
            L(i, i) += 1;
            L(i + 1, i + 1) += 1;
            L(i, i + 1) -= 1;
            L(i + 1, i) -= 1;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
        const auto mine = chain_laplacian_eigvals(N);
        for (int i = 0; i < N; ++i)
            CHECK(mine[static_cast<size_t>(i)] ==
                  doctest::Approx(es.eigenvalues()(i)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("axis spectrum: k=0 matches chain eigvals, zero multiplicity, orthonormal") {
    for (int N : {5, 9}) {
        const AxisSpectrum S = axis_spectrum(N, 0);
        const auto chain = chain_laplacian_eigvals(N);
        for (int i = 0; i < N; ++i)
            CHECK(S.rho[static_cast<size_t>(i)] ==
                  doctest::Approx(chain[static_cast<size_t>(i)]).epsilon(1e-9).scale(1.0));
    }
    for (int k = 0; k <= 3; ++k) {
        for (int N : {2, 4, 8}) {
            const AxisSpectrum S = axis_spectrum(N, k);
            int zeros = 0;
            for (double r : S.rho)
                if (r == 0.0) ++zeros;
            CHECK(zeros == std::min(k + 1, N));
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) {
                    double dot = 0;
                    for (int i = 0; i < N; ++i) dot += S.vec(a, i) * S.vec(b, i);
                    CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
                }
            if (N > k + 1) {
                const Eigen::MatrixXd Dd =
                    dense_diff(LatticeShape::make_uniform({N}).designs[0], k + 1);
                const Eigen::MatrixXd G = Dd.transpose() * Dd;
                for (int l = 0; l < N; ++l) {
                    Eigen::VectorXd v(N);
                    for (int i = 0; i < N; ++i) v(i) = S.vec(l, i);
                    const Eigen::VectorXd gv = G * v;
                    for (int i = 0; i < N; ++i)
                        CHECK(gv(i) == doctest::Approx(S.rho[static_cast<size_t>(l)] * v(i))
                                           .epsilon(1e-8)
                                           .scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("interlacing sandwich for the axis spectrum") {
    for (int k = 0; k <= 3; ++k) {
        for (int N : {4, 16, 64}) {
            const AxisSpectrum S = axis_spectrum(N, k);
            for (int l = 1; l <= N; ++l) {
                const double up =
                    std::pow(4.0 * std::pow(std::sin(M_PI * (l - 1) / (2.0 * N)), 2), k + 1);
                const int lo_arg = std::max(0, l - k - 2);
                const double lo =
                    std::pow(4.0 * std::pow(std::sin(M_PI * lo_arg / (2.0 * N)), 2), k + 1);
                CHECK(S.rho[static_cast<size_t>(l - 1)] <= up * (1 + 1e-9) + 1e-12);
                CHECK(S.rho[static_cast<size_t>(l - 1)] >= lo * (1 - 1e-9) - 1e-12);
            }
        }
    }
}

TEST_CASE("gram eigvals: kronecker sum vs dense, multiplicity, monotone") {
    for (int k : {0, 1}) {
        const auto shape = LatticeShape::make_uniform({3, 3});
        const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
        const Eigen::MatrixXd D = dense_from_apply(pen);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D.transpose() * D,
                                                          Eigen::EigenvaluesOnly);
        GramEigvals ge(shape, k);
        auto mine = ge.materialize();
        std::sort(mine.begin(), mine.end());
        for (Index i = 0; i < shape.n(); ++i)
            CHECK(mine[static_cast<size_t>(i)] ==
                  doctest::Approx(es.eigenvalues()(i)).epsilon(1e-9).scale(1.0));
    }
    const auto shape = LatticeShape::make_uniform({5, 6});
    for (int k : {0, 1, 2}) {
        GramEigvals ge(shape, k);
        const auto all = ge.materialize();
        int zeros = 0;
        for (double v : all)
            if (v == 0.0) ++zeros;
        CHECK(zeros == (k + 1) * (k + 1));
        for (int a = 0; a + 1 < 5; ++a)
            for (int b = 0; b < 6; ++b) CHECK(ge.xi({a, b}) <= ge.xi({a + 1, b}) + 1e-15);
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b + 1 < 6; ++b) CHECK(ge.xi({a, b}) <= ge.xi({a, b + 1}) + 1e-15);
    }
}

TEST_CASE("spectral CDF bulk slope is d/(2k+2)") {
    struct Case {
        int k, d, N;
        double want;
    };
    for (const Case c : {Case{0, 2, 32, 1.0}, Case{1, 2, 32, 0.5}, Case{1, 4, 12, 1.0}}) {
        std::vector<int> dims(static_cast<size_t>(c.d), c.N);
        GramEigvals ge(LatticeShape::make_uniform(dims), c.k);
        auto xs = ge.materialize();
        std::sort(xs.begin(), xs.end());
        const auto n = static_cast<double>(xs.size());
        // bulk window: CDF levels in [0.01, 0.30]
        std::vector<double> lt, lf;
        for (size_t i = 0; i < xs.size(); ++i) {
            const double F = (static_cast<double>(i) + 1.0) / n;
            if (F < 0.01 || F > 0.30 || xs[i] <= 0) continue;
            lt.push_back(std::log(xs[i]));
            lf.push_back(std::log(F));
        }
        double mx = 0, my = 0;
        for (size_t i = 0; i < lt.size(); ++i) {
            mx += lt[i];
            my += lf[i];
        }
        mx /= static_cast<double>(lt.size());
        my /= static_cast<double>(lt.size());
        double sxx = 0, sxy = 0;
        for (size_t i = 0; i < lt.size(); ++i) {
            sxx += (lt[i] - mx) * (lt[i] - mx);
            sxy += (lt[i] - mx) * (lf[i] - my);
        }
        const double slope = sxy / sxx;
        CHECK(std::abs(slope - c.want) < 0.1);
    }
}

TEST_CASE("eigenmaps: full basis reproduces y; box Q matches poly projection") {
    std::mt19937 rng(67);
    const auto shape = LatticeShape::make_uniform({5, 4});
    const GridSignal y = random_signal(shape, rng);
    for (int k : {0, 1}) {
        const GridSignal full = eigenmaps_fit_box(y, k, 5);
        for (Index i = 0; i < y.n(); ++i) CHECK(full[i] == doctest::Approx(y[i]).epsilon(1e-10));

        const GridSignal low = eigenmaps_fit_box(y, k, k + 1);
        const GridSignal poly = poly_projection(y, k);
        for (Index i = 0; i < y.n(); ++i)
            CHECK(low[i] == doctest::Approx(poly[i]).epsilon(1e-8).scale(1.0));

        const GridSignal once = eigenmaps_fit_box(y, k, 3);
        const GridSignal twice = eigenmaps_fit_box(once, k, 3);
        for (Index i = 0; i < y.n(); ++i)
            CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("eigenmaps captured energy grows with nested Q") {
    std::mt19937 rng(68);
    const auto shape = LatticeShape::make_uniform({6, 6});
    const GridSignal y = random_signal(shape, rng);
    double prev = -1;
    for (int tau = 1; tau <= 6; ++tau) {
        const GridSignal p = eigenmaps_fit_box(y, 1, tau);
        double e = 0;
        for (double v : p.values) e += v * v;
        CHECK(e >= prev - 1e-12);
        prev = e;
    }
}

TEST_CASE("eigenmaps tau helper clamps into [k+2, N]") {
    CHECK(eigenmaps_tau(1.0, 1 << 12, 1, 2, 64) >= 3);
    CHECK(eigenmaps_tau(1e9, 1 << 12, 1, 2, 64) == 64);
    CHECK(eigenmaps_tau(1e-9, 1 << 12, 0, 2, 64) == 2);
}

TEST_CASE("poly projection basics") {
    std::mt19937 rng(70);
    const auto shape = LatticeShape::make_uniform({5, 5});
    for (int k : {0, 1, 2}) {
        const GridSignal poly = random_max_degree_poly(shape, k, rng);
        const GridSignal proj = poly_projection(poly, k);
        for (Index i = 0; i < poly.n(); ++i)
            CHECK(proj[i] == doctest::Approx(poly[i]).epsilon(1e-9).scale(1.0));
    }
    const GridSignal y = random_signal(shape, rng);
    const GridSignal mean = poly_projection(y, 0);
    double m = 0;
    for (double v : y.values) m += v;
    m /= static_cast<double>(y.n());
    for (double v : mean.values) CHECK(v == doctest::Approx(m).epsilon(1e-10));

    const int k = 1;
    const GridSignal proj = poly_projection(y, k);
    for (int a1 = 0; a1 <= k; ++a1)
        for (int a2 = 0; a2 <= k; ++a2) {
            double dot = 0;
            for (Index f = 0; f < y.n(); ++f) {
                const MultiIndex mi = multi_index(shape, f);
                const double x1 = shape.designs[0][static_cast<size_t>(mi.coords[0] - 1)];
                const double x2 = shape.designs[1][static_cast<size_t>(mi.coords[1] - 1)];
                dot += (y[f] - proj[f]) * std::pow(x1, a1) * std::pow(x2, a2);
            }
            CHECK(std::abs(dot) < 1e-9);
        }

    CHECK_THROWS_AS(poly_projection(GridSignal::zeros(LatticeShape::make_uniform({2, 5})), 2),
                    std::domain_error);
}

TEST_CASE("laplacian smoother: identity, grand-mean limit, dense oracle") {
    std::mt19937 rng(71);
    const auto shape = LatticeShape::make_uniform({4, 4});
    const GridSignal y = random_signal(shape, rng);
    const GridSignal id = laplacian_smoother(y, 2, 0.0);
    for (Index i = 0; i < y.n(); ++i) CHECK(id[i] == y[i]);

    double m = 0;
    for (double v : y.values) m += v;
    m /= static_cast<double>(y.n());
    for (int power : {1, 2}) {
        const GridSignal flat = laplacian_smoother(y, power, 1e8);
        for (double v : flat.values) CHECK(v == doctest::Approx(m).epsilon(1e-3).scale(1.0));
    }

    const KroneckerPenalty p1 = KroneckerPenalty::for_ktf(shape, 0);
    const Eigen::MatrixXd D = dense_from_apply(p1);
    const Eigen::MatrixXd L = D.transpose() * D;
    for (int power : {1, 2}) {
        for (double gamma : {0.3, 2.0}) {
            const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(16, 16) +
                                      gamma * (power == 1 ? L : Eigen::MatrixXd(L * L));
            Eigen::VectorXd b(16);
            for (Index i = 0; i < 16; ++i) b(i) = y[i];
            const Eigen::VectorXd x = A.ldlt().solve(b);
            const GridSignal mine = laplacian_smoother(y, power, gamma);
            for (Index i = 0; i < 16; ++i)
                CHECK(mine[i] == doctest::Approx(x(i)).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("kernel smoother: tiny bandwidth, constants, central symmetry") {
    std::mt19937 rng(72);
    const auto shape = LatticeShape::make_uniform({8, 8});
    const GridSignal y = random_signal(shape, rng);

    const GridSignal sharp = kernel_smoother(y, 1e-3);
    for (Index i = 0; i < y.n(); ++i) CHECK(sharp[i] == doctest::Approx(y[i]).epsilon(1e-9));

    GridSignal c(shape, std::vector<double>(64, 2.5));
    for (double bw : {0.05, 0.3, 2.0}) {
        const GridSignal out = kernel_smoother(c, bw);
        for (double v : out.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
    }

    GridSignal s = GridSignal::zeros(shape);
    for (Index f = 0; f < s.n(); ++f) {
        const MultiIndex m2 = multi_index(shape, f);
        const double x1 = shape.designs[0][static_cast<size_t>(m2.coords[0] - 1)] - 9.0 / 16;
        const double x2 = shape.designs[1][static_cast<size_t>(m2.coords[1] - 1)] - 9.0 / 16;
        s[f] = x1 * x1 + x2 * x2;
    }
    const GridSignal out = kernel_smoother(s, 0.2);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const double a = out[flat_index(shape, MultiIndex{{i + 1, j + 1}})];
            const double b = out[flat_index(shape, MultiIndex{{8 - i, 8 - j}})];
            CHECK(a == doctest::Approx(b).epsilon(1e-10));
        }
}

TEST_CASE("gram operator norm matches the dense top eigenvalue") {
    for (int k : {0, 1}) {
        const auto shape = LatticeShape::make_uniform({5, 4});
        const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
        const Eigen::MatrixXd D = dense_from_apply(pen);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D.transpose() * D,
                                                          Eigen::EigenvaluesOnly);
        CHECK(gram_operator_norm(pen) ==
              doctest::Approx(es.eigenvalues()(shape.n() - 1)).epsilon(1e-9));
    }
}

// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion.

#include "helpers.hpp"
#include "ktf/dof.hpp"
#include "ktf/experiments.hpp"
#include "ktf/interp.hpp"
#include "ktf/penalty.hpp"
#include "ktf/solvers.hpp"
#include "ktf/spectral.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ktf;
using namespace ktf::testing;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
};

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ----------------------------------------------------------------- 1

void criterion_null_space(Check& c) {
    const double t0 = now_s();
    std::mt19937 rng(101);
    for (int k = 0; k <= 2; ++k) {
        for (int d = 1; d <= 3; ++d) {
            std::vector<int> dims(static_cast<size_t>(d), 6);
            const auto shape = LatticeShape::make_uniform(dims);
            const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
            for (int trial = 0; trial < 50; ++trial) {
                const GridSignal poly = random_max_degree_poly(shape, k, rng);
                const double bound = 1e-9 * std::max(1e-12, max_abs(poly));
                c.expect(max_abs(pen.apply(poly)) <= bound, "null-space residual too large");
            }
            const Index nullity = pen.nullity();
            c.expect(nullity == static_cast<Index>(std::llround(std::pow(k + 1, d))),
                     "nullity formula");
            const std::vector<uint8_t> empty_mask(static_cast<size_t>(pen.rows()), 0);
            c.expect(dof_oracle_dense(pen, empty_mask) == nullity, "dense oracle disagrees");
        }
    }
    const double dt = now_s() - t0;
    c.expect(dt < 10.0, "runtime over 10 s");
    c.detail << " [" << dt << " s]";
}

// ----------------------------------------------------------------- 2

void criterion_dense_equivalence(Check& c) {
    std::vector<std::vector<int>> shapes;
    for (int N = 1; N <= 100; N += 7) shapes.push_back({N});
    for (int a = 1; a <= 12; ++a)
        for (int b = 1; b <= 12; ++b)
            if (a * b <= 100) shapes.push_back({a, b});
    for (int a = 1; a <= 6; ++a)
        for (int b = 1; b <= 6; ++b)
            for (int e = 1; e <= 6; ++e)
                if (a * b * e <= 100) shapes.push_back({a, b, e});

    for (int k = 0; k <= 2; ++k) {
        for (const auto& dims : shapes) {
            const auto shape = LatticeShape::make_uniform(dims);
            const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
            const Eigen::MatrixXd direct = dense_penalty(shape, k + 1);
            const Eigen::MatrixXd via = dense_from_apply(pen);
            if (direct.rows() != via.rows()) {
                c.expect(false, "row count mismatch");
                continue;
            }
            if (direct.rows() == 0) continue;
            c.expect((direct - via).cwiseAbs().maxCoeff() < 1e-12, "entrywise mismatch");
        }
    }
}

// --------------------------------------------------------------- 3 + 4

void criterion_solver_agreement(Check& c3, Check& c4) {
    const double t0 = now_s();
    std::mt19937 rng(103);
    std::normal_distribution<double> gauss(0, 1);
    for (int k = 0; k <= 2; ++k) {
        for (int d = 1; d <= 2; ++d) {
            std::vector<int> dims(static_cast<size_t>(d), 8);
            const auto shape = LatticeShape::make_uniform(dims);
            const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
            for (double lambda : {0.1, 1.0, 10.0}) {
                for (int rep = 0; rep < 20; ++rep) {
                    GridSignal y = GridSignal::zeros(shape);
                    for (double& v : y.values) v = gauss(rng);

                    const FitResult ref = dual_reference_solve(y, k, lambda, 1e-6);
                    c3.expect(ref.converged, "reference gap not certified");

                    std::vector<int> js = {0, 1, k, k + 1};
                    std::sort(js.begin(), js.end());
                    js.erase(std::unique(js.begin(), js.end()), js.end());
                    for (int j : js) {
                        AdmmConfig cfg;
                        cfg.j = j;
                        cfg.eps_abs = 1e-8;
                        cfg.eps_rel = 1e-8;
                        cfg.max_iters = 20000;
                        const FitResult fit = ktf_admm(y, k, lambda, cfg);
                        c3.expect(fit.objective <= ref.objective * (1 + 1e-3) + 1e-12,
                                  "admm objective off the reference");

                        if (j == std::min(1, k + 1)) {  // KKT on the headline split
                            c4.expect(fit.dual_u.has_value(), "dual missing");
                            if (fit.dual_u) {
                                c4.expect(max_abs(*fit.dual_u) <= lambda * (1 + 1e-6),
                                          "dual infeasible");
                                const GridSignal dtu = pen.apply_transpose(*fit.dual_u);
                                double stat = 0;
                                for (Index i = 0; i < y.n(); ++i)
                                    stat = std::max(stat,
                                                    std::abs(fit.theta[i] - y[i] + dtu[i]));
                                c4.expect(stat <= 1e-4 * max_abs(y), "stationarity residual");
                            }
                        }
                    }
                    const FitResult dyk = prox_dykstra(y, k, lambda, 250, 1e-12);
                    c3.expect(dyk.objective <= ref.objective * (1 + 1e-3) + 1e-12,
                              "dykstra objective off the reference");
                    if (d == 2) {
                        const FitResult dr = douglas_rachford(y, k, lambda, 300, 1e-12);
                        c3.expect(dr.objective <= ref.objective * (1 + 1e-3) + 1e-12,
                                  "dr objective off the reference");
                    }
                }
            }
        }
    }
    const double dt = now_s() - t0;
    c3.expect(dt < 120.0, "runtime over 2 min");
    c3.detail << " [" << dt << " s]";
}

// ----------------------------------------------------------------- 5

void criterion_linear_solves(Check& c) {
    std::mt19937 rng(105);
    for (const auto& dims : {std::vector<int>{4, 5}, std::vector<int>{5, 5, 4}}) {
        const auto shape = LatticeShape::make_uniform(dims);
        const Index n = shape.n();
        const GridSignal b = random_signal(shape, rng);
        Eigen::VectorXd bv(n);
        for (Index i = 0; i < n; ++i) bv(i) = b[i];

        const KroneckerPenalty p1 = KroneckerPenalty::for_ktf(shape, 0);
        const Eigen::MatrixXd D1 = dense_from_apply(p1);
        const Eigen::MatrixXd L = D1.transpose() * D1;

        const KroneckerPenalty p3 = KroneckerPenalty::for_ktf(shape, 2);
        const PenaltySplit split = decompose(p3, 2);
        const Eigen::MatrixXd D2 = dense_from_apply(*split.inner);
        const Eigen::MatrixXd G2 = D2.transpose() * D2;

        for (double rho : {0.1, 1.0, 10.0}) {
            const Eigen::VectorXd xd =
                (Eigen::MatrixXd::Identity(n, n) + rho * L).ldlt().solve(bv);
            const GridSignal x = theta_update_dct(b, rho);
            for (Index i = 0; i < n; ++i)
                c.expect(std::abs(x[i] - xd(i)) <= 1e-9 * std::max(1.0, std::abs(xd(i))),
                         "dct solve mismatch");

            const Eigen::VectorXd yd =
                (Eigen::MatrixXd::Identity(n, n) + rho * G2).ldlt().solve(bv);
            const GridSignal ycg = theta_update_cg(b, rho, *split.inner, 1e-12);
            for (Index i = 0; i < n; ++i)
                c.expect(std::abs(ycg[i] - yd(i)) <= 1e-9 * std::max(1.0, std::abs(yd(i))),
                         "cg solve mismatch");
        }
    }
}

// ----------------------------------------------------------------- 6

void criterion_spectral(Check& c) {
    for (int k : {0, 1}) {
        const auto shape = LatticeShape::make_uniform({5, 5});
        const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
        const Eigen::MatrixXd D = dense_from_apply(pen);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D.transpose() * D,
                                                          Eigen::EigenvaluesOnly);
        auto mine = GramEigvals(shape, k).materialize();
        std::sort(mine.begin(), mine.end());
        for (Index i = 0; i < shape.n(); ++i)
            c.expect(std::abs(mine[static_cast<size_t>(i)] - es.eigenvalues()(i)) <=
                         1e-9 * std::max(1.0, es.eigenvalues()(i)),
                     "gram eigvals vs dense");
    }

    for (int k = 0; k <= 3; ++k) {
        for (int N = 1; N <= 64; ++N) {
            const AxisSpectrum S = axis_spectrum(N, k);
            for (int l = 1; l <= N; ++l) {
                const double up =
                    std::pow(4.0 * std::pow(std::sin(M_PI * (l - 1) / (2.0 * N)), 2), k + 1);
                const int arg = std::max(0, l - k - 2);
                const double lo =
                    std::pow(4.0 * std::pow(std::sin(M_PI * arg / (2.0 * N)), 2), k + 1);
                c.expect(S.rho[static_cast<size_t>(l - 1)] <= up * (1 + 1e-9) + 1e-12 &&
                             S.rho[static_cast<size_t>(l - 1)] >= lo * (1 - 1e-9) - 1e-12,
                         "interlacing sandwich");
            }
        }
    }

    for (const auto [k, d, want] : {std::tuple<int, int, double>{0, 2, 1.0}, {1, 2, 0.5}}) {
        std::vector<int> dims(static_cast<size_t>(d), 32);
        auto xs = GramEigvals(LatticeShape::make_uniform(dims), k).materialize();
        std::sort(xs.begin(), xs.end());
        std::vector<double> lt, lf;
        for (size_t i = 0; i < xs.size(); ++i) {
            const double F = (static_cast<double>(i) + 1.0) / static_cast<double>(xs.size());
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
        c.expect(std::abs(sxy / sxx - want) < 0.1, "spectral CDF slope");
    }
}

// ----------------------------------------------------------------- 7

void criterion_dof(Check& c) {
    std::mt19937 rng(107);
    for (int k = 0; k <= 2; ++k) {
        for (int N = k + 2; N <= 8; ++N) {
            const int tests = N - k - 1;
            for (unsigned code = 0; code < (1u << tests); ++code) {
                std::vector<int> pattern(static_cast<size_t>(tests));
                for (int b = 0; b < tests; ++b) pattern[static_cast<size_t>(b)] = (code >> b) & 1u;
                const GridSignal g = signal_from_pattern(N, k, pattern, rng);
                const KroneckerPenalty pen = KroneckerPenalty::for_ktf(g.shape, k);
                const auto mask = active_row_mask(g, pen, 1e-8);
                c.expect(dof_estimate(pen, mask) == dof_oracle_dense(pen, mask),
                         "1-d pattern mismatch");
            }
        }
    }
    for (int trial = 0; trial < 300; ++trial) {
        const int k = trial % 3;
        const auto shape =
            (trial % 2) ? LatticeShape::make_uniform({6, 6}) : LatticeShape::make_uniform({7, 5});
        const GridSignal g = random_piecewise_poly(shape, k, rng);
        const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
        const auto mask = active_row_mask(g, pen, 1e-8);
        c.expect(dof_estimate(pen, mask) == dof_oracle_dense(pen, mask), "2-d case mismatch");
    }
    for (int trial = 0; trial < 100; ++trial) {
        const int k = trial % 2;
        const auto shape = LatticeShape::make_uniform({4, 4, 4});
        const GridSignal g = random_piecewise_poly(shape, k, rng);
        const KroneckerPenalty pen = KroneckerPenalty::for_ktf(shape, k);
        const auto mask = active_row_mask(g, pen, 1e-8);
        c.expect(dof_estimate(pen, mask) == dof_oracle_dense(pen, mask), "3-d case mismatch");
    }
    for (int trial = 0; trial < 60; ++trial) {
        const auto shape = LatticeShape::make_uniform({6, 5});
        const GridSignal g = random_piecewise_poly(shape, 0, rng);
        c.expect(dof_estimate(g, 0) == union_find_components(g, 1e-8),
                 "k=0 component count mismatch");
    }
}

// ----------------------------------------------------------------- 8

void criterion_interpolation(Check& c) {
    std::mt19937 rng(108);
    std::uniform_real_distribution<double> qdist(-0.15, 1.15);

    for (int k = 0; k <= 2; ++k) {
        for (int d = 1; d <= 3; ++d) {
            std::vector<int> dims(static_cast<size_t>(d), 5);
            const auto shape = LatticeShape::make_uniform(dims);
            const GridSignal g = random_signal(shape, rng);
            for (Index f = 0; f < g.n(); ++f) {
                const MultiIndex m = multi_index(shape, f);
                std::vector<double> x(static_cast<size_t>(d));
                for (int j = 0; j < d; ++j)
                    x[static_cast<size_t>(j)] =
                        shape.designs[static_cast<size_t>(j)]
                                     [static_cast<size_t>(m.coords[static_cast<size_t>(j)] - 1)];
                c.expect(interpolate(g, x, k) == g[f], "lattice exactness");
            }
            const BasisOracle oracle(g, k);
            for (int q = 0; q < 200; ++q) {
                std::vector<double> x(static_cast<size_t>(d));
                for (double& v : x) v = qdist(rng);
                const double a = interpolate(g, x, k);
                const double b = oracle.eval(x);
                c.expect(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)),
                         "oracle equivalence");
            }
        }
    }

    // polynomial reproduction at max degree k
    for (int k = 0; k <= 2; ++k) {
        const auto shape = LatticeShape::make_uniform({5, 5});
        std::vector<double> coef(static_cast<size_t>((k + 1) * (k + 1)));
        std::uniform_real_distribution<double> dist(-1, 1);
        for (double& v : coef) v = dist(rng);
        GridSignal g = GridSignal::zeros(shape);
        auto eval = [&](double x1, double x2) {
            double val = 0;
            size_t t = 0;
            for (int a = 0; a <= k; ++a)
                for (int b = 0; b <= k; ++b, ++t)
                    val += coef[t] * std::pow(x1, a) * std::pow(x2, b);
            return val;
        };
        for (Index f = 0; f < g.n(); ++f) {
            const MultiIndex m = multi_index(shape, f);
            g[f] = eval(shape.designs[0][static_cast<size_t>(m.coords[0] - 1)],
                        shape.designs[1][static_cast<size_t>(m.coords[1] - 1)]);
        }
        for (int q = 0; q < 100; ++q) {
            const std::vector<double> x{qdist(rng), qdist(rng)};
            c.expect(std::abs(interpolate(g, x, k) - eval(x[0], x[1])) <=
                         1e-8 * std::max(1.0, std::abs(eval(x[0], x[1]))),
                     "polynomial reproduction");
        }
    }

    // Remark-1 KTV equality, exact for k=0
    for (int trial = 0; trial < 3; ++trial) {
        const auto shape = LatticeShape::make_uniform({5, 5});
        const GridSignal g = random_signal(shape, rng);
        const double kv = KroneckerPenalty::for_ktf(shape, 0).ktv(g);
        c.expect(std::abs(ktv_of_interpolant_k0(g) - kv) <= 1e-12 * std::max(1.0, kv),
                 "remark-1 equality");
    }

    // constant per-query cost between n = 400 and n = 40000
    auto time_queries = [&](int N) {
        const auto shape = LatticeShape::make_uniform({N, N});
        const GridSignal g = random_signal(shape, rng);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<std::vector<double>> qs;
        for (int q = 0; q < 20000; ++q) qs.push_back({u(rng), u(rng)});
        double sink = 0;
        const double t0 = now_s();
        for (const auto& x : qs) sink += interpolate(g, x, 1);
        const double dt = now_s() - t0;
        c.expect(std::isfinite(sink), "query produced non-finite value");
        return dt;
    };
    time_queries(20);
    const double small = time_queries(20);
    const double big = time_queries(200);
    c.expect(big / small <= 1.5, "per-query cost grew with n");
    c.detail << " [cost ratio " << big / small << "]";
}

// ----------------------------------------------------------------- 9

GridSignal ktf_fit_k0(const GridSignal& y, double lam, int threads) {
    AdmmConfig cfg;
    cfg.j = 0;
    cfg.eps_abs = 1e-6;
    cfg.eps_rel = 1e-6;
    cfg.max_iters = 3000;
    cfg.threads = threads;
    cfg.want_dual = false;
    return ktf_admm(y, 0, lam, cfg).theta;
}

void criterion_rates(Check& c) {
    const double t0 = now_s();
    const int reps = 20;

    // one-hot, k=0, d=2, oracle-tuned lambda
    {
        RateTable table;
        for (int N : {16, 32, 64, 128}) {
            const auto shape = LatticeShape::make_uniform({N, N});
            const GridSignal truth = gen_one_hot(shape);
            const GridSignal y0 = add_noise(truth, 1.0, 900);
            const double lmax = lambda_max(y0, 0, 1e-6);

            TuningMethod ktfm;
            ktfm.name = "ktf";
            ktfm.grid = geometric_grid(lmax, 1e-3, 1.0, 20);
            ktfm.fit = [](const GridSignal& y, double lam) { return ktf_fit_k0(y, lam, 1); };
            const TuningCurve ck = tuning_curve(truth, 1.0, ktfm, reps, 900, 2);
            table.push_back({truth.n(), "ktf", ck.best().mse_mean, ck.best().mse_sd,
                             ck.best().tuning});

            TuningMethod eig;
            eig.name = "eigenmaps";
            for (int tau = 1; tau <= N; tau = tau < 8 ? tau + 1 : tau * 2)
                eig.grid.push_back(tau);
            if (static_cast<int>(eig.grid.back()) != N) eig.grid.push_back(N);
            eig.fit = [](const GridSignal& y, double tau) {
                return eigenmaps_fit_box(y, 0, static_cast<int>(tau));
            };
            const TuningCurve ce = tuning_curve(truth, 1.0, eig, reps, 900, 2);
            table.push_back({truth.n(), "eigenmaps", ce.best().mse_mean, ce.best().mse_sd,
                             ce.best().tuning});
        }
        const SlopeFit ktf_slope = rate_slope(table, "ktf");
        const SlopeFit eig_slope = rate_slope(table, "eigenmaps");
        c.detail << "one-hot slopes: ktf " << ktf_slope.slope << ", eigenmaps "
                 << eig_slope.slope;
        c.expect(ktf_slope.slope <= -0.35, "ktf slope not steep enough");
        c.expect(std::abs(eig_slope.slope) <= 0.1, "eigenmaps slope not flat");
    }

    // linear signal, k=0, d in {2,3}: ktf best within 2x of eigenmaps best
    for (int d : {2, 3}) {
        const std::vector<int> Ns = d == 2 ? std::vector<int>{8, 16, 32} : std::vector<int>{4, 8, 12};
        for (int N : Ns) {
            std::vector<int> dims(static_cast<size_t>(d), N);
            const auto shape = LatticeShape::make_uniform(dims);
            const GridSignal truth = gen_linear(shape, 0);
            const GridSignal y0 = add_noise(truth, 0.2, 901);
            const double lmax = lambda_max(y0, 0, 1e-6);

            TuningMethod ktfm;
            ktfm.name = "ktf";
            ktfm.grid = geometric_grid(lmax, 1e-3, 1.0, 20);
            ktfm.fit = [](const GridSignal& y, double lam) { return ktf_fit_k0(y, lam, 1); };
            const TuningCurve ck = tuning_curve(truth, 0.2, ktfm, reps, 901, 2);

            TuningMethod eig;
            eig.name = "eigenmaps";
            for (int tau = 1; tau <= N; ++tau) eig.grid.push_back(tau);
            eig.fit = [](const GridSignal& y, double tau) {
                return eigenmaps_fit_box(y, 0, static_cast<int>(tau));
            };
            const TuningCurve ce = tuning_curve(truth, 0.2, eig, reps, 901, 2);

            c.expect(ck.best().mse_mean <= 2.0 * ce.best().mse_mean,
                     "ktf more than 2x worse at d=" + std::to_string(d) +
                         " N=" + std::to_string(N));
        }
    }

    const double dt = now_s() - t0;
    c.expect(dt < 900.0, "runtime over 15 min");
    c.detail << " [" << dt << " s]";
}

// ----------------------------------------------------------------- 10

void criterion_bench(Check& c) {
    const GridSignal truth = gen_two_peak(128);
    const GridSignal y = add_noise(truth, noise_sigma_for_snr(truth, 0.5), 77);
    const int k = 2;
    const double lambda = 0.3 * lambda_max(y, k, 1e-6);

    const FitResult ref = dual_reference_solve(y, k, lambda, 1e-8, 400000);
    const double fstar = ref.objective;
    c.expect(ref.converged, "reference optimum not certified");

    auto time_to_tol = [&](const std::string& solver, int budget) {
        double reach = -1;
        const auto t0 = std::chrono::steady_clock::now();
        double hook_cost = 0;
        const auto hook = [&](int, const GridSignal& th) {
            const auto in = std::chrono::steady_clock::now();
            const double elapsed = std::chrono::duration<double>(in - t0).count() - hook_cost;
            if (reach < 0 && (objective(y, th, k, lambda) - fstar) / fstar <= 1e-2)
                reach = elapsed;
            hook_cost +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - in).count();
        };
        AdmmConfig cfg;
        if (solver.rfind("admm-", 0) == 0) cfg.j = split_index_for(solver, k);
        cfg.eps_abs = 1e-10;
        cfg.eps_rel = 1e-10;
        cfg.max_iters = budget;
        cfg.want_dual = false;
        cfg.iter_hook = hook;
        solve_named(solver, y, k, lambda, cfg, budget, 1e-3);
        return reach;
    };

    const double t1 = time_to_tol("admm-type1", 600);
    const double t2 = time_to_tol("admm-type2", 600);
    const double tref = time_to_tol("dual-ref", 400000);
    c.detail << "time to 1e-2: type1 " << t1 << " s, type2 " << t2 << " s, dual-ref " << tref
             << " s";
    c.expect(t1 > 0, "type I never reached 1e-2");
    c.expect(t2 < 0 || t1 < t2, "type I not faster than type II");
    c.expect(tref < 0 || t1 < tref, "type I not faster than the dual reference");

    // k=1: types I and II produce identical iterates under one rho schedule
    std::mt19937 rng(110);
    std::normal_distribution<double> gauss(0, 1);
    const auto shape = LatticeShape::make_uniform({64, 64});
    GridSignal y1 = GridSignal::zeros(shape);
    for (double& v : y1.values) v = gauss(rng);
    AdmmConfig cfg;
    cfg.max_iters = 40;
    cfg.eps_abs = 1e-14;
    cfg.eps_rel = 1e-14;
    cfg.want_dual = false;
    const FitResult a = solve_named("admm-type1", y1, 1, 0.8, cfg);
    const FitResult b = solve_named("admm-type2", y1, 1, 0.8, cfg);
    c.expect(a.theta.values == b.theta.values, "k=1 type I/II iterates differ");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        std::string name;
        std::function<void(Check&)> fn;
    };
    Check c3, c4;
    const std::vector<Criterion> criteria = {
        {1, "null-space exactness (Prop. 1)", criterion_null_space},
        {2, "dense-operator equivalence (Eq. 7)", criterion_dense_equivalence},
        {3, "solver cross-agreement", [&](Check& c) { criterion_solver_agreement(c, c4); }},
        {4, "KKT certificate on ADMM output", [&](Check& c) { c = std::move(c4); }},
        {5, "DCT/CG linear-solve correctness", criterion_linear_solves},
        {6, "spectral formulas (chain eigvals, interlacing, CDF slope)", criterion_spectral},
        {7, "degrees of freedom vs dense rank and union-find", criterion_dof},
        {8, "interpolation: exactness, oracle, reproduction, cost", criterion_interpolation},
        {9, "rate phenomenology (one-hot and linear signals)", criterion_rates},
        {10, "benchmark ordering (Type I vs Type II vs dual reference)", criterion_bench},
    };

    int failures = 0;
    for (const auto& crit : criteria) {
        Check c;
        const double t0 = now_s();
        try {
            crit.fn(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double dt = now_s() - t0;
        std::printf("criterion %2d: %s — %s", crit.id, c.ok ? "PASS" : "FAIL", crit.name.c_str());
        const std::string detail = c.detail.str();
        if (!detail.empty()) std::printf(" (%s)", detail.c_str());
        if (crit.id != 4) std::printf(" [%.1f s]", dt);
        std::printf("\n");
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}

#include "ktf/experiments.hpp"

#include "ktf/penalty.hpp"
#include "ktf/threading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ktf {

double canonical_scaling(const LatticeShape& shape, int k) {
    const double n = static_cast<double>(shape.n());
    const double s = static_cast<double>(k + 1) / shape.d();
    return std::pow(n, 1.0 - s);
}

GridSignal gen_two_peak(int N) {
    const LatticeShape shape = LatticeShape::make_uniform({N, N});
    GridSignal f = GridSignal::zeros(shape);
    const auto& z = shape.designs[0];
    auto bump = [](double x1, double x2, double c1, double c2, double w) {
        const double r2 = (x1 - c1) * (x1 - c1) + (x2 - c2) * (x2 - c2);
        return std::exp(-0.5 * r2 / (w * w));
    };
    Index f_idx = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j, ++f_idx) {
            const double x1 = z[static_cast<size_t>(i)], x2 = z[static_cast<size_t>(j)];
            f[f_idx] = 3.0 * bump(x1, x2, 0.2, 0.2, 0.08) + 1.0 * bump(x1, x2, 0.8, 0.8, 0.05) +
                       0.2 * std::sin(M_PI * x1) * std::sin(M_PI * x2);
        }
    return f;
}

namespace {

GridSignal scale_to_canonical(GridSignal g, int k) {
    const KroneckerPenalty pen = KroneckerPenalty::for_ktf(g.shape, k);
    const double raw = pen.ktv(g);
    if (raw <= 0) throw std::runtime_error("signal generator: degenerate signal, KTV = 0");
    const double target = canonical_scaling(g.shape, k);
    const double c = target / raw;
    for (double& v : g.values) v *= c;
    const double check = pen.ktv(g);
    if (std::abs(check - target) > 1e-9 * std::max(1.0, target))
        throw std::runtime_error("signal generator: canonical-scaling self-check failed");
    return g;
}

}  // namespace

GridSignal gen_one_hot(const LatticeShape& shape) {
    GridSignal g = GridSignal::zeros(shape);
    MultiIndex center;
    for (int N : shape.dims) center.coords.push_back((N + 1) / 2);
    g[flat_index(shape, center)] = 1.0;
    return scale_to_canonical(std::move(g), 0);
}

GridSignal gen_spike(const LatticeShape& shape) {
    GridSignal g = GridSignal::zeros(shape);
    const int d = shape.d();
    std::vector<int> coord(static_cast<size_t>(d), 0);
    for (Index f = 0; f < g.n(); ++f) {
        double v = 1.0;
        for (int j = 0; j < d; ++j) {
            const auto& z = shape.designs[static_cast<size_t>(j)];
            const double c = 0.5 * (z.front() + z.back());
            const double w = std::max(0.5 * (z.back() - z.front()), 1e-12);
            v *= std::max(0.0, 1.0 - std::abs(z[static_cast<size_t>(coord[static_cast<size_t>(j)])] - c) / w);
        }
        g[f] = v;
        for (int j = d - 1; j >= 0; --j) {
            if (++coord[static_cast<size_t>(j)] < shape.dims[static_cast<size_t>(j)]) break;
            coord[static_cast<size_t>(j)] = 0;
        }
    }
    return scale_to_canonical(std::move(g), 1);
}

GridSignal gen_linear(const LatticeShape& shape, int k) {
    GridSignal g = GridSignal::zeros(shape);
    const int d = shape.d();
    std::vector<int> coord(static_cast<size_t>(d), 0);
    for (Index f = 0; f < g.n(); ++f) {
        double v = 0.0;
        for (int j = 0; j < d; ++j)
            v += shape.designs[static_cast<size_t>(j)][static_cast<size_t>(coord[static_cast<size_t>(j)])];
        g[f] = v;
        for (int j = d - 1; j >= 0; --j) {
            if (++coord[static_cast<size_t>(j)] < shape.dims[static_cast<size_t>(j)]) break;
            coord[static_cast<size_t>(j)] = 0;
        }
    }
    if (k == 0) return scale_to_canonical(std::move(g), 0);
    // in the null space for k >= 1: fix the sup-norm instead
    double mx = 0.0;
    for (double v : g.values) mx = std::max(mx, std::abs(v));
    for (double& v : g.values) v /= mx;
    return g;
}

GridSignal add_noise(const GridSignal& signal, double sigma, std::uint64_t seed) {
    if (sigma < 0) throw std::invalid_argument("add_noise: negative sigma");
    if (sigma == 0) return signal;
    GridSignal out = signal;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (double& v : out.values) v += gauss(rng);
    return out;
}

double noise_sigma_for_snr(const GridSignal& signal, double snr) {
    if (!(snr > 0)) throw std::invalid_argument("noise_sigma_for_snr: snr must be positive");
    double mean = 0.0;
    for (double v : signal.values) mean += v;
    mean /= static_cast<double>(signal.n());
    double var = 0.0;
    for (double v : signal.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(signal.n());
    return std::sqrt(var / snr);
}

double estimate_sigma_mad(const GridSignal& y) {
    const int d = y.shape.d();
    std::vector<double> diffs;
    for_each_line(y.shape, d, [&](Index base, Index stride, int count) {
        for (int t = 0; t + 1 < count; ++t)
            diffs.push_back(y[base + (t + 1) * stride] - y[base + t * stride]);
    });
    if (diffs.empty()) return 0.0;
    auto median = [](std::vector<double> v) {
        const size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
        double m = v[mid];
        if (v.size() % 2 == 0) {
            std::nth_element(v.begin(), v.begin() + static_cast<long>(mid) - 1, v.end());
            m = 0.5 * (m + v[mid - 1]);
        }
        return m;
    };
    const double med = median(diffs);
    for (double& v : diffs) v = std::abs(v - med);
    return 1.4826 * median(diffs) / std::sqrt(2.0);
}

TuningCurve tuning_curve(const GridSignal& truth, double sigma, const TuningMethod& method,
                         int reps, std::uint64_t seed0, int threads) {
    if (method.grid.empty()) throw std::invalid_argument("tuning_curve: empty tuning grid");
    if (reps < 1) throw std::invalid_argument("tuning_curve: reps must be >= 1");

    std::vector<GridSignal> ys;
    ys.reserve(static_cast<size_t>(reps));
    for (int r = 0; r < reps; ++r) ys.push_back(add_noise(truth, sigma, seed0 + static_cast<std::uint64_t>(r)));

    const int G = static_cast<int>(method.grid.size());
    std::vector<double> cell_mse(static_cast<size_t>(G) * reps,
                                 std::numeric_limits<double>::quiet_NaN());
    const double n = static_cast<double>(truth.n());

    parallel_for(static_cast<long long>(G) * reps, threads, [&](long long cell) {
        const int gi = static_cast<int>(cell / reps);
        const int ri = static_cast<int>(cell % reps);
        try {
            const GridSignal fit = method.fit(ys[static_cast<size_t>(ri)], method.grid[static_cast<size_t>(gi)]);
            double sse = 0.0;
            for (Index i = 0; i < truth.n(); ++i) {
                const double e = fit[i] - truth[i];
                sse += e * e;
            }
            cell_mse[static_cast<size_t>(cell)] = sse / n;
        } catch (const std::exception&) {
            // recorded as a failed cell below
        }
    });

    TuningCurve curve;
    curve.method = method.name;
    double best = std::numeric_limits<double>::infinity();
    for (int gi = 0; gi < G; ++gi) {
        TuningCurvePoint pt;
        pt.tuning = method.grid[static_cast<size_t>(gi)];
        double sum = 0.0, sum2 = 0.0;
        for (int ri = 0; ri < reps; ++ri) {
            const double v = cell_mse[static_cast<size_t>(gi) * reps + ri];
            if (std::isnan(v)) {
                ++pt.failures;
                continue;
            }
            sum += v;
            sum2 += v * v;
            ++pt.reps_ok;
        }
        if (pt.reps_ok > 0) {
            pt.mse_mean = sum / pt.reps_ok;
            const double var = std::max(0.0, sum2 / pt.reps_ok - pt.mse_mean * pt.mse_mean);
            pt.mse_sd = pt.reps_ok > 1 ? std::sqrt(var * pt.reps_ok / (pt.reps_ok - 1)) : 0.0;
            if (pt.mse_mean < best) {
                best = pt.mse_mean;
                curve.argmin = gi;
            }
        } else {
            pt.mse_mean = std::numeric_limits<double>::quiet_NaN();
        }
        curve.points.push_back(pt);
    }
    if (curve.argmin < 0) throw std::runtime_error("tuning_curve: every cell failed");
    return curve;
}

SlopeFit rate_slope(const std::vector<Index>& ns, const std::vector<double>& mses) {
    if (ns.size() != mses.size()) throw std::invalid_argument("rate_slope: length mismatch");
    std::vector<Index> uniq(ns.begin(), ns.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < 3) throw std::invalid_argument("rate_slope: need >= 3 distinct sizes");

    const size_t m = ns.size();
    double sx = 0, sy = 0;
    for (size_t i = 0; i < m; ++i) {
        sx += std::log(static_cast<double>(ns[i]));
        sy += std::log(mses[i]);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        const double dx = std::log(static_cast<double>(ns[i])) - mx;
        const double dy = std::log(mses[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    double ssr = 0;
    for (size_t i = 0; i < m; ++i) {
        const double dx = std::log(static_cast<double>(ns[i])) - mx;
        const double dy = std::log(mses[i]) - my;
        const double r = dy - f.slope * dx;
        ssr += r * r;
    }
    f.stderr_ = m > 2 ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
    return f;
}

SlopeFit rate_slope(const RateTable& table, const std::string& method) {
    std::vector<Index> ns;
    std::vector<double> mses;
    for (const RateRow& r : table) {
        if (r.method != method) continue;
        ns.push_back(r.n);
        mses.push_back(r.best_mse);
    }
    return rate_slope(ns, mses);
}

std::vector<double> geometric_grid(double lambda_max, double lo_frac, double hi_frac, int count) {
    if (count < 1 || !(lo_frac > 0) || !(hi_frac >= lo_frac))
        throw std::invalid_argument("geometric_grid: bad parameters");
    std::vector<double> g(static_cast<size_t>(count));
    if (count == 1) {
        g[0] = lambda_max * hi_frac;
        return g;
    }
    const double lo = std::log(lambda_max * lo_frac), hi = std::log(lambda_max * hi_frac);
    for (int i = 0; i < count; ++i)
        g[static_cast<size_t>(i)] = std::exp(lo + (hi - lo) * i / (count - 1));
    return g;
}

}  // namespace ktf

#pragma once

#include "ktf/lattice.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ktf {

/// Canonical KTV radius C_n^* = n^(1-(k+1)/d).
double canonical_scaling(const LatticeShape& shape, int k);

/// Two Gaussian bumps in opposite corners of [0,1]^2 (amplitudes 3 and 1,
/// widths 0.08 and 0.05) over a smooth low-amplitude background.
GridSignal gen_two_peak(int N);

/// Single central site scaled so that the order-k KTV equals C_n^*
/// (self-checked at construction). k = 0.
GridSignal gen_one_hot(const LatticeShape& shape);

/// Tensor-product tent centered on the lattice, scaled so the k = 1 KTV
/// equals C_n^* (self-checked).
GridSignal gen_spike(const LatticeShape& shape);

/// Evaluations of a * sum_j x_j. For k = 0, a is set so KTV = C_n^*; for
/// k >= 1 the signal is in the penalty null space, so it is scaled to unit
/// sup-norm instead.
GridSignal gen_linear(const LatticeShape& shape, int k);

/// i.i.d. Gaussian noise with the given sigma; seeded and reproducible.
GridSignal add_noise(const GridSignal& signal, double sigma, std::uint64_t seed);
/// sigma for a target SNR = var(signal) / sigma^2.
double noise_sigma_for_snr(const GridSignal& signal, double snr);

/// Robust sigma estimate from finest-scale (last-axis) first differences,
/// MAD / (1.4826^-1 * sqrt(2)).
double estimate_sigma_mad(const GridSignal& y);

struct TuningCurvePoint {
    double tuning = 0.0;
    double mse_mean = 0.0;
    double mse_sd = 0.0;
    int reps_ok = 0;
    int failures = 0;
};

struct TuningCurve {
    std::string method;
    std::vector<TuningCurvePoint> points;
    int argmin = -1;  // index of best mse_mean

    const TuningCurvePoint& best() const { return points[static_cast<size_t>(argmin)]; }
};

/// One estimator under a scalar tuning parameter.
struct TuningMethod {
    std::string name;
    std::vector<double> grid;
    std::function<GridSignal(const GridSignal& y, double tuning)> fit;
};

/// Mean/sd of MSE against the truth over `reps` noisy replicates (seeds
/// seed0..seed0+reps-1, shared across tuning values). Cells run in parallel
/// and reduce by cell index, so threading does not change the output.
/// Failures are recorded per cell, not fatal.
TuningCurve tuning_curve(const GridSignal& truth, double sigma, const TuningMethod& method,
                         int reps, std::uint64_t seed0, int threads = 1);

struct RateRow {
    Index n = 0;
    std::string method;
    double best_mse = 0.0;
    double sd = 0.0;
    double tuning = 0.0;
};
using RateTable = std::vector<RateRow>;

struct SlopeFit {
    double slope = 0.0;
    double stderr_ = 0.0;
};

/// OLS slope of log(best MSE) on log(n); needs >= 3 distinct sizes.
SlopeFit rate_slope(const std::vector<Index>& ns, const std::vector<double>& mses);
SlopeFit rate_slope(const RateTable& table, const std::string& method);

/// Geometric grid of `count` points spanning [lo_frac, hi_frac] * lambda_max.
std::vector<double> geometric_grid(double lambda_max, double lo_frac, double hi_frac, int count);

}  // namespace ktf

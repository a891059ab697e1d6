#pragma once

#include "ktf/penalty.hpp"
#include "ktf/prox.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ktf {

/// Called once per outer iteration with the current primal iterate; used by
/// the benchmark harness to record suboptimality traces.
using IterHook = std::function<void(int iter, const GridSignal& theta)>;

struct AdmmConfig {
    int j = 1;                  // Proposition-6 split index, 0..k+1
    double rho0 = -1.0;         // <0: default to max(lambda, 1e-3)
    bool adaptive = true;       // residual balancing, factors mu/tau below
    double mu = 10.0;
    double tau = 2.0;
    int max_iters = 5000;
    double eps_abs = 1e-6;
    double eps_rel = 1e-6;
    double cg_tol = 1e-10;      // relative residual of the theta-update solve
    double inner_tol = 1e-10;   // relative duality gap of PDIP z-updates
    int threads = 1;
    bool want_dual = true;      // recover the full-penalty dual at the end
    IterHook iter_hook;
};

struct FitResult {
    GridSignal theta;
    double objective = 0.0;  // recomputed from theta
    int iters = 0;
    std::vector<double> primal_residuals;
    std::vector<double> dual_residuals;
    bool converged = true;
    std::optional<std::vector<double>> dual_u;  // length m, ||u||_inf <= lambda
};

/// Carry-over iterates for warm starts across a lambda grid (approximate; no
/// homotopy guarantee).
struct AdmmState {
    GridSignal theta;
    std::vector<double> z, u;
    double rho = 0.0;
    bool valid = false;
};

double objective(const GridSignal& y, const GridSignal& theta, int k, double lambda);

/// Exact solve of (I + rho * L) x = rhs via the d-dimensional DCT (split j=1).
GridSignal theta_update_dct(const GridSignal& rhs, double rho);

/// Conjugate gradients for (I + rho * D^(j)T D^(j)) x = rhs, matrix-free.
GridSignal theta_update_cg(const GridSignal& rhs, double rho, const KroneckerPenalty& inner,
                           double tol, int* iters_out = nullptr, int max_iters = 0);

/// Proximal map of (lambda_over_rho)*||M^(k+1-j) . ||_1 at w, solved per
/// axis-aligned line: soft-thresholding (j=k+1), TV dynamic programming
/// (j=k), banded interior point otherwise. Lines run independently.
std::vector<double> z_update(const std::vector<double>& w, const PenaltySplit& split,
                             double lambda_over_rho, double tol, int threads = 1,
                             std::vector<double>* dual_out = nullptr, bool* inner_ok = nullptr);

FitResult ktf_admm(const GridSignal& y, int k, double lambda, const AdmmConfig& config,
                   AdmmState* warm = nullptr);

/// Accelerated projected gradient on the box-constrained dual; returns with
/// a certified relative duality gap <= tol (or converged=false). Slow and
/// trustworthy; the reference the other solvers are tested against.
FitResult dual_reference_solve(const GridSignal& y, int k, double lambda, double tol,
                               int max_iters = 200000, const IterHook& hook = {});

/// Smallest lambda at which the fit collapses to the null-space projection;
/// computed as the sup-norm of the least-norm dual (unconstrained FISTA).
double lambda_max(const GridSignal& y, int k, double tol = 1e-9, int max_iters = 100000);

FitResult prox_dykstra(const GridSignal& y, int k, double lambda, int iters,
                       double inner_tol = 1e-10, int threads = 1, const IterHook& hook = {});

/// Douglas-Rachford on the two-block split (axis-1 term with the data
/// fidelity vs. the axis-2 term); d=2 uniform lattices.
FitResult douglas_rachford(const GridSignal& y, int k, double lambda, int iters,
                           double inner_tol = 1e-10, int threads = 1, const IterHook& hook = {});

/// Named solver frontend shared by the CLI and the experiment harness.
/// Names: admm-type0, admm-type1, admm-type2, admm-soft, dykstra, dr, dual-ref.
FitResult solve_named(const std::string& solver, const GridSignal& y, int k, double lambda,
                      const AdmmConfig& base, int splitting_iters = 500, double ref_tol = 1e-8);
int split_index_for(const std::string& solver, int k);

}  // namespace ktf

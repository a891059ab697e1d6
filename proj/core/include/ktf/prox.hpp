#pragma once

#include "ktf/penalty.hpp"

#include <optional>
#include <vector>

namespace ktf {

/// Univariate trend filtering subproblem:
/// minimize over theta  0.5*||y - theta||^2 + lambda*||D^(order) theta||_1.
struct TF1dProblem {
    std::vector<double> y;
    double lambda = 0.0;
    int order = 1;  // k+1
    std::optional<std::vector<double>> design;  // uniform when absent
};

std::vector<double> soft_threshold(const std::vector<double>& v, double t);
void soft_threshold_inplace(double* v, Index n, double t);

/// Exact 1-d total variation denoising (order 1) by Johnson's O(N) dynamic
/// program; ties in knot placement resolve toward the leftmost breakpoint.
std::vector<double> tv1d_dp(const std::vector<double>& y, double lambda);
void tv1d_dp(const double* y, int n, double lambda, double* theta);

struct PdipResult {
    std::vector<double> theta;
    std::vector<double> dual;  // box dual, ||dual||_inf <= lambda
    double gap = 0.0;          // relative duality gap at exit
    int iters = 0;
    bool converged = true;
};

/// Banded primal-dual interior point solve of the box-constrained dual of
/// the trend filtering problem. `tol` is a relative duality-gap target
/// (gap <= tol * max(1, primal objective)). Failure to reach it within the
/// iteration cap is reported via `converged`, never silently.
PdipResult tf1d_pdip_full(const TF1dProblem& problem, double tol, int max_iters = 120);
std::vector<double> tf1d_pdip(const TF1dProblem& problem, double tol);

/// Recover the penalty-dual eta solving D^T eta = r (consistent systems
/// only, e.g. r = w - prox(w)) by forward substitution on the leading rows.
std::vector<double> dual_from_residual(const Diff1d& D, const double* r, Index stride);

/// Symmetric positive definite banded solver (lower storage), used by the
/// interior point Newton steps.
class BandedCholesky {
  public:
    // band[b][i] = A[i+b][i], b = 0..bw, i = 0..p-1
    void factor(int p, int bw, std::vector<double> band);
    void solve(double* x) const;

  private:
    int p_ = 0, bw_ = 0;
    std::vector<double> l_;
};

}  // namespace ktf

#pragma once

#include "ktf/lattice.hpp"

#include <vector>

namespace ktf {

/// Divided difference f[z_1,...,z_r] over distinct points; length 1 returns
/// the value itself.
double divided_difference(const std::vector<double>& points, const std::vector<double>& values);

/// Discrete-spline interpolation on one axis: exact at design points; off
/// the design, solves the one-unknown divided-difference systems
/// f[x_{i-k},...,x_i,x] = 0 (right/interior) or f[x_1,...,x_{k+1},x] = 0
/// (left). Queries outside the design range extrapolate, no clipping.
double interpolate_1d(const std::vector<double>& design, const std::vector<double>& theta,
                      double x, int k);
double interpolate_1d(const std::vector<double>& design, const double* theta, Index stride,
                      double x, int k);

/// Tensor discrete-spline evaluation at x in R^d: picks the k+1 nearest
/// slices on the first axis, recurses, then finishes with univariate
/// interpolation. O((k+1)^(d+1)) arithmetic per query after the locate.
double interpolate(const GridSignal& theta, const std::vector<double>& x, int k);

/// Falling factorial basis function h^k_{N,i}(x) for the given design
/// (1-based i): pure polynomial for i <= k+1, truncated product beyond.
double ffb_eval(int i, double x, const std::vector<double>& design, int k);

/// Dense tensor falling-factorial oracle: solves (H ox ... ox H) alpha =
/// theta by per-axis banded divided-difference inversions, then evaluates
/// the basis expansion at x. Correctness reference for `interpolate`;
/// test scale only (n <= 1e4).
class BasisOracle {
  public:
    BasisOracle(const GridSignal& theta, int k);
    double eval(const std::vector<double>& x) const;

  private:
    LatticeShape shape_;
    int k_;
    GridSignal alpha_;
};

double basis_oracle_eval(const GridSignal& theta, const std::vector<double>& x, int k);

/// Total variation of the piecewise-constant (k=0) interpolant accumulated
/// along axis-parallel slices anchored at lattice cross-sections; equals
/// ktv(theta) exactly.
double ktv_of_interpolant_k0(const GridSignal& theta);

}  // namespace ktf

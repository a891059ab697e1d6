#pragma once

#include "ktf/lattice.hpp"
#include "ktf/penalty.hpp"

#include <vector>

namespace ktf {

/// Eigenvalues of the length-N chain-graph Laplacian: 4 sin^2(pi(l-1)/2N),
/// l = 1..N, nondecreasing.
std::vector<double> chain_laplacian_eigvals(int N);

/// Eigen-decomposition of the N x N Gram D^(k+1)T D^(k+1) of one uniform
/// axis. Eigenvalues ascend with exactly min(k+1, N) zeros; the null-space
/// eigenvectors are discrete Legendre orthogonal polynomials; every
/// eigenvector's first nonzero component is positive.
struct AxisSpectrum {
    int N = 0;
    int k = 0;
    std::vector<double> rho;      // ascending, size N
    std::vector<double> vectors;  // row l = eigenvector l, row-major N x N

    double vec(int l, int i) const { return vectors[static_cast<size_t>(l) * N + i]; }
};

AxisSpectrum axis_spectrum(int N, int k);

/// Eigenvalues of D^T D over the whole lattice as the Kronecker sum of the
/// per-axis spectra: xi_i = sum_j rho^(j)_{i_j}. Lazy by multi-rank; only
/// materialized on request.
class GramEigvals {
  public:
    GramEigvals(const LatticeShape& shape, int k);

    const AxisSpectrum& axis(int j) const { return spectra_[static_cast<size_t>(j - 1)]; }
    /// ranks are 0-based per axis
    double xi(const std::vector<int>& ranks) const;
    Index count() const { return n_; }
    /// all n eigenvalues, lattice order (last axis fastest)
    std::vector<double> materialize() const;

  private:
    std::vector<AxisSpectrum> spectra_;
    std::vector<int> dims_;
    Index n_ = 0;
};

/// Largest eigenvalue of D^T D (sum of per-axis Gram tops); supports general
/// designs. Used as the Lipschitz constant of the dual gradient.
double gram_operator_norm(const KroneckerPenalty& penalty);

/// Projection of y onto the span of the tensor-product eigenvectors indexed
/// by Q (0-based per-axis ranks).
GridSignal eigenmaps_fit(const GridSignal& y, int k, const std::vector<std::vector<int>>& Q);
/// Box Q = [tau]^d (ranks 0..tau-1 on every axis), the Theorem-5 estimator.
GridSignal eigenmaps_fit_box(const GridSignal& y, int k, int tau);

/// Theorem-5 tuning: tau^d ~ (C_n n^{s-1/2})^{1/s} with unit constant,
/// clamped to [k+2, N].
int eigenmaps_tau(double C_n, Index n, int k, int d, int N);

/// Least-squares projection onto polynomials of max degree k (tensor-product
/// discrete Legendre basis per axis). Works on general designs.
GridSignal poly_projection(const GridSignal& y, int k);

/// Solve (I + gamma L^power) theta = y by the DCT diagonalization.
GridSignal laplacian_smoother(const GridSignal& y, int power, double gamma);

/// Nadaraya-Watson estimate with a spherical Gaussian kernel over the lattice
/// coordinates (separable passes).
GridSignal kernel_smoother(const GridSignal& y, double bandwidth);

}  // namespace ktf

#pragma once

#include "ktf/lattice.hpp"

#include <memory>

namespace ktf {

/// Direct solver for (I + rho * L^power) x = rhs on a uniform lattice, where
/// L is the grid-graph Laplacian (Kronecker sum of chain Laplacians), using
/// per-axis type-II cosine transforms. Eigenvalues of the chain Laplacian of
/// length N are 4 sin^2(pi*(l-1)/(2N)), l = 1..N.
///
/// Instances cache transform plans for one shape; they hold scratch buffers
/// and are not safe for concurrent use. Distinct instances are independent.
class DctSolver {
  public:
    explicit DctSolver(const LatticeShape& shape);
    ~DctSolver();
    DctSolver(const DctSolver&) = delete;
    DctSolver& operator=(const DctSolver&) = delete;

    const LatticeShape& shape() const;

    GridSignal solve(const GridSignal& rhs, double rho, int power = 1);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ktf

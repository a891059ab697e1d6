#include "ktf/dct.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace ktf {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct DctSolver::Impl {
    LatticeShape shape;
    Index n = 0;
    double* buf = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::vector<std::vector<double>> axis_eigs;
    double inv_norm = 1.0;

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
};

DctSolver::DctSolver(const LatticeShape& shape) : impl_(std::make_unique<Impl>()) {
    if (!shape.uniform) throw std::invalid_argument("dct solver: uniform lattice required");
    impl_->shape = shape;
    impl_->n = shape.n();
    impl_->buf = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<size_t>(impl_->n)));
    if (!impl_->buf) throw std::bad_alloc();

    const int d = shape.d();
    std::vector<int> dims(shape.dims.begin(), shape.dims.end());
    std::vector<fftw_r2r_kind> fk(static_cast<size_t>(d), FFTW_REDFT10);
    std::vector<fftw_r2r_kind> bk(static_cast<size_t>(d), FFTW_REDFT01);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        impl_->fwd = fftw_plan_r2r(d, dims.data(), impl_->buf, impl_->buf, fk.data(), FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_r2r(d, dims.data(), impl_->buf, impl_->buf, bk.data(), FFTW_ESTIMATE);
    }
    if (!impl_->fwd || !impl_->bwd) throw std::runtime_error("dct solver: planning failed");

    double norm = 1.0;
    impl_->axis_eigs.resize(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        const int N = shape.dims[static_cast<size_t>(j)];
        norm *= 2.0 * N;
        auto& e = impl_->axis_eigs[static_cast<size_t>(j)];
        e.resize(static_cast<size_t>(N));
        for (int i = 0; i < N; ++i) {
            const double s = std::sin(M_PI * i / (2.0 * N));
            e[static_cast<size_t>(i)] = 4.0 * s * s;
        }
    }
    impl_->inv_norm = 1.0 / norm;
}

DctSolver::~DctSolver() = default;

const LatticeShape& DctSolver::shape() const { return impl_->shape; }

GridSignal DctSolver::solve(const GridSignal& rhs, double rho, int power) {
    if (!(rhs.shape == impl_->shape)) throw std::invalid_argument("dct solver: shape mismatch");
    if (power != 1 && power != 2) throw std::invalid_argument("dct solver: power must be 1 or 2");
    if (rho == 0.0) return rhs;

    const Index n = impl_->n;
    for (Index i = 0; i < n; ++i) impl_->buf[i] = rhs[i];
    fftw_execute(impl_->fwd);

    const int d = impl_->shape.d();
    std::vector<int> coord(static_cast<size_t>(d), 0);
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j)
            s += impl_->axis_eigs[static_cast<size_t>(j)][static_cast<size_t>(coord[static_cast<size_t>(j)])];
        const double ev = power == 1 ? s : s * s;
        impl_->buf[i] /= 1.0 + rho * ev;
        for (int j = d - 1; j >= 0; --j) {
            if (++coord[static_cast<size_t>(j)] < impl_->shape.dims[static_cast<size_t>(j)]) break;
            coord[static_cast<size_t>(j)] = 0;
        }
    }

    fftw_execute(impl_->bwd);
    GridSignal out = GridSignal::zeros(impl_->shape);
    for (Index i = 0; i < n; ++i) out[i] = impl_->buf[i] * impl_->inv_norm;
    return out;
}

}  // namespace ktf

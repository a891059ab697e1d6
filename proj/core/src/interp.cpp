#include "ktf/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ktf {

namespace {

/// smallest 1-based index i with design[i-1] >= x; design.size() when x
/// exceeds every design point
int locate_geq(const std::vector<double>& design, double x, bool uniform) {
    const int N = static_cast<int>(design.size());
    if (uniform) {
        // z_i = z_1 + (i-1) h: direct guess plus a short fix-up walk
        const double h = N > 1 ? (design.back() - design.front()) / (N - 1) : 1.0;
        int i = 1 + static_cast<int>(std::ceil((x - design.front()) / h - 1e-12));
        i = std::clamp(i, 1, N);
        while (i > 1 && design[static_cast<size_t>(i - 2)] >= x) --i;
        while (i < N && design[static_cast<size_t>(i - 1)] < x) ++i;
        return i;
    }
    const auto it = std::lower_bound(design.begin(), design.end(), x);
    if (it == design.end()) return N;
    return static_cast<int>(it - design.begin()) + 1;
}

/// Lagrange evaluation through the k+1 points design[lo..lo+k] (0-based lo):
/// the closed form of the one-unknown system f[q_1,...,q_{k+1}, x] = 0.
double lagrange_through(const std::vector<double>& design, int lo, const double* theta,
                        Index stride, double x, int k) {
    double wx = 1.0;
    for (int m = 0; m <= k; ++m) wx *= x - design[static_cast<size_t>(lo + m)];
    double acc = 0.0;
    for (int l = 0; l <= k; ++l) {
        double wl = design[static_cast<size_t>(lo + l)] - x;
        for (int m = 0; m <= k; ++m) {
            if (m == l) continue;
            wl *= design[static_cast<size_t>(lo + l)] - design[static_cast<size_t>(lo + m)];
        }
        acc += theta[(lo + l) * stride] / wl;
    }
    return -wx * acc;
}

double interp1_impl(const std::vector<double>& design, const double* theta, Index stride, double x,
                    int k, bool uniform) {
    const int N = static_cast<int>(design.size());
    if (N < k + 1) throw std::domain_error("interpolate_1d: need at least k+1 design points");

    const int i_geq = locate_geq(design, x, uniform);
    if (design[static_cast<size_t>(i_geq - 1)] == x) return theta[(i_geq - 1) * stride];

    if (x > design[static_cast<size_t>(k)]) {
        // smallest i with x_i > x, i = N beyond the last point
        int i = i_geq;
        if (design[static_cast<size_t>(i - 1)] < x) i = N;  // x beyond x_N
        return lagrange_through(design, i - 1 - k, theta, stride, x, k);
    }
    return lagrange_through(design, 0, theta, stride, x, k);
}

}  // namespace

double divided_difference(const std::vector<double>& points, const std::vector<double>& values) {
    const size_t r = points.size();
    if (r == 0 || values.size() != r)
        throw std::invalid_argument("divided_difference: need matching nonempty points/values");
    std::vector<double> dd = values;
    for (size_t level = 1; level < r; ++level) {
        for (size_t i = 0; i + level < r; ++i) {
            const double den = points[i + level] - points[i];
            if (den == 0.0) throw std::invalid_argument("divided_difference: repeated points");
            dd[i] = (dd[i + 1] - dd[i]) / den;
        }
    }
    return dd[0];
}

double interpolate_1d(const std::vector<double>& design, const double* theta, Index stride,
                      double x, int k) {
    return interp1_impl(design, theta, stride, x, k, false);
}

double interpolate_1d(const std::vector<double>& design, const std::vector<double>& theta,
                      double x, int k) {
    if (theta.size() != design.size())
        throw std::invalid_argument("interpolate_1d: design/value length mismatch");
    return interp1_impl(design, theta.data(), 1, x, k, false);
}

namespace {

double interp_rec(const GridSignal& theta, const std::vector<double>& x, int k, int axis,
                  Index offset, const std::vector<Index>& strides) {
    const LatticeShape& shape = theta.shape;
    const int d = shape.d();
    const std::vector<double>& design = shape.designs[static_cast<size_t>(axis)];
    const int N = shape.dims[static_cast<size_t>(axis)];

    if (axis == d - 1) {
        return interp1_impl(design, theta.values.data() + offset, strides[static_cast<size_t>(axis)],
                            x[static_cast<size_t>(axis)], k, shape.uniform);
    }

    const int i1 = locate_geq(design, x[static_cast<size_t>(axis)], shape.uniform);
    const int l1 = std::min(std::max(i1 - k, 1), N - k);

    std::vector<double> sub(static_cast<size_t>(k + 1));
    std::vector<double> vals(static_cast<size_t>(k + 1));
    for (int p = 0; p <= k; ++p) {
        sub[static_cast<size_t>(p)] = design[static_cast<size_t>(l1 - 1 + p)];
        vals[static_cast<size_t>(p)] =
            interp_rec(theta, x, k, axis + 1,
                       offset + static_cast<Index>(l1 - 1 + p) * strides[static_cast<size_t>(axis)],
                       strides);
    }
    return interp1_impl(sub, vals.data(), 1, x[static_cast<size_t>(axis)], k, false);
}

}  // namespace

double interpolate(const GridSignal& theta, const std::vector<double>& x, int k) {
    const LatticeShape& shape = theta.shape;
    if (static_cast<int>(x.size()) != shape.d())
        throw std::invalid_argument("interpolate: query dimension mismatch");
    for (int N : shape.dims)
        if (N < k + 1) throw std::domain_error("interpolate: every side length must be >= k+1");
    return interp_rec(theta, x, k, 0, 0, shape.strides());
}

double ffb_eval(int i, double x, const std::vector<double>& design, int k) {
    const int N = static_cast<int>(design.size());
    if (i < 1 || i > N) throw std::out_of_range("ffb_eval: basis index out of range");
    double fact = 1.0, prod = 1.0;
    if (i <= k + 1) {
        for (int j = 1; j <= i - 1; ++j) {
            prod *= x - design[static_cast<size_t>(j - 1)];
            fact *= j;
        }
        return prod / fact;
    }
    if (!(x > design[static_cast<size_t>(i - 2)])) return 0.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    for (int j = i - k; j <= i - 1; ++j) prod *= x - design[static_cast<size_t>(j - 1)];
    return prod / fact;
}

BasisOracle::BasisOracle(const GridSignal& theta, int k) : shape_(theta.shape), k_(k) {
    if (shape_.n() > 10000) throw std::domain_error("basis oracle: size cap exceeded (n <= 1e4)");
    for (int N : shape_.dims)
        if (N < k + 1) throw std::domain_error("basis oracle: side length < k+1");

    // alpha = (H^-1 ox ... ox H^-1) theta, one axis at a time. Per axis the
    // inverse map is banded: alpha_i = (i-1)! * theta[z_1..z_i] for
    // i <= k+1 and alpha_i = k! * (z_i - z_{i-k-1}) * theta[z_{i-k-1}..z_i]
    // beyond, validated against dense inversion of H in the tests.
    double kfact = 1.0;
    for (int a = 2; a <= k_; ++a) kfact *= a;
    alpha_ = theta;
    for (int axis = 1; axis <= shape_.d(); ++axis) {
        const std::vector<double>& z = shape_.designs[static_cast<size_t>(axis - 1)];
        const int N = shape_.dims[static_cast<size_t>(axis - 1)];
        std::vector<double> line(static_cast<size_t>(N)), out(static_cast<size_t>(N));
        std::vector<double> pts, vals;
        for_each_line(shape_, axis, [&](Index base, Index stride, int count) {
            for (int t = 0; t < count; ++t) line[static_cast<size_t>(t)] = alpha_[base + t * stride];
            double fact = 1.0;
            for (int i = 1; i <= std::min(k_ + 1, N); ++i) {
                pts.assign(z.begin(), z.begin() + i);
                vals.assign(line.begin(), line.begin() + i);
                if (i > 1) fact *= (i - 1);
                out[static_cast<size_t>(i - 1)] = fact * divided_difference(pts, vals);
            }
            for (int i = k_ + 2; i <= N; ++i) {
                pts.assign(z.begin() + (i - k_ - 2), z.begin() + i);
                vals.assign(line.begin() + (i - k_ - 2), line.begin() + i);
                out[static_cast<size_t>(i - 1)] =
                    kfact *
                    (z[static_cast<size_t>(i - 1)] - z[static_cast<size_t>(i - k_ - 2)]) *
                    divided_difference(pts, vals);
            }
            for (int t = 0; t < count; ++t) alpha_[base + t * stride] = out[static_cast<size_t>(t)];
        });
    }
}

double BasisOracle::eval(const std::vector<double>& x) const {
    const int d = shape_.d();
    if (static_cast<int>(x.size()) != d)
        throw std::invalid_argument("basis oracle: query dimension mismatch");
    std::vector<std::vector<double>> b(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        const int N = shape_.dims[static_cast<size_t>(j)];
        b[static_cast<size_t>(j)].resize(static_cast<size_t>(N));
        for (int i = 1; i <= N; ++i)
            b[static_cast<size_t>(j)][static_cast<size_t>(i - 1)] =
                ffb_eval(i, x[static_cast<size_t>(j)], shape_.designs[static_cast<size_t>(j)], k_);
    }
    std::vector<int> coord(static_cast<size_t>(d), 0);
    double acc = 0.0;
    for (Index f = 0; f < alpha_.n(); ++f) {
        double w = alpha_[f];
        for (int j = 0; j < d; ++j)
            w *= b[static_cast<size_t>(j)][static_cast<size_t>(coord[static_cast<size_t>(j)])];
        acc += w;
        for (int j = d - 1; j >= 0; --j) {
            if (++coord[static_cast<size_t>(j)] < shape_.dims[static_cast<size_t>(j)]) break;
            coord[static_cast<size_t>(j)] = 0;
        }
    }
    return acc;
}

double basis_oracle_eval(const GridSignal& theta, const std::vector<double>& x, int k) {
    return BasisOracle(theta, k).eval(x);
}

double ktv_of_interpolant_k0(const GridSignal& theta) {
    const LatticeShape& shape = theta.shape;
    const int d = shape.d();
    double total = 0.0;
    std::vector<double> q(static_cast<size_t>(d));
    for (int axis = 0; axis < d; ++axis) {
        const std::vector<double>& z = shape.designs[static_cast<size_t>(axis)];
        const int N = shape.dims[static_cast<size_t>(axis)];
        if (N < 2) continue;

        // walk slices in lexicographic order of the other coordinates
        std::vector<int> coord(static_cast<size_t>(d), 0);
        while (true) {
            for (int j = 0; j < d; ++j)
                q[static_cast<size_t>(j)] =
                    shape.designs[static_cast<size_t>(j)][static_cast<size_t>(coord[static_cast<size_t>(j)])];
            // sample the step function left of the domain and at gap midpoints
            q[static_cast<size_t>(axis)] = z[0] - 0.5 * (z[1] - z[0]);
            double prev = interpolate(theta, q, 0);
            for (int i = 0; i + 1 < N; ++i) {
                q[static_cast<size_t>(axis)] =
                    0.5 * (z[static_cast<size_t>(i)] + z[static_cast<size_t>(i + 1)]);
                const double cur = interpolate(theta, q, 0);
                total += std::abs(cur - prev);
                prev = cur;
            }
            int j = d - 1;
            for (; j >= 0; --j) {
                if (j == axis) continue;
                if (++coord[static_cast<size_t>(j)] < shape.dims[static_cast<size_t>(j)]) break;
                coord[static_cast<size_t>(j)] = 0;
            }
            if (j < 0) break;
        }
    }
    return total;
}

}  // namespace ktf

#include "ktf/lattice.hpp"

#include <cmath>
#include <limits>

namespace ktf {

namespace {

bool axis_is_uniform(const std::vector<double>& z) {
    const int n = static_cast<int>(z.size());
    if (n <= 2) return true;
    const double h = (z.back() - z.front()) / (n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        if (std::abs((z[i + 1] - z[i]) - h) > 1e-12 * std::max(1.0, std::abs(h))) return false;
    }
    return true;
}

}  // namespace

LatticeShape LatticeShape::make_uniform(std::vector<int> dims) {
    LatticeShape s;
    for (int N : dims) {
        if (N < 1) throw std::invalid_argument("lattice: dims must be positive");
    }
    s.dims = std::move(dims);
    s.designs.reserve(s.dims.size());
    for (int N : s.dims) {
        std::vector<double> z(static_cast<size_t>(N));
        for (int i = 1; i <= N; ++i) z[static_cast<size_t>(i - 1)] = static_cast<double>(i) / N;
        s.designs.push_back(std::move(z));
    }
    s.uniform = true;
    return s;
}

LatticeShape LatticeShape::make_general(std::vector<std::vector<double>> designs) {
    LatticeShape s;
    s.uniform = true;
    for (const auto& z : designs) {
        if (z.empty()) throw std::invalid_argument("lattice: empty axis design");
        for (size_t i = 0; i + 1 < z.size(); ++i) {
            if (!(z[i] < z[i + 1]))
                throw std::invalid_argument("lattice: design points must be strictly increasing");
        }
        s.dims.push_back(static_cast<int>(z.size()));
        s.uniform = s.uniform && axis_is_uniform(z);
    }
    s.designs = std::move(designs);
    return s;
}

Index LatticeShape::n() const {
    Index p = 1;
    for (int N : dims) {
        if (N > 0 && p > std::numeric_limits<Index>::max() / N)
            throw std::overflow_error("lattice: total size overflows index range");
        p *= N;
    }
    return p;
}

std::vector<Index> LatticeShape::strides() const {
    std::vector<Index> s(dims.size());
    Index acc = 1;
    for (int j = d() - 1; j >= 0; --j) {
        s[static_cast<size_t>(j)] = acc;
        acc *= dims[static_cast<size_t>(j)];
    }
    return s;
}

GridSignal::GridSignal(LatticeShape s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
    if (static_cast<Index>(values.size()) != shape.n())
        throw std::invalid_argument("grid signal: value count does not match lattice size");
    for (double x : values) {
        if (!std::isfinite(x)) throw std::invalid_argument("grid signal: non-finite entry");
    }
}

GridSignal GridSignal::zeros(const LatticeShape& s) {
    GridSignal g;
    g.shape = s;
    g.values.assign(static_cast<size_t>(s.n()), 0.0);
    return g;
}

Index flat_index(const LatticeShape& shape, const MultiIndex& idx) {
    if (static_cast<int>(idx.coords.size()) != shape.d())
        throw std::invalid_argument("flat_index: dimension mismatch");
    const auto str = shape.strides();
    Index f = 0;
    for (int j = 0; j < shape.d(); ++j) {
        const int c = idx.coords[static_cast<size_t>(j)];
        if (c < 1 || c > shape.dims[static_cast<size_t>(j)])
            throw std::out_of_range("flat_index: coordinate out of bounds");
        f += static_cast<Index>(c - 1) * str[static_cast<size_t>(j)];
    }
    return f;
}

MultiIndex multi_index(const LatticeShape& shape, Index flat) {
    if (flat < 0 || flat >= shape.n()) throw std::out_of_range("multi_index: flat index out of range");
    MultiIndex m;
    m.coords.assign(static_cast<size_t>(shape.d()), 1);
    for (int j = shape.d() - 1; j >= 0; --j) {
        const int N = shape.dims[static_cast<size_t>(j)];
        m.coords[static_cast<size_t>(j)] = static_cast<int>(flat % N) + 1;
        flat /= N;
    }
    return m;
}

void for_each_line(const LatticeShape& shape, int axis,
                   const std::function<void(Index, Index, int)>& fn) {
    for_each_line_reduced(shape, axis, shape.dims[static_cast<size_t>(axis - 1)],
                          [&](Index base, Index stride, int count, Index, Index) {
                              fn(base, stride, count);
                          });
}

void for_each_line_reduced(const LatticeShape& shape, int axis, int reduced_extent,
                           const std::function<void(Index, Index, int, Index, Index)>& fn) {
    const int d = shape.d();
    if (axis < 1 || axis > d) throw std::out_of_range("lines: axis out of range");
    const int a = axis - 1;
    const auto str = shape.strides();

    LatticeShape reduced = shape;
    reduced.dims[static_cast<size_t>(a)] = reduced_extent;
    const auto rstr = reduced.strides();

    // Odometer over all axes except `a`, tracking both offsets.
    std::vector<int> coord(static_cast<size_t>(d), 0);
    const int count = shape.dims[static_cast<size_t>(a)];
    Index base = 0, rbase = 0;
    while (true) {
        fn(base, str[static_cast<size_t>(a)], count, rbase, rstr[static_cast<size_t>(a)]);
        int j = d - 1;
        for (; j >= 0; --j) {
            if (j == a) continue;
            if (++coord[static_cast<size_t>(j)] < shape.dims[static_cast<size_t>(j)]) {
                base += str[static_cast<size_t>(j)];
                rbase += rstr[static_cast<size_t>(j)];
                break;
            }
            base -= static_cast<Index>(coord[static_cast<size_t>(j)] - 1) * str[static_cast<size_t>(j)];
            rbase -= static_cast<Index>(coord[static_cast<size_t>(j)] - 1) * rstr[static_cast<size_t>(j)];
            coord[static_cast<size_t>(j)] = 0;
        }
        if (j < 0) break;
    }
}

std::vector<std::vector<Index>> lines(const LatticeShape& shape, int axis) {
    std::vector<std::vector<Index>> out;
    for_each_line(shape, axis, [&](Index base, Index stride, int count) {
        std::vector<Index> line(static_cast<size_t>(count));
        for (int t = 0; t < count; ++t) line[static_cast<size_t>(t)] = base + t * stride;
        out.push_back(std::move(line));
    });
    return out;
}

GridSignal forward_diff(const GridSignal& signal, int axis, int order) {
    if (order < 0) throw std::invalid_argument("forward_diff: negative order");
    const int d = signal.shape.d();
    if (axis < 1 || axis > d) throw std::out_of_range("forward_diff: axis out of range");
    if (order == 0) return signal;

    GridSignal out = signal;
    std::vector<double> buf;
    for_each_line(signal.shape, axis, [&](Index base, Index stride, int count) {
        buf.resize(static_cast<size_t>(count));
        for (int t = 0; t < count; ++t) buf[static_cast<size_t>(t)] = out[base + t * stride];
        int valid = count;
        for (int o = 0; o < order; ++o) {
            valid -= 1;
            for (int t = 0; t < valid; ++t)
                buf[static_cast<size_t>(t)] = buf[static_cast<size_t>(t + 1)] - buf[static_cast<size_t>(t)];
        }
        if (valid < 0) valid = 0;
        for (int t = 0; t < count; ++t)
            out[base + t * stride] = (t < valid) ? buf[static_cast<size_t>(t)] : 0.0;
    });
    return out;
}

}  // namespace ktf

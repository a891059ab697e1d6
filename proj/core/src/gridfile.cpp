#include "ktf/gridfile.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ktf {

namespace {

constexpr char kMagic[4] = {'K', 'T', 'F', 'G'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeF64 = 0;

struct AtomicFile {
    std::string path, tmp;
    std::ofstream out;

    AtomicFile(const std::string& p, bool binary) : path(p), tmp(p + ".tmp") {
        out.open(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    }
    void commit() {
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp);
        out.close();
        if (std::rename(tmp.c_str(), path.c_str()) != 0)
            throw std::runtime_error("cannot rename into place: " + path);
    }
};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("grid file: truncated input");
    return v;
}

bool axis_uniform_design(const std::vector<double>& z) {
    const int N = static_cast<int>(z.size());
    for (int i = 1; i <= N; ++i)
        if (z[static_cast<size_t>(i - 1)] != static_cast<double>(i) / N) return false;
    return true;
}

}  // namespace

void write_grid_bin(const std::string& path, const GridSignal& g) {
    AtomicFile f(path, true);
    f.out.write(kMagic, 4);
    put(f.out, kVersion);
    put(f.out, static_cast<std::uint32_t>(g.shape.d()));
    for (int j = 0; j < g.shape.d(); ++j) {
        put(f.out, static_cast<std::uint64_t>(g.shape.dims[static_cast<size_t>(j)]));
        const auto& z = g.shape.designs[static_cast<size_t>(j)];
        const std::uint8_t uni = axis_uniform_design(z) ? 1 : 0;
        put(f.out, uni);
        if (!uni)
            f.out.write(reinterpret_cast<const char*>(z.data()),
                        static_cast<std::streamsize>(sizeof(double) * z.size()));
    }
    put(f.out, kDtypeF64);
    f.out.write(reinterpret_cast<const char*>(g.values.data()),
                static_cast<std::streamsize>(sizeof(double) * g.values.size()));
    f.commit();
}

GridSignal read_grid_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("grid file: bad magic in " + path);
    if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("grid file: unknown version");
    const auto d = get<std::uint32_t>(in);
    if (d == 0 || d > 16) throw std::runtime_error("grid file: implausible dimension");
    std::vector<std::vector<double>> designs;
    for (std::uint32_t j = 0; j < d; ++j) {
        const auto N = get<std::uint64_t>(in);
        if (N == 0 || N > (1ull << 40)) throw std::runtime_error("grid file: implausible axis size");
        const auto uni = get<std::uint8_t>(in);
        std::vector<double> z(static_cast<size_t>(N));
        if (uni) {
            for (std::uint64_t i = 1; i <= N; ++i)
                z[static_cast<size_t>(i - 1)] = static_cast<double>(i) / static_cast<double>(N);
        } else {
            in.read(reinterpret_cast<char*>(z.data()),
                    static_cast<std::streamsize>(sizeof(double) * z.size()));
            if (!in) throw std::runtime_error("grid file: truncated design");
        }
        designs.push_back(std::move(z));
    }
    if (get<std::uint8_t>(in) != kDtypeF64) throw std::runtime_error("grid file: unknown dtype");
    LatticeShape shape = LatticeShape::make_general(std::move(designs));
    std::vector<double> values(static_cast<size_t>(shape.n()));
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(sizeof(double) * values.size()));
    if (!in) throw std::runtime_error("grid file: truncated payload");
    return GridSignal(std::move(shape), std::move(values));
}

void write_grid_csv(const std::string& path, const GridSignal& g) {
    if (g.shape.d() > 2) throw std::invalid_argument("csv grids support d <= 2");
    AtomicFile f(path, false);
    char buf[64];
    f.out << "# ktf-grid v1\n# dims:";
    for (int N : g.shape.dims) f.out << ' ' << N;
    f.out << '\n';
    for (int j = 0; j < g.shape.d(); ++j) {
        const auto& z = g.shape.designs[static_cast<size_t>(j)];
        if (axis_uniform_design(z)) {
            f.out << "# axis " << (j + 1) << ": uniform\n";
        } else {
            f.out << "# axis " << (j + 1) << ":";
            for (double v : z) {
                std::snprintf(buf, sizeof buf, " %.17g", v);
                f.out << buf;
            }
            f.out << '\n';
        }
    }
    const int rows = g.shape.dims[0];
    const int cols = g.shape.d() == 2 ? g.shape.dims[1] : 1;
    Index idx = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c, ++idx) {
            std::snprintf(buf, sizeof buf, "%.17g", g[idx]);
            f.out << (c ? "," : "") << buf;
        }
        f.out << '\n';
    }
    f.commit();
}

GridSignal read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<int> dims;
    std::vector<std::vector<double>> designs;
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string word;
            ss >> word;
            if (word == "dims:") {
                int N;
                while (ss >> N) dims.push_back(N);
            } else if (word == "axis") {
                std::string rest;
                ss >> rest;  // "<j>:"
                std::string spec;
                std::getline(ss, spec);
                std::istringstream sv(spec);
                std::string first;
                sv >> first;
                if (first == "uniform") {
                    designs.emplace_back();  // filled from dims later
                } else {
                    std::vector<double> z;
                    z.push_back(std::stod(first));
                    double v;
                    while (sv >> v) z.push_back(v);
                    designs.push_back(std::move(z));
                }
            }
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    }
    if (dims.empty()) throw std::runtime_error("csv grid: missing '# dims:' header in " + path);
    while (designs.size() < dims.size()) designs.emplace_back();
    for (size_t j = 0; j < dims.size(); ++j) {
        if (!designs[j].empty()) continue;
        const int N = dims[j];
        designs[j].resize(static_cast<size_t>(N));
        for (int i = 1; i <= N; ++i) designs[j][static_cast<size_t>(i - 1)] = static_cast<double>(i) / N;
    }
    return GridSignal(LatticeShape::make_general(std::move(designs)), std::move(values));
}

void write_grid_pgm(const std::string& path, const GridSignal& g) {
    if (g.shape.d() != 2) throw std::invalid_argument("pgm grids are d = 2 only");
    AtomicFile f(path, true);
    f.out << "P5\n" << g.shape.dims[1] << ' ' << g.shape.dims[0] << "\n255\n";
    for (double v : g.values) {
        const double c = std::min(1.0, std::max(0.0, v));
        const auto byte = static_cast<unsigned char>(c * 255.0 + 0.5);
        f.out.put(static_cast<char>(byte));
    }
    f.commit();
}

GridSignal read_grid_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("pgm: only binary P5 supported");
    auto next_token = [&in]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw std::runtime_error("pgm: truncated header");
    };
    const int width = std::stoi(next_token());
    const int height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval != 255) throw std::runtime_error("pgm: only maxval 255 supported");
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw std::runtime_error("pgm: truncated payload");
    std::vector<double> values(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) values[i] = raw[i] / 255.0;
    return GridSignal(LatticeShape::make_uniform({height, width}), std::move(values));
}

void write_grid(const std::string& path, const GridSignal& g, const std::string& format) {
    if (format == "bin") return write_grid_bin(path, g);
    if (format == "csv") return write_grid_csv(path, g);
    if (format == "pgm") return write_grid_pgm(path, g);
    throw std::invalid_argument("unknown grid format: " + format);
}

GridSignal read_grid(const std::string& path, const std::string& format) {
    if (format == "bin") return read_grid_bin(path);
    if (format == "csv") return read_grid_csv(path);
    if (format == "pgm") return read_grid_pgm(path);
    throw std::invalid_argument("unknown grid format: " + format);
}

}  // namespace ktf

#pragma once

#include "ktf/lattice.hpp"

#include <string>

namespace ktf {

/// Self-describing binary grid container ("KTFG"): header carries dims and
/// per-axis designs (or a uniform marker) plus the value dtype; payload is
/// the flat f64 vector, last axis fastest. Round-trips bit-exactly.
void write_grid_bin(const std::string& path, const GridSignal& g);
GridSignal read_grid_bin(const std::string& path);

/// CSV for d <= 2: axis 1 indexes rows, axis 2 columns; '#' header lines
/// carry dims and designs. Values print with max round-trip precision.
void write_grid_csv(const std::string& path, const GridSignal& g);
GridSignal read_grid_csv(const std::string& path);

/// 8-bit binary PGM mapped to [0,1] (v/255), d = 2, uniform lattice.
void write_grid_pgm(const std::string& path, const GridSignal& g);
GridSignal read_grid_pgm(const std::string& path);

/// format in {"bin", "csv", "pgm"}
void write_grid(const std::string& path, const GridSignal& g, const std::string& format);
GridSignal read_grid(const std::string& path, const std::string& format);

}  // namespace ktf

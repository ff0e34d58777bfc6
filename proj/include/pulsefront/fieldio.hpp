#pragma once

#include <string>

#include "pulsefront/grid.hpp"

namespace pulsefront {

/// Binary dump layout, all little-endian:
///   char[4] "PFLD", u32 version, u32 dim count, u32 grid kind, u32 boundary policy,
///   u64 points[dim], f64 (lo, hi)[dim], u8 periodic[dim], f64 time,
///   f64 values[prod(points)] in row-major order (last axis fastest).
inline constexpr char kFieldMagic[4] = {'P', 'F', 'L', 'D'};
inline constexpr unsigned kFieldVersion = 1;

void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

/// Writes the dump to `path` and a JSON description to `path` + ".json": layout, axes, time,
/// value range, plus the members of `extra` (a JSON object text, may be empty).
void write_field_with_sidecar(const std::string& path, const Field& f, const std::string& extra = {});

/// Writes the 1D slice along `axis` through the node `fixed` (other axes) as CSV with
/// one coordinate column and one value column. Values are printed with 17 significant digits.
void write_csv_slice(const std::string& path, const Field& f, int axis, const std::vector<int>& fixed);

/// Writes every 1D slice along `axis` as one CSV table (all coordinates, then value).
void write_csv_all(const std::string& path, const Field& f);

}  // namespace pulsefront

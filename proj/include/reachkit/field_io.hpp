#pragma once

#include <filesystem>

#include "reachkit/grid.hpp"

namespace reachkit {

// VFLD container: 8-byte magic "VFLD\0\0\0\1"; per axis lo, hi (f64 LE),
// count (u64 LE) and a periodic byte; then a row-major payload of f64 LE
// values (fields) or single bytes (masks).
void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(const std::filesystem::path& path);

void write_mask(const std::filesystem::path& path, const BoolMask& mask);
BoolMask read_mask(const std::filesystem::path& path);

// Header-only read, used to detect grid mismatches before loading payloads.
Grid3 read_grid(const std::filesystem::path& path);

}  // namespace reachkit

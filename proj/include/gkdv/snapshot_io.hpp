#pragma once

#include "gkdv/pde.hpp"

#include <cstdint>
#include <filesystem>

namespace gkdv {

// "GKDVSNAP", u32 version, i32 p, i32 frame, f64 L, i32 N, f64 t, f64[N] field.
// Layout documented in FORMATS.md; the grid is centred at 0.
inline constexpr std::uint32_t kSnapshotFormatVersion = 1;

struct Snapshot {
    int p = 0;
    FieldState state;
};

void write_snapshot(const FieldState& state, int p, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace gkdv

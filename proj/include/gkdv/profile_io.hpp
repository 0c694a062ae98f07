#pragma once

#include "gkdv/linearized.hpp"

#include <cstdint>
#include <filesystem>

namespace gkdv {

// Versioned little-endian binary: "GKDVPROF", u32 version, then the fields of ProfileSet.
// Layout documented in FORMATS.md.
inline constexpr std::uint32_t kProfileFormatVersion = 1;

void write_profiles(const ProfileSet& profiles, const std::filesystem::path& path);
ProfileSet read_profiles(const std::filesystem::path& path);  // finalized on return

// One row per node: x, A1, A2, hat1, hat2 (and Z+, Z- when they share the grid).
void write_profiles_csv(const ProfileSet& profiles, const std::filesystem::path& path);

}  // namespace gkdv

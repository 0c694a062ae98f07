#include "gkdv/snapshot_io.hpp"

#include "binary_io.hpp"

#include <array>
#include <cstring>

namespace gkdv {

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'K', 'D', 'V', 'S', 'N', 'A', 'P'};

}  // namespace

void write_snapshot(const FieldState& state, int p, const std::filesystem::path& path)
{
    if (state.grid.center != 0) throw std::invalid_argument("write_snapshot: grid must be centred at 0");
    if (state.w.size() != state.grid.n) throw std::invalid_argument("write_snapshot: field size mismatch");
    detail::Writer out(path);
    out.put_bytes(kMagic.data(), kMagic.size());
    out.put(kSnapshotFormatVersion);
    out.put(std::int32_t(p));
    out.put(std::int32_t(state.frame));
    out.put(state.grid.half_length);
    out.put(std::int32_t(state.grid.n));
    out.put(state.t);
    out.put(state.w);
    out.finish();
}

Snapshot read_snapshot(const std::filesystem::path& path)
{
    detail::Reader in(path);
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (magic != kMagic) throw std::runtime_error(path.string() + ": not a snapshot file");
    const auto version = in.get<std::uint32_t>();
    if (version != kSnapshotFormatVersion)
        throw std::runtime_error(path.string() + ": unsupported snapshot version " + std::to_string(version));
    Snapshot snap;
    snap.p = in.get<std::int32_t>();
    const auto frame = in.get<std::int32_t>();
    if (frame != 0 && frame != 1) throw std::runtime_error(path.string() + ": bad frame tag");
    snap.state.frame = static_cast<Frame>(frame);
    const double half_length = in.get<double>();
    const int n = in.get<std::int32_t>();
    snap.state.grid = PeriodicGrid::make(half_length, n);
    snap.state.t = in.get<double>();
    snap.state.w = in.get_vector(n);
    return snap;
}

}  // namespace gkdv

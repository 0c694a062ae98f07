#include "gkdv/profile_io.hpp"

#include "binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace gkdv {

namespace {

using detail::Reader;
using detail::Writer;

constexpr std::array<char, 8> kMagic = {'G', 'K', 'D', 'V', 'P', 'R', 'O', 'F'};

}  // namespace

void write_profiles(const ProfileSet& P, const std::filesystem::path& path)
{
    Writer w(path);
    w.put_bytes(kMagic.data(), kMagic.size());
    w.put(kProfileFormatVersion);
    w.put(std::int32_t(P.p));
    w.put(std::int32_t(P.grid.n));
    w.put(P.grid.half_width);
    for (double c : {P.alpha, P.theta, P.a1, P.a2, P.e0}) w.put(c);
    w.put(P.hat1);
    w.put(P.hat2);
    w.put(std::uint8_t(P.edge ? 1 : 0));
    if (P.edge) {
        w.put(std::int32_t(P.edge->grid.n));
        w.put(P.edge->grid.half_width);
        w.put(P.edge->residual);
        w.put(P.edge->plus);
    }
    w.finish();
}

ProfileSet read_profiles(const std::filesystem::path& path)
{
    Reader r(path);
    std::array<char, 8> magic;
    r.read(magic.data(), magic.size());
    if (magic != kMagic) throw std::runtime_error(path.string() + ": not a profile file");
    const auto version = r.get<std::uint32_t>();
    if (version != kProfileFormatVersion)
        throw std::runtime_error(path.string() + ": unsupported profile format version " + std::to_string(version));

    ProfileSet P;
    P.p = r.get<std::int32_t>();
    const Power power(P.p);
    P.sigma = power.sigma();
    const int n = r.get<std::int32_t>();
    const double X = r.get<double>();
    P.grid = LineGrid::make(X, n);
    P.alpha = r.get<double>();
    P.theta = r.get<double>();
    P.a1 = r.get<double>();
    P.a2 = r.get<double>();
    P.e0 = r.get<double>();
    P.hat1 = r.get_vector(n);
    P.hat2 = r.get_vector(n);
    if (r.get<std::uint8_t>()) {
        EdgeEigenpair e;
        const int en = r.get<std::int32_t>();
        const double ex = r.get<double>();
        e.grid = LineGrid::make(ex, en);
        e.residual = r.get<double>();
        e.e0 = P.e0;
        e.plus = r.get_vector(en);
        e.minus = e.plus.reverse();
        P.edge = std::move(e);
    }
    P.finalize();
    return P;
}

void write_profiles_csv(const ProfileSet& P, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const bool shared_edge = P.edge && P.edge->grid.n == P.grid.n && P.edge->grid.half_width == P.grid.half_width;
    const Eigen::VectorXd A1 = P.full(1), A2 = P.full(2);
    out << "# p=" << P.p << " alpha=" << std::setprecision(17) << P.alpha << " theta=" << P.theta << " a1=" << P.a1
        << " a2=" << P.a2 << " e0=" << P.e0 << "\n";
    out << "x,A1,A2,hat1,hat2" << (shared_edge ? ",Zplus,Zminus" : "") << "\n";
    for (int j = 0; j < P.grid.n; ++j) {
        out << P.grid.node(j) << ',' << A1[j] << ',' << A2[j] << ',' << P.hat1[j] << ',' << P.hat2[j];
        if (shared_edge) out << ',' << P.edge->plus[j] << ',' << P.edge->minus[j];
        out << '\n';
    }
    if (!out) throw std::runtime_error("profile CSV write failed");
}

}  // namespace gkdv

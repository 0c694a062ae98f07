#include <doctest.h>

#include "gkdv/ansatz.hpp"
#include "gkdv/pde.hpp"
#include "gkdv/snapshot_io.hpp"
#include "gkdv/soliton.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace gkdv;

namespace {

const ProfileSet& profiles_for(int p)
{
    static const ProfileSet p3 = build_profiles(3, LineGrid::make(), false);
    static const ProfileSet p4 = build_profiles(4, LineGrid::make(), false);
    return p == 3 ? p3 : p4;
}

FieldState soliton_state(int p, const PeriodicGrid& grid, double v, double center, Frame frame)
{
    const GroundState<double> ground{Power(p)};
    FieldState state;
    state.grid = grid;
    state.frame = frame;
    state.w = grid.sample([&](double y) { return ground.value(y - center, v); });
    return state;
}

// Two bubbles at separation z = 10 on the formal-flow curve, starting at t = 20.
FieldState pair_state(int p, const PeriodicGrid& grid)
{
    const ProfileSet& profiles = profiles_for(p);
    AnsatzOptions options;
    options.cutoff_scale_limit = 0.6 * grid.half_length;
    FieldState state;
    state.grid = grid;
    state.t = 20;
    state.w = build_V(symmetric_params(10, profiles.alpha), profiles, grid, options).V;
    return state;
}

double l2_norm(const PeriodicGrid& grid, const Eigen::VectorXd& f) { return std::sqrt(grid.spacing()) * f.norm(); }

// Location of the maximum refined by a parabola through the three top samples.
double peak_location(const FieldState& state)
{
    Eigen::Index top = 0;
    state.w.maxCoeff(&top);
    const double left = state.w[top - 1], mid = state.w[top], right = state.w[top + 1];
    const double offset = 0.5 * (left - right) / (left - 2 * mid + right);
    return state.grid.node(int(top)) + offset * state.grid.spacing();
}

double relative_change(double before, double after) { return std::abs(after - before) / std::abs(before); }

}  // namespace

TEST_CASE("stationary soliton in the renormalized frame")
{
    const PeriodicGrid grid = PeriodicGrid::make(128, 4096);
    const SpectralDifferentiator differ(grid);
    for (int p : {3, 4}) {
        CAPTURE(p);
        SolverConfig config;
        config.p = p;
        config.dt = 0.0025;
        const FieldState start = soliton_state(p, grid, 1.0, 3.0, Frame::renormalized);
        FieldState state = start;
        evolve(state, 10, config);
        CHECK(state.t == 10);
        CHECK(differ.h1_norm(state.w - start.w) < 1e-6);
    }
}

TEST_CASE("lab-frame soliton travels at its speed")
{
    const PeriodicGrid grid = PeriodicGrid::make(128, 4096);
    const double speed = 1.2;
    for (int p : {3, 4}) {
        CAPTURE(p);
        SolverConfig config;
        config.p = p;
        config.dt = 0.0025;
        FieldState state = soliton_state(p, grid, speed, -6.0, Frame::lab);
        const double start = peak_location(state);
        CHECK(start == doctest::Approx(-6.0).epsilon(1e-4));
        evolve(state, 10, config);
        CHECK(std::abs(peak_location(state) - (start + speed * 10)) < 1e-3);
    }
}

TEST_CASE("invariants")
{
    const PeriodicGrid grid = PeriodicGrid::make(64, 2048);
    SUBCASE("mass of the cubic ground state")
    {
        const FieldState q = soliton_state(3, grid, 1.0, 0.0, Frame::renormalized);
        CHECK(invariants(q, 3).mass == doctest::Approx(4).epsilon(1e-12));
    }
    SUBCASE("zero field")
    {
        FieldState zero;
        zero.grid = grid;
        zero.w = Eigen::VectorXd::Zero(grid.n);
        const Invariants inv = invariants(zero, 4);
        CHECK(inv.mass == 0);
        CHECK(inv.energy == 0);
    }
    SUBCASE("scaling of the soliton family")
    {
        for (int p : {3, 4}) {
            const Invariants base = invariants(soliton_state(p, grid, 1.0, 0.0, Frame::lab), p);
            const double m = 1.0 / (p - 1);
            for (double v : {0.5, 2.0}) {
                CAPTURE(p);
                CAPTURE(v);
                const Invariants scaled = invariants(soliton_state(p, grid, v, 0.0, Frame::lab), p);
                CHECK(scaled.mass == doctest::Approx(std::pow(v, 2 * m - 0.5) * base.mass).epsilon(1e-10));
                CHECK(scaled.energy == doctest::Approx(std::pow(v, 2 * m + 0.5) * base.energy).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("two-bubble run conserves mass and energy over t = 100")
{
    const PeriodicGrid grid = PeriodicGrid::make(512, 16384);
    SolverConfig config;
    config.p = 3;
    config.dt = 0.005;
    FieldState state = pair_state(3, grid);
    const Invariants before = invariants(state, 3);
    double worst_mass = 0, worst_energy = 0;
    const EvolveSummary summary = evolve(state, 120, config, [&](const FieldState& s) {
        const Invariants now = invariants(s, 3);
        worst_mass = std::max(worst_mass, relative_change(before.mass, now.mass));
        worst_energy = std::max(worst_energy, relative_change(before.energy, now.energy));
    });
    CHECK(summary.callbacks == 101);
    CHECK(summary.max_wrap_ratio < config.wrap_limit);
    CHECK(worst_mass < 1e-9);
    CHECK(worst_energy < 1e-8);
}

TEST_CASE("fourth-order convergence in dt")
{
    // Against a run with dt / 8 of the finest step; the summary ratio is the geometric mean
    // over the two halvings.
    const PeriodicGrid grid = PeriodicGrid::make(128, 4096);
    const FieldState start = pair_state(3, grid);
    SolverConfig config;
    config.p = 3;
    config.wrap_monitor = false;
    auto run = [&](double dt) {
        config.dt = dt;
        FieldState state = start;
        evolve(state, 25, config);
        return state.w;
    };
    const Eigen::VectorXd reference = run(0.00015625);
    std::vector<double> errors;
    for (double dt : {0.005, 0.0025, 0.00125}) errors.push_back(l2_norm(grid, run(dt) - reference));
    const double ratio = std::sqrt(errors[0] / errors[2]);
    CAPTURE(errors[0]);
    CAPTURE(errors[1]);
    CAPTURE(errors[2]);
    CHECK(ratio > 12);
    CHECK(ratio < 20);
}

TEST_CASE("forward then backward returns to the data")
{
    const PeriodicGrid grid = PeriodicGrid::make(128, 4096);
    SolverConfig config;
    config.p = 3;
    config.dt = 0.0025;
    const FieldState start = pair_state(3, grid);
    FieldState state = start;
    evolve(state, 25, config);
    std::vector<double> times;
    evolve(state, 20, config, [&](const FieldState& s) { times.push_back(s.t); });
    CHECK(state.t == 20);
    CHECK(SpectralDifferentiator(grid).h1_norm(state.w - start.w) < 1e-7);
    REQUIRE(times.size() == 6);
    CHECK(times.front() == 25);
    CHECK(times.back() == 20);
    for (std::size_t k = 1; k < times.size(); ++k) CHECK(times[k] < times[k - 1]);
}

TEST_CASE("callbacks")
{
    const PeriodicGrid grid = PeriodicGrid::make(32, 1024);
    SolverConfig config;
    config.p = 3;
    config.callback_every = 0.3;
    config.wrap_monitor = false;
    FieldState state = soliton_state(3, grid, 1.0, 0.0, Frame::renormalized);
    std::vector<double> times;
    const EvolveSummary summary = evolve(state, 1.0, config, [&](const FieldState& s) { times.push_back(s.t); });
    CHECK(summary.callbacks == int(times.size()));
    REQUIRE(times.size() >= 4);
    CHECK(times.front() == 0);
    CHECK(times.back() == 1.0);
    for (std::size_t k = 1; k < times.size(); ++k) {
        CHECK(times[k] > times[k - 1]);
        CHECK(times[k] - times[k - 1] <= 0.3 + 1e-12);
    }
}

TEST_CASE("frames agree through the shift y = x - t")
{
    const PeriodicGrid grid = PeriodicGrid::make(128, 4096);
    SolverConfig config;
    config.p = 3;
    config.dt = 0.0025;
    FieldState lab = soliton_state(3, grid, 1.2, -4.0, Frame::lab);
    FieldState moving = to_frame(lab, Frame::renormalized);
    CHECK(moving.frame == Frame::renormalized);
    evolve(lab, 6, config);
    evolve(moving, 6, config);
    const FieldState mapped = to_frame(moving, Frame::lab);
    CHECK(SpectralDifferentiator(grid).h1_norm(mapped.w - lab.w) < 1e-6);
    CHECK(l2_norm(grid, spectral_shift(grid, moving.w, 6.0) - lab.w) < 1e-6);
}

TEST_CASE("resolution doubling")
{
    SolverConfig config;
    config.p = 3;
    config.dt = 0.0025;
    const PeriodicGrid coarse = PeriodicGrid::make(128, 4096);
    const PeriodicGrid fine = PeriodicGrid::make(128, 8192);
    FieldState a = pair_state(3, coarse);
    FieldState b = pair_state(3, fine);
    evolve(a, 25, config);
    evolve(b, 25, config);
    Eigen::VectorXd restricted(coarse.n);
    for (int j = 0; j < coarse.n; ++j) restricted[j] = b.w[2 * j];
    CHECK(l2_norm(coarse, restricted - a.w) < 1e-7);
}

TEST_CASE("dealiasing")
{
    const PeriodicGrid grid = PeriodicGrid::make(32, 1024);
    SolverConfig config;
    config.p = 4;
    config.dt = 0.002;
    config.wrap_monitor = false;
    const PdeSolver solver(grid, Frame::renormalized, config);
    CHECK(solver.retained_modes() == grid.n / 3);
    // Rough data with energy in every mode.
    Eigen::VectorXd rough = grid.sample([](double y) { return std::exp(-y * y) * (1 + 0.1 * std::cos(40 * y)); });
    Eigen::VectorXcd spectrum = solver.to_spectrum(rough);
    CHECK(solver.dealias_band_norm(spectrum) == 0);
    for (int k = 0; k < 20; ++k) solver.advance(spectrum);
    CHECK(solver.dealias_band_norm(spectrum) == 0);
    FieldState state;
    state.grid = grid;
    state.w = rough;
    const FieldState next = step(state, config);
    CHECK(next.t == doctest::Approx(0.002));
    CHECK(solver.dealias_band_norm(solver.to_spectrum(next.w)) == 0);
}

TEST_CASE("reflection and shifts")
{
    const PeriodicGrid grid = PeriodicGrid::make(16, 256);
    const Eigen::VectorXd f = grid.sample([](double y) { return std::exp(-(y - 1) * (y - 1)); });
    const Eigen::VectorXd mirrored = reflect(f);
    for (int j = 1; j < grid.n; ++j) CHECK(mirrored[j] == f[grid.n - j]);
    CHECK(reflect(mirrored) == f);
    const Eigen::VectorXd exact = grid.sample([](double y) { return std::exp(-(y - 3.5) * (y - 3.5)); });
    CHECK((spectral_shift(grid, f, 2.5) - exact).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("configuration checks")
{
    SolverConfig config;
    CHECK_NOTHROW(config.validate(PeriodicGrid::make(128, 4096)));
    CHECK_THROWS_AS(config.validate(PeriodicGrid::make(128, 3000)), std::invalid_argument);
    CHECK_THROWS_AS(config.validate(PeriodicGrid::make(128, 2048)), std::invalid_argument);
    config.dt = 2 * max_stable_dt(PeriodicGrid::make(128, 4096), config);
    CHECK_THROWS_AS(config.validate(PeriodicGrid::make(128, 4096)), std::invalid_argument);
    config.p = 4;
    config.dt = 0.005;
    CHECK_THROWS_AS(config.validate(PeriodicGrid::make(128, 4096)), std::invalid_argument);
    config.dt = 0.002;
    CHECK_THROWS_AS(config.validate(PeriodicGrid::make(32, 1024)), std::invalid_argument);  // strip too wide
    config.wrap_monitor = false;
    CHECK_NOTHROW(config.validate(PeriodicGrid::make(32, 1024)));
    CHECK(to_string(Frame::lab) == "lab");
    CHECK(frame_from_string("renormalized") == Frame::renormalized);
    CHECK_THROWS(frame_from_string("sideways"));
}

TEST_CASE("amplitude monitor")
{
    const PeriodicGrid grid = PeriodicGrid::make(32, 1024);
    SolverConfig config;
    config.p = 3;
    config.amplitude_limit = 1.6;
    config.dt = 0.002;
    config.wrap_monitor = false;
    FieldState state = soliton_state(3, grid, 1.5, 0.0, Frame::renormalized);  // peak sqrt(3) > 1.6
    try {
        evolve(state, 1.0, config);
        FAIL("expected an instability report");
    } catch (const InstabilityError& error) {
        CHECK(error.time == 0);
    }
}

TEST_CASE("snapshot files")
{
    const auto dir = std::filesystem::temp_directory_path() / "gkdv_test_pde";
    std::filesystem::create_directories(dir);
    const PeriodicGrid grid = PeriodicGrid::make(32, 512);
    FieldState state = soliton_state(4, grid, 0.7, 1.0 / 3.0, Frame::lab);
    state.t = 17.125;
    const auto path = dir / "snap.bin";
    write_snapshot(state, 4, path);
    const Snapshot back = read_snapshot(path);
    CHECK(back.p == 4);
    CHECK(back.state.frame == Frame::lab);
    CHECK(back.state.t == state.t);
    CHECK(back.state.grid.half_length == grid.half_length);
    CHECK(back.state.grid.n == grid.n);
    CHECK(back.state.w == state.w);

    SUBCASE("bad magic")
    {
        std::fstream file(path, std::ios::in | std::ios::out | std::ios::binary);
        file.write("XKDV", 4);
        file.close();
        CHECK_THROWS(read_snapshot(path));
    }
    SUBCASE("truncated")
    {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
        CHECK_THROWS(read_snapshot(path));
    }
    SUBCASE("off-centre grid is refused")
    {
        state.grid = PeriodicGrid::make(32, 512, 4.0);
        CHECK_THROWS(write_snapshot(state, 4, dir / "shifted.bin"));
    }
    std::filesystem::remove_all(dir);
}

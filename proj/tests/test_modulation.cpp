#include <doctest.h>

#include "gkdv/modulation.hpp"
#include "gkdv/soliton.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

using namespace gkdv;
using Eigen::VectorXd;

namespace {

const ProfileSet& profiles_for(int p)
{
    static std::map<int, ProfileSet> cache;
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, build_profiles(p, LineGrid::make(), p > 5)).first;
    return it->second;
}

const PeriodicGrid kGrid = PeriodicGrid::make(64, 2048);

AnsatzOptions clamped()
{
    AnsatzOptions options;
    options.cutoff_scale_limit = 0.6 * kGrid.half_length;
    return options;
}

DecomposeOptions options_for_grid()
{
    DecomposeOptions options;
    options.ansatz = clamped();
    return options;
}

double max_difference(const ModParams& a, const ModParams& b)
{
    return std::max({std::abs(a.mu1 - b.mu1), std::abs(a.mu2 - b.mu2), std::abs(a.z1 - b.z1), std::abs(a.z2 - b.z2)});
}

// R~_1, R~_1', R~_2, R~_2' at gamma, sampled independently of the Newton code.
std::vector<VectorXd> directions(const ModParams& g, int p, const PeriodicGrid& grid)
{
    const GroundState<double> Q{Power(p)};
    return {grid.sample([&](double y) { return Q.value(y - g.z1, 1 + g.mu1); }),
            grid.sample([&](double y) { return Q.d1(y - g.z1, 1 + g.mu1); }),
            grid.sample([&](double y) { return Q.value(y - g.z2, 1 + g.mu2); }),
            grid.sample([&](double y) { return Q.d1(y - g.z2, 1 + g.mu2); })};
}

// Removes the span of `basis` from f (Gram-Schmidt in the grid inner product).
VectorXd orthogonalize(VectorXd f, const std::vector<VectorXd>& basis, const PeriodicGrid& grid)
{
    std::vector<VectorXd> done;
    for (VectorXd b : basis) {
        for (const VectorXd& e : done) b -= grid.dot(b, e) * e;
        b /= grid.norm(b);
        done.push_back(b);
    }
    for (int pass = 0; pass < 2; ++pass)
        for (const VectorXd& e : done) f -= grid.dot(f, e) * e;
    return f;
}

// Sum of squared normalized orthogonality residuals of w at gamma.
double orthogonality_cost(const VectorXd& w, const ModParams& g, const ProfileSet& P, const PeriodicGrid& grid)
{
    const VectorXd eps = w - build_V(g, P, grid, clamped()).V;
    double cost = 0;
    for (const VectorXd& b : directions(g, P.p, grid)) {
        const double r = grid.dot(eps, b) / grid.norm(b);
        cost += r * r;
    }
    return cost;
}

// Zooming 5^4 lattice search for the minimum of orthogonality_cost.
ModParams lattice_minimum(const VectorXd& w, ModParams center, const ProfileSet& P, const PeriodicGrid& grid,
                          double mu_width, double z_width, int levels)
{
    for (int level = 0; level < levels; ++level) {
        ModParams best = center;
        double best_cost = orthogonality_cost(w, center, P, grid);
        for (int a = -2; a <= 2; ++a)
            for (int b = -2; b <= 2; ++b)
                for (int c = -2; c <= 2; ++c)
                    for (int d = -2; d <= 2; ++d) {
                        const ModParams g{center.mu1 + a * mu_width / 2, center.mu2 + b * mu_width / 2,
                                          center.z1 + c * z_width / 2, center.z2 + d * z_width / 2};
                        const double cost = orthogonality_cost(w, g, P, grid);
                        if (cost < best_cost) {
                            best_cost = cost;
                            best = g;
                        }
                    }
        center = best;
        mu_width /= 3;
        z_width /= 3;
    }
    return center;
}

}  // namespace

TEST_CASE("energy weights")
{
    const EnergyWeights weights;
    CHECK(weights.rho == 1.0 / 32);
    for (double y = -200; y <= 200; y += 0.173) {
        CAPTURE(y);
        CHECK(std::abs(weights.phi(-y) - (1 - weights.phi(y))) <= 0x1p-53);
        CHECK(weights.phi(y) == doctest::Approx(2 / M_PI * std::atan(std::exp(8 * weights.rho * y))).epsilon(1e-14));
        const double d1 = std::abs(weights.phi_d1(y));
        CHECK(std::abs(weights.phi_d2(y)) <= 8 * weights.rho * d1 * (1 + 1e-14));
        CHECK(std::abs(weights.phi_d3(y)) <= 64 * weights.rho * weights.rho * d1 * (1 + 1e-14));
        const double step = 1e-3;
        CHECK(weights.phi_d1(y) ==
              doctest::Approx((weights.phi(y + step) - weights.phi(y - step)) / (2 * step)).epsilon(1e-6));
        CHECK(weights.Phi1(y, 0, 0) == 1);
        CHECK(weights.Phi2(y, 0, 0) == 0);
    }
    CHECK(weights.Phi1(1e3, 0.1, -0.1) == doctest::Approx(1 / 1.21));
    CHECK(weights.Phi2(-1e3, 0.1, -0.1) == doctest::Approx(-0.1 / 0.81));
}

TEST_CASE("energy functional")
{
    const ProfileSet& P = profiles_for(3);
    const ModParams g = symmetric_params(10, P.alpha);
    const VectorXd V = build_V(g, P, kGrid, clamped()).V;
    const SpectralDifferentiator differ(kGrid);
    SUBCASE("vanishes with eps")
    {
        const VectorXd zero = VectorXd::Zero(kGrid.n);
        CHECK(energy_functional(kGrid, zero, zero, V, g.mu1, g.mu2, 3) == 0);
    }
    SUBCASE("unweighted form when mu vanishes")
    {
        const VectorXd eps = kGrid.sample([](double y) { return 0.01 * std::exp(-0.1 * (y - 2) * (y - 2)); });
        const VectorXd eps_y = differ.derivative(eps);
        const VectorXd total = V + eps;
        // |V+eps|^4 - |V|^4 - 4 V^3 eps for p = 3, written out
        const VectorXd potential = total.array().pow(4) - V.array().pow(4) - 4 * V.array().pow(3) * eps.array();
        const double expected = kGrid.dot(eps_y, eps_y) + kGrid.dot(eps, eps) - 0.5 * kGrid.spacing() * potential.sum();
        CHECK(energy_functional(kGrid, eps, eps_y, V, 0, 0, 3) == doctest::Approx(expected).epsilon(1e-13));
    }
    SUBCASE("coercive on directions orthogonal to the bubbles")
    {
        // Frozen single-bubble constant from the linearized-operator tests.
        const double coercivity = 0.324911731;
        for (double width : {0.5, 1.0, 2.0, 4.0}) {
            for (double centre : {g.z1, g.z2, 0.0}) {
                CAPTURE(width);
                CAPTURE(centre);
                VectorXd shape = kGrid.sample([&](double y) {
                    const double x = (y - centre) / width;
                    return std::exp(-x * x) * (1 + 0.3 * x);
                });
                shape = orthogonalize(shape, directions(g, 3, kGrid), kGrid);
                const VectorXd eps = 1e-3 * shape / kGrid.norm(shape);
                const VectorXd eps_y = differ.derivative(eps);
                const double h1_squared = kGrid.dot(eps, eps) + kGrid.dot(eps_y, eps_y);
                CHECK(energy_functional(kGrid, eps, eps_y, V, g.mu1, g.mu2, 3) >= coercivity * h1_squared);
            }
        }
    }
}

TEST_CASE("decomposition of V is the identity on the parameter box")
{
    for (int p : {3, 4}) {
        const ProfileSet& P = profiles_for(p);
        const Modulator modulator(kGrid, P, options_for_grid());
        double worst = 0;
        for (double z : {6.0, 10.0, 14.0, 22.0, 30.0})
            for (double mu1 : {-0.05, 0.0, 0.05})
                for (double mu2 : {-0.05, 0.02, 0.05}) {
                    const ModParams g{mu1, mu2, z / 2 + 0.3, -z / 2 + 0.3};
                    const VectorXd V = build_V(g, P, kGrid, clamped()).V;
                    const ModParams guess{mu1 + 0.004, mu2 - 0.003, g.z1 + 0.04, g.z2 - 0.05};
                    worst = std::max(worst, max_difference(modulator.decompose(V, guess).gamma, g));
                    worst = std::max(worst, max_difference(modulator.decompose_cold(V).gamma, g));
                }
        CAPTURE(p);
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("fixed point and orthogonal perturbation")
{
    const ProfileSet& P = profiles_for(3);
    const Modulator modulator(kGrid, P, options_for_grid());
    const ModParams g{0.03, -0.02, 5.2, -4.9};
    const VectorXd V = build_V(g, P, kGrid, clamped()).V;

    const Decomposition exact = modulator.decompose(V, g);
    CHECK(exact.iterations <= 2);
    CHECK(max_difference(exact.gamma, g) < 1e-13);
    CHECK(exact.eps.cwiseAbs().maxCoeff() < 1e-13);

    VectorXd n = kGrid.sample([](double y) { return std::exp(-0.2 * y * y) * std::cos(y); });
    n = orthogonalize(n, directions(g, 3, kGrid), kGrid);
    n /= kGrid.norm(n);
    const double delta = 1e-3;
    const ModParams guess{0.032, -0.018, 5.23, -4.92};
    const Decomposition d = modulator.decompose(V + delta * n, guess);
    CHECK(max_difference(d.gamma, g) < 1e-10);
    CHECK((d.eps - delta * n).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(d.eps_l2 == doctest::Approx(delta).epsilon(1e-6));
    for (int i = 0; i < 4; ++i) CHECK(std::abs(d.orthogonality[i]) < 1e-9);
}

TEST_CASE("perturbation along a translation direction against a lattice search")
{
    const ProfileSet& P = profiles_for(3);
    const Modulator modulator(kGrid, P, options_for_grid());
    const ModParams g{0.01, -0.01, 5.0, -5.0};
    const VectorXd V = build_V(g, P, kGrid, clamped()).V;
    const VectorXd dR1 = directions(g, 3, kGrid)[1];
    const double delta = 1e-4;
    const VectorXd w = V + delta * dR1;

    const Decomposition d = modulator.decompose(w, g);
    // To first order, adding delta R1' moves the first bubble by -delta.
    CHECK(d.gamma.z1 - g.z1 == doctest::Approx(-delta).epsilon(0.05));
    CHECK(std::abs(d.gamma.z2 - g.z2) < 1e-2 * delta);

    const ModParams oracle = lattice_minimum(w, g, P, kGrid, 4 * delta, 4 * delta, 13);
    CAPTURE(oracle.mu1);
    CAPTURE(oracle.z1);
    CHECK(max_difference(oracle, d.gamma) < 1e-8);
    CHECK(orthogonality_cost(w, d.gamma, P, kGrid) <= orthogonality_cost(w, oracle, P, kGrid));
}

TEST_CASE("Newton convergence is quadratic")
{
    for (int p : {3, 4}) {
        const ProfileSet& P = profiles_for(p);
        const Modulator modulator(kGrid, P, options_for_grid());
        const ModParams g{0.02, -0.03, 6.0, -6.5};
        VectorXd n = kGrid.sample([](double y) { return std::sin(0.7 * y) * std::exp(-0.05 * y * y); });
        const VectorXd w = build_V(g, P, kGrid, clamped()).V + 1e-3 * n;
        const Decomposition d = modulator.decompose(w, {0.03, -0.02, 6.05, -6.45});
        const auto& r = d.residual_history;
        CAPTURE(p);
        REQUIRE(r.size() >= 3);
        for (std::size_t k = 1; k + 1 < r.size(); ++k)
            if (r[k] > 1e-11) CHECK(r[k + 1] <= 10 * r[k] * r[k]);
        CHECK(d.iterations <= 6);
    }
}

TEST_CASE("decomposition errors")
{
    const ProfileSet& P = profiles_for(3);
    const ModParams g = symmetric_params(10, P.alpha);
    const VectorXd V = build_V(g, P, kGrid, clamped()).V;
    const ModParams guess{g.mu1 + 0.01, g.mu2, g.z1 + 0.05, g.z2};
    SUBCASE("iteration budget")
    {
        DecomposeOptions options = options_for_grid();
        options.max_iterations = 1;
        try {
            decompose(kGrid, V, guess, P, options);
            FAIL("expected no convergence");
        } catch (const DecompositionError& error) {
            CHECK(error.iterations == 1);
            CHECK(error.last_residual > 0);
        }
    }
    SUBCASE("outside the trust radius")
    {
        CHECK_THROWS_AS(decompose(kGrid, V, {0, 0, g.z1 + 1, g.z2}, P, options_for_grid()), std::invalid_argument);
    }
    SUBCASE("separation below the floor")
    {
        const ModParams close{0, 0, 2.5, -2.5};
        const VectorXd W = build_V(close, P, kGrid, clamped()).V;
        CHECK_THROWS_AS(decompose(kGrid, W, close, P, options_for_grid()), DecompositionError);
    }
    SUBCASE("uniqueness probes pass on a regular decomposition")
    {
        DecomposeOptions options = options_for_grid();
        options.uniqueness_probes = 4;
        CHECK(max_difference(decompose(kGrid, V, guess, P, options).gamma, g) < 1e-10);
    }
}

TEST_CASE("cold start signs")
{
    const ProfileSet& P = profiles_for(3);
    const Modulator modulator(kGrid, P, options_for_grid());
    const ModParams g{0.02, -0.02, 4.0, -5.0};
    const VectorXd V = build_V(g, P, kGrid, clamped()).V;
    const Decomposition flipped = modulator.decompose_cold(-V);
    CHECK(flipped.field_sign == -1);
    CHECK(max_difference(flipped.gamma, g) < 1e-10);
    const auto R = directions(g, 3, kGrid);
    CHECK_THROWS_AS(cold_start_guess(kGrid, R[0] + R[2], P), std::invalid_argument);
    CHECK_THROWS_AS(cold_start_guess(kGrid, R[0], P), std::invalid_argument);
}

TEST_CASE("supercritical projections")
{
    const ProfileSet& P = profiles_for(6);
    REQUIRE(P.edge);
    const PeriodicGrid grid = PeriodicGrid::make(64, 4096);
    DecomposeOptions options;
    options.ansatz.cutoff_scale_limit = 0.6 * grid.half_length;
    const Modulator modulator(grid, P, options);
    const ModParams g{0.01, -0.01, 6.0, -6.0};
    const VectorXd V = build_V(g, P, grid, options.ansatz).V;

    // Z~^{+-}_k = Z_{1+mu_k}(y - z_k), Z_v(x) = v^{1/4} Z(sqrt(v) x).
    std::vector<VectorXd> z_modes;
    for (const auto* mode : {&P.edge->plus, &P.edge->minus})
        for (const auto& [mu, centre] : {std::pair{g.mu1, g.z1}, std::pair{g.mu2, g.z2}})
            z_modes.push_back(grid.sample([&](double y) {
                return std::pow(1 + mu, 0.25) * interpolate(P.edge->grid, *mode, std::sqrt(1 + mu) * (y - centre));
            }));
    std::vector<VectorXd> all = directions(g, 6, grid);
    all.insert(all.end(), z_modes.begin(), z_modes.end());

    VectorXd n = grid.sample([](double y) { return std::exp(-0.1 * y * y) * (1 + std::sin(y)); });
    n = orthogonalize(n, all, grid);
    n *= 1e-4 / grid.norm(n);
    const Decomposition quiet = modulator.decompose(V + n, g);
    REQUIRE(quiet.a_plus);
    REQUIRE(quiet.a_minus);
    CHECK(quiet.a_plus->cwiseAbs().maxCoeff() < 1e-12);
    CHECK(quiet.a_minus->cwiseAbs().maxCoeff() < 1e-12);
    CHECK(max_difference(quiet.gamma, g) < 1e-10);

    // A component along Z directions that keeps the four orthogonality conditions.
    const VectorXd loud = 1e-4 * orthogonalize(z_modes[0] - z_modes[3], directions(g, 6, grid), grid);
    const Decomposition d = modulator.decompose(V + loud, g);
    CHECK(max_difference(d.gamma, g) < 1e-10);
    CHECK((*d.a_plus)[0] == doctest::Approx(grid.dot(loud, z_modes[0])).epsilon(1e-8));
    CHECK((*d.a_plus)[1] == doctest::Approx(grid.dot(loud, z_modes[1])).epsilon(1e-8));
    CHECK((*d.a_minus)[0] == doctest::Approx(grid.dot(loud, z_modes[2])).epsilon(1e-8));
    CHECK((*d.a_minus)[1] == doctest::Approx(grid.dot(loud, z_modes[3])).epsilon(1e-8));

    const Decomposition subcritical = Modulator(kGrid, profiles_for(3), options_for_grid())
                                          .decompose(build_V(g, profiles_for(3), kGrid, clamped()).V, g);
    CHECK(!subcritical.a_plus);
}

TEST_CASE("log-law fit")
{
    std::vector<double> t, z;
    for (int k = 0; k <= 180; ++k) {
        t.push_back(20 + k);
        z.push_back(2 * std::log(4 * t.back()));
    }
    SUBCASE("exact input")
    {
        const LogLawFit fit = fit_log_law(t, z, 20, 200, 16);
        CHECK(fit.samples == 181);
        CHECK(std::abs(fit.c_fit - 4) < 1e-12);
        CHECK(std::abs(fit.c_through_origin - 4) < 1e-12);
        CHECK(std::abs(fit.intercept) < 1e-9);
        CHECK(fit.relative_error < 1e-12);
        CHECK(fit.alpha_fit == doctest::Approx(16).epsilon(1e-12));
        CHECK(fit.residuals.size() == 181);
    }
    SUBCASE("a shifted time origin moves only the intercept")
    {
        std::vector<double> shifted;
        for (double s : t) shifted.push_back(2 * std::log(4 * (s + 17)));
        const LogLawFit fit = fit_log_law(t, shifted, 20, 200, 16);
        CHECK(std::abs(fit.c_fit - 4) < 1e-12);
        CHECK(fit.intercept == doctest::Approx(68).epsilon(1e-10));
        CHECK(fit.relative_error_through_origin > 0.1);
    }
    SUBCASE("reduced flow with a1 = a2 = 0")
    {
        const ReducedConstants constants{16, 0, 0};
        const ReducedState start{20, log_law_state(20, 16)};
        const std::vector<double> times = time_grid(20, 200, 0.5);
        const auto states = integrate_reduced(start, times, constants);
        std::vector<double> zs;
        for (const auto& s : states) zs.push_back(s.gamma.z());
        const LogLawFit fit = fit_log_law(times, zs, 20, 200, 16);
        CHECK(std::abs(fit.c_fit - 4) < 1e-9);
    }
    SUBCASE("window checks")
    {
        CHECK_THROWS_AS(fit_log_law(t, z, 20, 60, 16), std::invalid_argument);
        std::vector<double> flat = z;
        flat[90] = flat[89];
        CHECK_THROWS_AS(fit_log_law(t, flat, 20, 200, 16), std::invalid_argument);
    }
}

TEST_CASE("track CSV round trip")
{
    const auto dir = std::filesystem::temp_directory_path() / "gkdv_test_modulation";
    std::filesystem::create_directories(dir);
    std::vector<TrackRow> rows(3);
    for (int k = 0; k < 3; ++k) {
        rows[k].t = 20 + k / 3.0;
        rows[k].gamma = {0.05 + k * 1e-3, -0.05, 5 + k * 0.1, -5.0 - 1e-17 * k};
        rows[k].eps_l2 = 1.0 / 7;
        rows[k].eps_h1 = 2.0 / 7;
        rows[k].energy = 1e-300;
    }
    rows[1].a_plus = Eigen::Vector2d(1e-9, -2e-9);
    rows[1].a_minus = Eigen::Vector2d(3e-9, -4e-9);
    const auto path = dir / "track.csv";
    write_track_csv(rows, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == kTrackCsvHeader);
    const auto back = read_track_csv(path);
    REQUIRE(back.size() == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(back[k].t == rows[k].t);
        CHECK(back[k].gamma.z2 == rows[k].gamma.z2);
        CHECK(back[k].gamma.mu1 == rows[k].gamma.mu1);
        CHECK(back[k].energy == rows[k].energy);
        CHECK(back[k].a_plus.has_value() == (k == 1));
    }
    CHECK(*back[1].a_minus == *rows[1].a_minus);
    std::filesystem::remove_all(dir);
}

TEST_CASE("tracking PDE runs")
{
    const PeriodicGrid grid = PeriodicGrid::make(128, 4096);
    SolverConfig solver;
    solver.p = 3;
    solver.dt = 0.005;
    TrackerOptions options;
    options.decompose.ansatz.cutoff_scale_limit = 0.6 * grid.half_length;
    const ProfileSet& P = profiles_for(3);

    SUBCASE("far-apart bubbles stay put")
    {
        const ModParams g{0.0, 0.0, 20.0, -20.0};
        FieldState state;
        state.grid = grid;
        state.w = build_V(g, P, grid, options.decompose.ansatz).V;
        options.stop_on_tube_exit = false;
        Tracker tracker(P, options);
        evolve(state, 10, solver, [&](const FieldState& s) { tracker.observe(s); });
        REQUIRE(tracker.rows().size() == 11);
        for (const TrackRow& row : tracker.rows()) {
            CHECK(std::abs(row.gamma.mu1) < 1e-6);
            CHECK(std::abs(row.gamma.z1 - 20) < 1e-3);
            CHECK(std::abs(row.gamma.z2 + 20) < 1e-3);
            CHECK(row.eps_h1 < 1e-6);
        }
    }
    SUBCASE("interacting pair drifts apart")
    {
        FieldState state;
        state.grid = grid;
        state.t = 20;
        state.w = build_V(symmetric_params(10, P.alpha), P, grid, options.decompose.ansatz).V;
        Tracker tracker(P, options);
        solver.wrap_monitor = false;
        evolve(state, 30, solver, [&](const FieldState& s) { tracker.observe(s); });
        const auto& rows = tracker.rows();
        REQUIRE(rows.size() == 11);
        for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].gamma.z() > rows[k - 1].gamma.z());
        for (const TrackRow& row : rows) {
            const double zeta = zeta_of(row.gamma.z(), P.alpha);
            CHECK(row.gamma.mu() == doctest::Approx(2 / zeta).epsilon(0.05));
            CHECK(row.inside_tube);
            CHECK(row.eps_h1 < 1e-2);
        }
    }
    SUBCASE("tube exit stops the tracker")
    {
        FieldState state;
        state.grid = grid;
        state.t = 20;
        ModParams g = symmetric_params(10, P.alpha);
        g.mu1 += 0.1;  // far above 2/t
        state.w = build_V(g, P, grid, options.decompose.ansatz).V;
        Tracker tracker(P, options);
        CHECK_THROWS_AS(tracker.observe(state), TubeExit);
        REQUIRE(tracker.rows().size() == 1);
        CHECK(!tracker.rows()[0].inside_tube);
        CHECK(tracker.rows()[0].tube_flags == "01111");  // only the mubar bound
    }
}

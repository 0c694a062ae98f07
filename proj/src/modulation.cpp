#include "gkdv/modulation.hpp"

#include "gkdv/fitting.hpp"
#include "gkdv/soliton.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace gkdv {

using Eigen::Matrix4d;
using Eigen::Vector4d;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------------------
// energy weights

double EnergyWeights::phi(double y) const { return 0.5 + std::atan(std::sinh(8 * rho * y)) / std::numbers::pi; }

double EnergyWeights::phi_d1(double y) const { return 8 * rho / (std::numbers::pi * std::cosh(8 * rho * y)); }

double EnergyWeights::phi_d2(double y) const { return -8 * rho * std::tanh(8 * rho * y) * phi_d1(y); }

double EnergyWeights::phi_d3(double y) const
{
    const double th = std::tanh(8 * rho * y);
    return 64 * rho * rho * (2 * th * th - 1) * phi_d1(y);
}

double EnergyWeights::Phi1(double y, double mu1, double mu2) const
{
    const double f = phi(y);
    return f / ((1 + mu1) * (1 + mu1)) + (1 - f) / ((1 + mu2) * (1 + mu2));
}

double EnergyWeights::Phi2(double y, double mu1, double mu2) const
{
    const double f = phi(y);
    return mu1 * f / ((1 + mu1) * (1 + mu1)) + mu2 * (1 - f) / ((1 + mu2) * (1 + mu2));
}

double energy_functional(const PeriodicGrid& grid, const VectorXd& eps, const VectorXd& eps_y, const VectorXd& V,
                         double mu1, double mu2, int p, const EnergyWeights& weights)
{
    double sum = 0;
    for (int j = 0; j < grid.n; ++j) {
        const double y = grid.node(j), e = eps[j], v = V[j];
        const double av = std::abs(v);
        const double potential = std::pow(std::abs(e + v), p + 1) - std::pow(av, p + 1) -
                                 (p + 1) * std::pow(av, p - 1) * v * e;
        const double quadratic = eps_y[j] * eps_y[j] + e * e - 2.0 / (p + 1) * potential;
        sum += quadratic * weights.Phi1(y, mu1, mu2) + e * e * weights.Phi2(y, mu1, mu2);
    }
    return grid.spacing() * sum;
}

// ---------------------------------------------------------------------------------------
// errors

DecompositionError::DecompositionError(const std::string& what, double residual, int iters)
    : std::runtime_error(what), last_residual(residual), iterations(iters)
{
}

namespace {

std::string describe(const ModParams& g)
{
    std::ostringstream s;
    s.precision(10);
    s << "(" << g.mu1 << ", " << g.mu2 << ", " << g.z1 << ", " << g.z2 << ")";
    return s.str();
}

}  // namespace

AmbiguousDecomposition::AmbiguousDecomposition(const ModParams& a, const ModParams& b)
    : std::runtime_error("decompose: two solutions inside the trust region " + describe(a) + " and " + describe(b)),
      first(a),
      second(b)
{
}

TubeExit::TubeExit(double t, const std::string& f)
    : std::runtime_error("tracker: tube exit at t = " + std::to_string(t) + " (flags " + f + ")"), time(t), flags(f)
{
}

// ---------------------------------------------------------------------------------------
// cold start

ColdStart cold_start_guess(const PeriodicGrid& grid, const VectorXd& w, const ProfileSet& profiles)
{
    const int n = grid.n;
    const double h = grid.spacing();
    struct Peak {
        double location, height;
    };
    std::vector<Peak> peaks;
    for (int j = 0; j < n; ++j) {
        const double left = std::abs(w[(j + n - 1) % n]), mid = std::abs(w[j]), right = std::abs(w[(j + 1) % n]);
        if (mid > left && mid >= right) {
            const double curvature = left - 2 * mid + right;
            const double offset = curvature < 0 ? 0.5 * (left - right) / curvature : 0.0;
            const double height = mid - 0.25 * (left - right) * offset;
            peaks.push_back({grid.node(j) + offset * h, height});
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    // The second bubble is the highest maximum at least two units away from the first.
    const auto second = std::find_if(peaks.begin() + std::min<std::size_t>(1, peaks.size()), peaks.end(),
                                     [&](const Peak& q) { return std::abs(q.location - peaks.front().location) > 2; });
    if (peaks.empty() || second == peaks.end()) throw std::invalid_argument("cold start: fewer than two bubbles found");
    Peak right = peaks.front(), left = *second;
    if (right.location < left.location) std::swap(right, left);

    auto sample_at = [&](double y) {
        const int j = static_cast<int>(std::lround((y - grid.left()) / h)) % n;
        return w[(j + n) % n];
    };
    const int sign_right = sample_at(right.location) > 0 ? 1 : -1;
    const int sign_left = sample_at(left.location) > 0 ? 1 : -1;
    if (sign_left != profiles.sigma * sign_right)
        throw std::invalid_argument("cold start: sign pattern of the bubbles does not match sigma");

    const GroundState<double> Q{Power(profiles.p)};
    const double peak = Q.value(0.0);
    auto speed = [&](double height) { return std::pow(height / peak, profiles.p - 1) - 1; };
    ColdStart out;
    out.field_sign = sign_right;
    out.gamma = {speed(right.height), speed(left.height), right.location, left.location};
    return out;
}

// ---------------------------------------------------------------------------------------
// Newton

namespace {

// V, its Gamma derivatives and the orthogonality directions with their Gamma derivatives.
struct Linearization {
    VectorXd V;
    std::array<VectorXd, 4> dV;      // d/d(mu1, mu2, z1, z2)
    std::array<VectorXd, 4> basis;   // R1, R1', R2, R2'
    std::array<VectorXd, 4> dbasis;  // d/dmu_k and d/dz_k of each basis function (own bubble only)
    std::array<VectorXd, 4> dbasis_z;
};

void require_inside(const ModParams& g, const PeriodicGrid& grid)
{
    for (double c : {g.z1, g.z2})
        if (!(c > grid.left() + 10 && c < grid.right() - 10))
            throw DecompositionError("decompose: a bubble centre left the grid", NAN, 0);
    if (!(g.z() > 0)) throw DecompositionError("decompose: bubbles crossed (z <= 0)", NAN, 0);
}

Linearization linearize(const ModParams& g, const ProfileSet& P, const PeriodicGrid& grid, const AnsatzOptions& options)
{
    require_inside(g, grid);
    const int n = grid.n, p = P.p;
    const double sigma = P.sigma;
    const GroundState<double> Q{Power(p)};
    const CutoffField c = build_cutoff(g.z(), grid, options.cutoff_scale_limit);
    const double ez = std::exp(-g.z());
    const double v1 = 1 + g.mu1, v2 = 1 + g.mu2;
    if (!(v1 > 0 && v2 > 0)) throw DecompositionError("decompose: bubble speed 1 + mu not positive", NAN, 0);

    Linearization out;
    out.V.resize(n);
    for (auto* set : {&out.dV, &out.basis, &out.dbasis, &out.dbasis_z})
        for (auto& v : *set) v.resize(n);

    for (int j = 0; j < n; ++j) {
        const double y = grid.node(j);
        const double x1 = y - g.z1, x2 = y - g.z2;
        const double R1 = Q.value(x1, v1), R1d = Q.d1(x1, v1), R1dd = Q.d2(x1, v1);
        const double R2 = Q.value(x2, v2), R2d = Q.d1(x2, v2), R2dd = Q.d2(x2, v2);
        const double L1 = Q.lambda(x1, v1), L1d = Q.lambda_d1(x1, v1);
        const double L2 = Q.lambda(x2, v2), L2d = Q.lambda_d1(x2, v2);

        double r = 0, dr_z1 = 0, dr_z2 = 0;
        if (options.with_correction) {
            const auto A1 = P.evaluate(1, x1), A2 = P.evaluate(2, x2);
            r = ez * (A1.f + A2.f);
            dr_z1 = -r - ez * A1.d1;
            dr_z2 = r - ez * A2.d1;
        }
        const double ph = c.phi[j], phz = c.dz[j];

        out.V[j] = R1 + sigma * R2 + r * ph;
        out.dV[0][j] = L1;
        out.dV[1][j] = sigma * L2;
        out.dV[2][j] = -R1d + dr_z1 * ph + r * phz;
        out.dV[3][j] = -sigma * R2d + dr_z2 * ph - r * phz;

        out.basis[0][j] = R1;
        out.basis[1][j] = R1d;
        out.basis[2][j] = R2;
        out.basis[3][j] = R2d;
        out.dbasis[0][j] = L1;
        out.dbasis[1][j] = L1d;
        out.dbasis[2][j] = L2;
        out.dbasis[3][j] = L2d;
        out.dbasis_z[0][j] = -R1d;
        out.dbasis_z[1][j] = -R1dd;
        out.dbasis_z[2][j] = -R2d;
        out.dbasis_z[3][j] = -R2dd;
    }
    return out;
}

Vector4d to_vector(const ModParams& g) { return {g.mu1, g.mu2, g.z1, g.z2}; }
ModParams from_vector(const Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

struct NewtonOutcome {
    ModParams gamma;
    Linearization lin;
    VectorXd eps;
    std::vector<double> history;
    int iterations = 0;
};

}  // namespace

struct Modulator::Impl {
    PeriodicGrid grid;
    const ProfileSet* profiles;
    DecomposeOptions options;
    SpectralDifferentiator differ;

    Impl(const PeriodicGrid& g, const ProfileSet& P, const DecomposeOptions& o)
        : grid(g), profiles(&P), options(o), differ(g)
    {
    }

    NewtonOutcome newton(const VectorXd& w, const ModParams& guess) const
    {
        const double h = grid.spacing();
        const double w_norm = grid.norm(w);
        NewtonOutcome out;
        out.gamma = guess;
        for (int iteration = 0;; ++iteration) {
            out.lin = linearize(out.gamma, *profiles, grid, options.ansatz);
            out.eps = w - out.lin.V;
            const double eps_norm = grid.norm(out.eps);
            Vector4d F;
            double residual = 0;
            bool met = true;
            for (int i = 0; i < 4; ++i) {
                const double b_norm = grid.norm(out.lin.basis[i]);
                F[i] = h * out.eps.dot(out.lin.basis[i]);
                residual = std::max(residual, std::abs(F[i]) / b_norm);
                met = met && std::abs(F[i]) <= std::max(options.tolerance * eps_norm, 1e-13 * w_norm) * b_norm;
            }
            out.history.push_back(residual);
            out.iterations = iteration;
            if (met) return out;
            if (iteration == options.max_iterations)
                throw DecompositionError("decompose: no convergence after " + std::to_string(iteration) +
                                             " iterations (last residual " + std::to_string(residual) + ")",
                                         residual, iteration);

            // dF_i/dGamma_j = -<dV_j, B_i> + <eps, dB_i/dGamma_j>; B_i depends on (mu_k, z_k) of its own bubble.
            Matrix4d J;
            for (int i = 0; i < 4; ++i) {
                const int bubble = i / 2;
                for (int j = 0; j < 4; ++j) {
                    double entry = -h * out.lin.dV[j].dot(out.lin.basis[i]);
                    if (j == bubble) entry += h * out.eps.dot(out.lin.dbasis[i]);
                    if (j == 2 + bubble) entry += h * out.eps.dot(out.lin.dbasis_z[i]);
                    J(i, j) = entry;
                }
            }
            Vector4d step = J.fullPivLu().solve(-F);
            // Keep steps inside a unit box in z and below 0.1 in mu.
            const double scale = std::max({1.0, std::abs(step[0]) / 0.1, std::abs(step[1]) / 0.1,
                                           std::abs(step[2]), std::abs(step[3])});
            out.gamma = from_vector(to_vector(out.gamma) + step / scale);
        }
    }

    Decomposition finish(NewtonOutcome&& run, int field_sign) const
    {
        Decomposition d;
        d.gamma = run.gamma;
        d.field_sign = field_sign;
        d.iterations = run.iterations;
        d.residual_history = std::move(run.history);
        d.eps = std::move(run.eps);
        d.eps_l2 = grid.norm(d.eps);
        const VectorXd eps_y = differ.derivative(d.eps);
        d.eps_h1 = std::sqrt(d.eps_l2 * d.eps_l2 + grid.dot(eps_y, eps_y));
        for (int i = 0; i < 4; ++i) {
            const double denominator = d.eps_l2 * grid.norm(run.lin.basis[i]);
            d.orthogonality[i] = denominator > 0 ? grid.dot(d.eps, run.lin.basis[i]) / denominator : 0.0;
        }
        d.energy = energy_functional(grid, d.eps, eps_y, run.lin.V, d.gamma.mu1, d.gamma.mu2, profiles->p);
        if (profiles->edge) {
            const auto& edge = *profiles->edge;
            const double mus[2] = {d.gamma.mu1, d.gamma.mu2}, zs[2] = {d.gamma.z1, d.gamma.z2};
            Eigen::Vector2d plus, minus;
            for (int k = 0; k < 2; ++k) {
                const double v = 1 + mus[k], amplitude = std::pow(v, 0.25), stretch = std::sqrt(v);
                double sum_plus = 0, sum_minus = 0;
                for (int j = 0; j < grid.n; ++j) {
                    const double x = stretch * (grid.node(j) - zs[k]);
                    sum_plus += d.eps[j] * interpolate(edge.grid, edge.plus, x);
                    sum_minus += d.eps[j] * interpolate(edge.grid, edge.minus, x);
                }
                plus[k] = grid.spacing() * amplitude * sum_plus;
                minus[k] = grid.spacing() * amplitude * sum_minus;
            }
            d.a_plus = plus;
            d.a_minus = minus;
        }
        return d;
    }

    Decomposition decompose(const VectorXd& w_in, const ModParams& guess, int field_sign) const
    {
        if (w_in.size() != grid.n) throw std::invalid_argument("decompose: field size does not match the grid");
        if (field_sign != 1 && field_sign != -1) throw std::invalid_argument("decompose: field_sign must be +-1");
        const VectorXd w = field_sign * w_in;
        const double distance = differ.h1_norm(w - linearize(guess, *profiles, grid, options.ansatz).V);
        if (!(distance <= options.trust_radius))
            throw std::invalid_argument("decompose: field is " + std::to_string(distance) +
                                        " in H1 from V(guess), outside the trust radius");

        NewtonOutcome main = newton(w, guess);
        if (!(main.gamma.z() >= options.min_separation - 1e-6))
            throw DecompositionError("decompose: separation " + std::to_string(main.gamma.z()) + " below " +
                                         std::to_string(options.min_separation),
                                     main.history.back(), main.iterations);
        for (int probe = 0; probe < options.uniqueness_probes; ++probe) {
            const double direction = probe % 2 == 0 ? 1.0 : -1.0;
            const double amount = options.probe_shift * (1 + probe / 2);
            ModParams start = guess;
            start.z1 += direction * amount;
            start.z2 -= (probe / 2 % 2 == 0 ? direction : -direction) * amount;
            if (differ.h1_norm(w - linearize(start, *profiles, grid, options.ansatz).V) > options.trust_radius) continue;
            try {
                const NewtonOutcome other = newton(w, start);
                if ((to_vector(other.gamma) - to_vector(main.gamma)).cwiseAbs().maxCoeff() > 1e-6 &&
                    differ.h1_norm(w - other.lin.V) <= options.trust_radius)
                    throw AmbiguousDecomposition(main.gamma, other.gamma);
            } catch (const DecompositionError&) {
                // a probe that does not converge says nothing about uniqueness
            }
        }
        return finish(std::move(main), field_sign);
    }
};

Modulator::Modulator(const PeriodicGrid& grid, const ProfileSet& profiles, const DecomposeOptions& options)
    : impl_(std::make_unique<Impl>(grid, profiles, options))
{
    if (options.max_iterations < 1) throw std::invalid_argument("decompose: max_iterations must be positive");
}
Modulator::~Modulator() = default;
Modulator::Modulator(Modulator&&) noexcept = default;
Modulator& Modulator::operator=(Modulator&&) noexcept = default;

const PeriodicGrid& Modulator::grid() const { return impl_->grid; }
const DecomposeOptions& Modulator::options() const { return impl_->options; }

Decomposition Modulator::decompose(const VectorXd& w, const ModParams& guess, int field_sign) const
{
    return impl_->decompose(w, guess, field_sign);
}

Decomposition Modulator::decompose_cold(const VectorXd& w) const
{
    // The amplitude estimate of mu is spoiled when the interaction term is large (small z); the
    // positions alone are then the better start.
    const auto& s = *impl_;
    const ColdStart start = cold_start_guess(s.grid, w, *s.profiles);
    ModParams positions = start.gamma;
    positions.mu1 = positions.mu2 = 0;
    auto distance = [&](const ModParams& g) {
        return s.differ.h1_norm(start.field_sign * w - linearize(g, *s.profiles, s.grid, s.options.ansatz).V);
    };
    const ModParams& guess = distance(positions) < distance(start.gamma) ? positions : start.gamma;
    return s.decompose(w, guess, start.field_sign);
}

Decomposition decompose(const PeriodicGrid& grid, const VectorXd& w, const ModParams& guess, const ProfileSet& profiles,
                        const DecomposeOptions& options)
{
    return Modulator(grid, profiles, options).decompose(w, guess);
}

// ---------------------------------------------------------------------------------------
// tracking

struct Tracker::Impl {
    const ProfileSet* profiles;
    TrackerOptions options;
    std::optional<Modulator> modulator;
    std::optional<ModParams> seeded;
    int field_sign = 1;
    std::vector<TrackRow> rows;

    ModParams warm_guess(double t) const
    {
        const TrackRow& last = rows.back();
        if (rows.size() < 2) return last.gamma;
        const TrackRow& before = rows[rows.size() - 2];
        const double ratio = (t - last.t) / (last.t - before.t);
        return from_vector(to_vector(last.gamma) + ratio * (to_vector(last.gamma) - to_vector(before.gamma)));
    }
};

Tracker::Tracker(const ProfileSet& profiles, const TrackerOptions& options)
    : impl_(std::make_unique<Impl>())
{
    if (!(options.tube_scale >= 1)) throw std::invalid_argument("tracker: tube_scale must be at least 1");
    impl_->profiles = &profiles;
    impl_->options = options;
}
Tracker::~Tracker() = default;
Tracker::Tracker(Tracker&&) noexcept = default;
Tracker& Tracker::operator=(Tracker&&) noexcept = default;

void Tracker::seed(const ModParams& guess, int field_sign)
{
    impl_->seeded = guess;
    impl_->field_sign = field_sign;
}

const std::vector<TrackRow>& Tracker::rows() const { return impl_->rows; }

const TrackRow& Tracker::observe(const FieldState& state)
{
    auto& s = *impl_;
    const FieldState view = state.frame == Frame::renormalized ? state : to_frame(state, Frame::renormalized);
    if (!s.modulator || s.modulator->grid().n != view.grid.n || s.modulator->grid().half_length != view.grid.half_length ||
        s.modulator->grid().center != view.grid.center)
        s.modulator.emplace(view.grid, *s.profiles, s.options.decompose);

    Decomposition d;
    if (!s.rows.empty()) {
        d = s.modulator->decompose(view.w, s.warm_guess(view.t), s.field_sign);
    } else if (s.seeded) {
        d = s.modulator->decompose(view.w, *s.seeded, s.field_sign);
    } else {
        d = s.modulator->decompose_cold(view.w);
        s.field_sign = d.field_sign;
    }

    TrackRow row;
    row.t = view.t;
    row.gamma = d.gamma;
    row.eps_l2 = d.eps_l2;
    row.eps_h1 = d.eps_h1;
    row.energy = d.energy;
    row.a_plus = d.a_plus;
    row.a_minus = d.a_minus;
    row.iterations = d.iterations;
    const TubeCheck tube = check_tube(view.t, d.gamma, s.profiles->alpha,
                                      s.options.check_eps_bound ? std::optional<double>(d.eps_h1) : std::nullopt,
                                      s.options.tube_scale - 1);
    row.tube_flags = tube.flags();
    row.inside_tube = tube.inside();
    s.rows.push_back(row);
    if (!row.inside_tube && s.options.stop_on_tube_exit) throw TubeExit(row.t, row.tube_flags);
    return s.rows.back();
}

// ---------------------------------------------------------------------------------------
// CSV

namespace {

std::string format_number(double value)
{
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

double parse_number(const std::string& field, int line)
{
    double value = 0;
    const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
    if (result.ec != std::errc() || result.ptr != field.data() + field.size())
        throw std::runtime_error("track csv: line " + std::to_string(line) + ": bad number '" + field + "'");
    return value;
}

}  // namespace

void write_track_csv(std::span<const TrackRow> rows, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("track csv: cannot open " + path.string());
    out << kTrackCsvHeader << '\n';
    for (const TrackRow& r : rows) {
        const ModParams& g = r.gamma;
        const double values[] = {r.t, g.mu1, g.mu2, g.z1, g.z2, g.z(), g.zbar(), g.mu(), g.mubar(), r.eps_l2, r.eps_h1,
                                 r.energy};
        for (std::size_t i = 0; i < std::size(values); ++i) out << (i ? "," : "") << format_number(values[i]);
        for (const auto* a : {&r.a_plus, &r.a_minus})
            for (int k = 0; k < 2; ++k) out << ',' << (*a ? format_number((**a)[k]) : std::string());
        out << '\n';
    }
    if (!out) throw std::runtime_error("track csv: write failed for " + path.string());
}

std::vector<TrackRow> read_track_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("track csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kTrackCsvHeader)
        throw std::runtime_error("track csv: unexpected header in " + path.string());
    std::vector<TrackRow> rows;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream stream(line);
        std::string field;
        while (std::getline(stream, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        if (fields.size() != 16)
            throw std::runtime_error("track csv: line " + std::to_string(number) + ": expected 16 fields");
        TrackRow r;
        r.t = parse_number(fields[0], number);
        r.gamma = {parse_number(fields[1], number), parse_number(fields[2], number), parse_number(fields[3], number),
                   parse_number(fields[4], number)};
        r.eps_l2 = parse_number(fields[9], number);
        r.eps_h1 = parse_number(fields[10], number);
        r.energy = parse_number(fields[11], number);
        if (!fields[12].empty())
            r.a_plus = Eigen::Vector2d(parse_number(fields[12], number), parse_number(fields[13], number));
        if (!fields[14].empty())
            r.a_minus = Eigen::Vector2d(parse_number(fields[14], number), parse_number(fields[15], number));
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------------------
// log-law fit

LogLawFit fit_log_law(std::span<const double> t, std::span<const double> z, double t_from, double t_to, double alpha)
{
    if (t.size() != z.size()) throw std::invalid_argument("fit_log_law: t and z differ in length");
    if (!(alpha > 0)) throw std::invalid_argument("fit_log_law: alpha must be positive");
    std::vector<double> times, growth;
    double previous_z = -INFINITY;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_from || t[i] > t_to) continue;
        if (!(z[i] > previous_z)) throw std::invalid_argument("fit_log_law: z is not increasing in the window");
        previous_z = z[i];
        times.push_back(t[i]);
        growth.push_back(std::exp(z[i] / 2));
    }
    if (times.size() < 50)
        throw std::invalid_argument("fit_log_law: " + std::to_string(times.size()) +
                                    " samples in the window, need at least 50");

    LogLawFit fit;
    fit.t_from = t_from;
    fit.t_to = t_to;
    fit.samples = static_cast<int>(times.size());
    const LineFit line = fit_line(times, growth);
    fit.c_fit = line.slope;
    fit.intercept = line.intercept;
    fit.rms_residual = line.rms_residual;
    double ty = 0, tt = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        ty += times[i] * growth[i];
        tt += times[i] * times[i];
        fit.residuals.push_back(growth[i] - (line.slope * times[i] + line.intercept));
    }
    fit.c_through_origin = ty / tt;
    fit.alpha_fit = fit.c_fit * fit.c_fit;
    const double target = std::sqrt(alpha);
    fit.relative_error = std::abs(fit.c_fit - target) / target;
    fit.relative_error_through_origin = std::abs(fit.c_through_origin - target) / target;
    return fit;
}

}  // namespace gkdv

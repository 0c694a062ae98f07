#pragma once

#include "gkdv/modulation.hpp"

#include <functional>
#include <span>
#include <vector>

namespace gkdv {

// Pair data with z1 = -z2 = z/2, mu1 - mu2 = (1 + shot) 2 sqrt(alpha) e^{-z/2} and mu1 + mu2 chosen
// so that |V|_{L2}^2 = 2 |Q|_{L2}^2, the mass of two separated solitons at rest.
ModParams mass_balanced_pair(double z, double shot, const ProfileSet& profiles, const PeriodicGrid& grid,
                             const AnsatzOptions& options = {});

// Q(y - log(sqrt(alpha) t)) + sigma Q(y + log(sqrt(alpha) t)) on the renormalized grid.
Eigen::VectorXd target_shape(const PeriodicGrid& grid, double t, int p, double alpha);
// |w - target|_{H^1}, with lab states moved to the renormalized frame first.
double target_shape_deviation(const FieldState& state, int p, double alpha);

struct ShapeTrend {
    std::vector<double> t, deviation;
    double decay_exponent = 0;  // slope of log deviation against log t
    bool decreasing = false;    // every sample below its predecessor
    double proof_rate = 1.0 / 16;
};

ShapeTrend compare_to_target_shape(std::span<const double> t, std::span<const double> deviation);

struct InteractionConfig {
    int p = 3;
    double half_length = 512;
    int n = 16384;
    double dt = 0.005;
    double wrap_limit = 1e-6;
    double t0 = 20, t_end = 200;
    double z0 = 10;
    double track_every = 1;
    // Shooting on the speed offset: the final state should sit on mu = 2 sqrt(alpha) e^{-z/2}.
    bool shoot = true;
    double shot = 0;             // used as is when shoot is false
    double shot_bracket = 0.02;  // initial bracket [-b, b], doubled up to 0.32 until it changes sign
    double shot_tolerance = 0.02;
    int max_shots = 16;

    void validate() const;
};

struct ShotRecord {
    double shot = 0;
    double offset = 0;  // mu / (2 sqrt(alpha) e^{-z/2}) - 1 at t_end
};

struct InteractionResult {
    std::vector<ShotRecord> shots;
    double shot = 0;
    ModParams initial;
    std::vector<TrackRow> rows;
    std::vector<double> shape_deviation;  // per row
    EvolveSummary evolve;
    LogLawFit fit;
    bool mu_in_band = false;     // 0.5/t <= mu <= 2/t on every row
    double worst_band_ratio = 0; // max over rows of mu t / 2
    double least_band_ratio = 0; // min over rows of mu t / 2
};

using ShotObserver = std::function<void(const ShotRecord&)>;

// Evolve and track one pair per shot, keeping the run whose offset is closest to zero.
InteractionResult run_interaction(const InteractionConfig& config, const ProfileSet& profiles,
                                  const ShotObserver& observer = {});

}  // namespace gkdv

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace driftburst {

// Annualized Heston variance parameters.
struct HestonParams {
    double kappa = 5.0;
    double theta = 0.0225;
    double xi = 0.4;
    double rho = -0.70710678118654752;  // leverage correlation

    // 2*kappa*theta vs xi^2; reported, not enforced.
    bool feller_satisfied() const { return 2.0 * kappa * theta > xi * xi; }
};

// Drift/volatility burst injection. Times are fractions of the day; `a` is
// annualized. The volatility burst scale is b*sqrt(theta) at unit distance.
struct BurstParams {
    double a = 0.0;
    double alpha = 0.55;
    double b = 0.0;
    double beta = 0.0;
    double tau_db = 0.5;
    double window_lo = 0.475;
    double window_hi = 0.525;
    bool recenter_vb = true;
    // Load volatility-burst shocks on the price Brownian instead of an
    // independent one.
    bool vb_on_price_brownian = false;
};

// Tempered-stable jump component, nu(dx) = psi exp(-lambda x) / x^{1+upsilon}.
struct JumpParams {
    double psi = 0.0;
    double lambda = 3.0;
    double upsilon = 0.5;  // only 0.5 is supported (exact simulation)
};

struct NoiseParams {
    double gamma = 0.0;  // noise-to-volatility ratio per increment
};

struct HestonPath {
    std::vector<double> variance;      // annualized sigma^2 on each interval, length n
    std::vector<double> increments;    // log-price increments, length n
    std::vector<double> price_shocks;  // unit normals driving the price Brownian, length n
};

HestonPath simulate_heston(const HestonParams& p, std::size_t n, double day_fraction_of_year,
                           std::uint64_t seed);

// Adds the parametric burst returns in place: the drift part uses the exact
// per-interval antiderivative, the volatility part draws an increment with
// the exact integrated variance over each interval. When
// bp.vb_on_price_brownian is set, `price_shocks` must be non-null and the
// volatility-burst shocks reuse those unit normals.
void inject_bursts(std::vector<double>& increments, const BurstParams& bp,
                   double theta, double day_fraction_of_year, std::uint64_t seed,
                   const std::vector<double>* price_shocks = nullptr);

// Difference of two one-sided tempered-stable subordinators, each sampled
// exactly per time step (stable proposal, exponential-tilt acceptance).
std::vector<double> simulate_tempered_stable(const JumpParams& jp, std::size_t n,
                                             double day_fraction_of_year, std::uint64_t seed);

// psi such that the jump component contributes `target_share` of expected
// quadratic variation against continuous QV theta * day_fraction_of_year.
double calibrate_jump_intensity(double target_share, const HestonParams& hp, double lambda,
                                double upsilon);

// Heteroscedastic microstructure noise: level i gets independent Gaussian
// noise with standard deviation gamma * sigma_i * sqrt(dt_years).
std::vector<double> add_noise(const std::vector<double>& levels,
                              const std::vector<double>& variance, const NoiseParams& np,
                              double day_fraction_of_year, std::uint64_t seed);

// Adds jump_size to every level at and after jump_time_fraction of the day.
std::vector<double> inject_fixed_jump(const std::vector<double>& levels, double jump_size,
                                      double jump_time_fraction);

// Full data-generating process for one simulated session.
struct ScenarioSpec {
    std::size_t n = 23400;
    double session_seconds = 23400.0;
    double day_fraction_of_year = 1.0 / 252.0;
    HestonParams heston;
    bool with_burst = false;
    BurstParams burst;
    bool with_jumps = false;
    JumpParams jumps;
    double jump_qv_share = -1.0;  // >0 calibrates psi, overriding jumps.psi
    NoiseParams noise;
    std::uint64_t seed = 1;
};

struct DayPath {
    std::vector<double> times;       // seconds, length n+1
    std::vector<double> clean;       // efficient log-price levels X, length n+1
    std::vector<double> noisy;       // observed log-price levels Y, length n+1
    std::vector<double> variance;    // annualized sigma^2 per interval, length n
};

DayPath simulate_day(const ScenarioSpec& spec);

// Key/value scenario file; unknown keys are rejected.
ScenarioSpec scenario_from_file(const std::string& path);
ScenarioSpec scenario_from_string(const std::string& text);
std::string scenario_to_string(const ScenarioSpec& spec);

}  // namespace driftburst

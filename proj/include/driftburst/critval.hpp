#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftburst/detector.hpp"

namespace driftburst {

struct Ar1Fit {
    double rho_hat = 0.0;
    std::size_t n_used = 0;
};

// No-intercept OLS of t_i on t_{i-1} over consecutive non-missing pairs,
// clamped to [-0.999, 0.999].
Ar1Fit fit_ar1(const TStatSeries& ts);
Ar1Fit fit_ar1(const std::vector<double>& values);

struct QuantileRow {
    std::vector<double> levels;
    std::vector<double> raw;         // quantiles of max|Z|
    std::vector<double> normalized;  // (raw - b_m) * a_m
    std::vector<double> std_errors;  // Monte Carlo standard errors of raw
};

// Simulates max |Z_i| over m draws of the stationary AR(1) with unit
// marginal variance and returns empirical quantiles at `levels`.
// Deterministic given the seed; replications use derived seed streams, so
// the result is independent of thread scheduling.
QuantileRow simulate_max_quantiles(std::size_t m, double rho, const std::vector<double>& levels,
                                   std::size_t n_sims, std::size_t burn_in, std::uint64_t seed);

struct CriticalValueTable {
    std::vector<std::size_t> m_axis;
    std::vector<double> rho_axis;
    std::vector<double> levels;
    // values[im][ir][il], im/ir/il indexing m_axis/rho_axis/levels.
    std::vector<std::vector<std::vector<double>>> raw;
    std::vector<std::vector<std::vector<double>>> normalized;
    std::vector<std::vector<std::vector<double>>> std_errors;
    std::size_t n_sims = 0;
    std::size_t burn_in = 0;
    std::uint64_t seed = 0;
    std::string version = kVersion;

    static constexpr const char* kVersion = "dbcv-1";
};

struct CriticalValueConfig {
    std::vector<std::size_t> m_axis = {100, 341, 1000, 3000, 10000, 30000};
    std::vector<double> rho_axis = {0.0, 0.5, 0.8, 0.9, 0.95, 0.98, 0.99};
    std::vector<double> levels = {0.90, 0.95, 0.99, 0.995};
    std::size_t n_sims = 200000;
    std::size_t burn_in = 100;
    std::uint64_t seed = 20240101;
};

CriticalValueTable build_critical_value_table(const CriticalValueConfig& cfg);

// Bilinear interpolation in (log m, rho); exact on grid nodes. Throws on
// queries outside the table hull.
double critical_value(const CriticalValueTable& table, std::size_t m, double rho, double level);

std::string critical_value_table_to_json(const CriticalValueTable& table);
CriticalValueTable critical_value_table_from_json(const std::string& json);

// Monte Carlo estimate of the expected number of extracted events above
// `threshold` per evaluation window of m grid points under the null AR(1)
// model, using the detector's local-extremum and separation rules.
double expected_false_positives(std::size_t m, double rho, double threshold,
                                std::size_t min_separation_points, std::size_t n_sims,
                                std::uint64_t seed);

}  // namespace driftburst

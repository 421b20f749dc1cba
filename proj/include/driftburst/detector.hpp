#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftburst/estimator.hpp"
#include "driftburst/kernel.hpp"
#include "driftburst/preavg.hpp"

namespace driftburst {

// Tick series after mid-quote construction: strictly increasing timestamps
// (seconds) with log-prices.
struct TickSeries {
    std::vector<double> times;
    std::vector<double> log_prices;
};

struct DetectorConfig {
    KernelSpec kernel;
    double mean_bandwidth_s = 300.0;   // h_n
    double var_bandwidth_s = 1500.0;   // h'_n
    int preavg_window = 3;             // k_n
    LagPolicy lags;
    double grid_spacing_s = 5.0;
    // Burn-in before the first evaluation; negative means one full
    // volatility bandwidth.
    double burn_in_s = -1.0;
    // A grid point needs a price update within this lookback to be
    // evaluated; negative means the grid spacing itself.
    double revision_lookback_s = -1.0;
    // Noise-robust mode runs the pre-averaged statistic with the HAC
    // variance; noise-free mode is the raw-increment statistic.
    bool noise_robust = true;
    double lrv_floor = 1e-24;
};

struct TStatSeries {
    std::vector<double> grid_times;
    std::vector<std::optional<double>> t_values;
    std::vector<std::optional<double>> mu_hats;
    std::vector<std::optional<double>> lrv_hats;
    DetectorConfig config_snapshot;

    std::size_t n_present() const;
};

struct MaxStat {
    std::size_t m = 0;       // non-missing evaluations
    double t_star = 0.0;     // max |t|
    double a_m = 0.0;
    double b_m = 0.0;
    double normalized = 0.0;  // (t_star - b_m) * a_m
};

struct BurstEvent {
    double peak_time = 0.0;
    double peak_t = 0.0;
    int sign = 0;
    double threshold_used = 0.0;
};

// Increment series with per-day lag count, prepared once so that repeated
// grid evaluations share the pre-averaging and lag-selection work.
struct PreparedSeries {
    std::vector<double> raw_times;   // left endpoints of raw increments
    std::vector<double> raw_increments;
    std::vector<double> pa_times;    // left endpoints of pre-averaged increments
    std::vector<double> pa_increments;
    int lags = 0;
};

PreparedSeries prepare_series(const TickSeries& series, const DetectorConfig& cfg);

// t-statistic at a single time; missing when the window is empty or the
// long-run variance is below the floor (stale prices).
std::optional<double> tstat_at(const PreparedSeries& prep, double t, const DetectorConfig& cfg);
std::optional<double> tstat_at(const TickSeries& series, double t, const DetectorConfig& cfg);

// Rolling evaluation on a regular grid. Grid points during burn-in or
// without a preceding price update are missing.
TStatSeries tstat_grid(const TickSeries& series, double grid_spacing_s, const DetectorConfig& cfg);

MaxStat max_stat(const TStatSeries& ts);

std::vector<BurstEvent> extract_events(const TStatSeries& ts, double threshold,
                                       double min_separation_s = 300.0);

// CSV columns: time,t,mu_hat,lrv_hat with 17 significant digits (exact
// double round-trip); missing values are empty fields.
std::string tstat_series_to_csv(const TStatSeries& ts);
TStatSeries tstat_series_from_csv(const std::string& csv);
std::string tstat_series_to_json(const TStatSeries& ts);
TStatSeries tstat_series_from_json(const std::string& json);

}  // namespace driftburst

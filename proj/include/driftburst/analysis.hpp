#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "driftburst/detector.hpp"

namespace driftburst {

// Pre/post log-returns around a detected burst peak. v_minus is the
// normalized pre-event gross volume when a trade stream is available.
struct EventReturns {
    double peak_time = 0.0;
    int sign = 0;
    double r_minus = 0.0;
    double r_plus = 0.0;
    double v_minus = 0.0;
    bool has_volume = false;
};

struct RegressionResult {
    std::vector<double> coefficients;  // intercept first
    std::vector<double> t_statistics;  // Newey-West
    double r_squared = 0.0;
    std::size_t n = 0;
    double reversal_fraction = 0.0;
};

// Log-returns over [peak - horizon, peak] and [peak, peak + horizon] with
// last-observation-carried-forward at the boundaries. Events whose windows
// fall outside the observed span are skipped. When `tstats` is supplied and
// endogenous_pre_window is set, the pre-window instead starts at the latest
// grid point before the peak where |t| < 1.
std::vector<EventReturns> event_returns(const TickSeries& series,
                                        const std::vector<BurstEvent>& events,
                                        double horizon_seconds = 300.0,
                                        const TStatSeries* tstats = nullptr,
                                        bool endogenous_pre_window = false);

// OLS of r_plus on an intercept and r_minus; b < 0 indicates retracement.
// reversal_fraction is the share of events with opposite-signed returns
// (zeros count as non-reversals). Needs at least 10 samples.
RegressionResult reversion_regression(const std::vector<EventReturns>& samples);

// OLS of r_plus on intercept, r_minus and the volume interaction
// r_minus * v_minus. Needs at least 20 samples with volume.
RegressionResult cgw_regression(const std::vector<EventReturns>& samples);

// Newey-West (Bartlett) HAC standard errors for OLS coefficients. `design`
// is row-major n x k; lags = 0 gives the White sandwich.
std::vector<double> nw_se(std::span<const double> design, std::size_t k,
                          std::span<const double> residuals, int lags);

// One trade observation; time_s is the clock time within the session.
struct Trade {
    int day = 0;
    double time_s = 0.0;
    double notional = 0.0;  // gross: price * size
};

// (day, window end) for each event's pre-window.
struct VolumeWindow {
    int day = 0;
    double end_s = 0.0;
};

// Gross notional in [end - horizon, end] divided by the all-day average
// notional in the same clock window. Needs trades on at least 20 distinct
// days. Unconditional mean is ~1 by construction.
std::vector<double> normalized_volume(const std::vector<Trade>& trades,
                                      const std::vector<VolumeWindow>& windows,
                                      double horizon_seconds = 300.0);

// Mean r_plus in quartile buckets of (r_minus, v_minus): low = 1st quartile,
// medium = inter-quartile range, high = 4th quartile. Split by burst sign.
// Empty cells are NaN.
struct DoubleSortTable {
    // [r_minus bucket][v_minus bucket], buckets ordered low/medium/high
    std::array<std::array<double, 3>, 3> cells{};
    std::array<std::array<std::size_t, 3>, 3> counts{};
    std::array<double, 3> high_minus_low{};  // per r_minus bucket: high-V col minus low-V col
    std::size_t n = 0;
};

struct DoubleSortResult {
    DoubleSortTable negative;  // events with r_minus < 0
    DoubleSortTable positive;  // events with r_minus >= 0
};

DoubleSortResult double_sort(const std::vector<EventReturns>& samples);

}  // namespace driftburst

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "driftburst/kernel.hpp"

namespace driftburst {

// Raised when no observation carries kernel weight at the requested time.
struct EmptyWindow : std::runtime_error {
    EmptyWindow() : std::runtime_error("no in-window observations") {}
};

struct SpotEstimates {
    double t = 0.0;
    double mu_hat = 0.0;
    double lrv_hat = 0.0;
    std::size_t n_effective = 0;
};

struct LagPolicy {
    enum class Mode { Fixed, Auto };
    Mode mode = Mode::Auto;
    int fixed_lags = 0;  // L_n in Fixed mode
    int base_add = 0;    // added to Q* in Auto mode (2(k_n - 1) for pre-averaging)
};

// Local drift estimate at time t: (1/h) sum_i K((t_i - t)/h) * increments[i],
// over increments whose (left-endpoint) timestamps fall in the kernel window.
// `times` must be non-decreasing; only observations with times[i] <= t enter.
double spot_drift(std::span<const double> times, std::span<const double> increments, double t,
                  double h, const KernelSpec& kernel);

// HAC long-run variance of the drift estimate at time t with `lags`
// Parzen-weighted autocovariance terms. Non-negative by construction.
double spot_lrv(std::span<const double> times, std::span<const double> increments, double t,
                double h_prime, const KernelSpec& kernel, int lags);

// Noise-free spot volatility (square root of the kernel-weighted sum of
// squared increments).
double spot_variance_raw(std::span<const double> times, std::span<const double> increments,
                         double t, double h_prime, const KernelSpec& kernel);

// Newey-West (1994) automatic lag selection on raw increments, clamped to
// [0, n/4]. Pilot truncation floor(4 (n/100)^{2/9}).
int auto_lag(std::span<const double> increments);

int resolve_lags(const LagPolicy& policy, std::span<const double> raw_increments);

}  // namespace driftburst

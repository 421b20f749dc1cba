#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace driftburst {

// Local explosive model fitted to a pre-peak window: increment i over
// [t_{i-1}, t_i] is Gaussian with mean (mu/(1-alpha))[(T-t_{i-1})^{1-alpha} -
// (T-t_i)^{1-alpha}] and variance (sigma^2/(1-2 beta))[(T-t_{i-1})^{1-2 beta}
// - (T-t_i)^{1-2 beta}].
struct ParamFit {
    double mu = 0.0;
    double sigma = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double loglik = 0.0;
    bool converged = false;
    double lr_drift = 0.0;  // 2(loglik - loglik at alpha = 0)
    double lr_vol = 0.0;    // 2(loglik - loglik at beta = 0)
    double pvalue_drift = 1.0;
    double pvalue_vol = 1.0;

    std::string to_json() const;
};

// Exact Gaussian log-likelihood. `times` holds the n+1 interval endpoints for
// the n increments; the last endpoint must lie strictly before T. Returns
// -infinity when the parameters leave the admissible region.
double loglik(double mu, double sigma, double alpha, double beta, std::span<const double> times,
              std::span<const double> increments, double T);

// Maximum likelihood over mu in R, sigma > 0, alpha in [0, 0.99],
// beta in [0, 0.49]. (mu, sigma) are profiled out in closed form; (alpha,
// beta) are optimized by Nelder-Mead from a fixed multi-start grid.
// Deterministic. Needs at least 50 increments.
ParamFit fit_mle(std::span<const double> times, std::span<const double> increments, double T);

// (statistic, p-value): statistic = 2(l_full - l_restricted) clamped at 0,
// p-value from the chi-squared(1) upper tail. A full-model log-likelihood
// more than 1e-6 below the restricted one is an optimization failure.
std::pair<double, double> lr_test(double loglik_restricted, double loglik_full);

}  // namespace driftburst

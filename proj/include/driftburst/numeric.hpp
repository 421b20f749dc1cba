#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace driftburst {

// SplitMix64 step; used to derive independent per-replication seeds from a
// master seed so that parallel Monte Carlo runs are schedule-independent.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xd1342543de82ef95ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Inverse standard normal CDF (Acklam's rational approximation, polished by
// one Halley step to near machine precision).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement.
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

// Upper tail of the chi-square distribution with one degree of freedom.
inline double chi2_1_sf(double x) {
    if (x < 0.0) return 1.0;
    return std::erfc(std::sqrt(x / 2.0));
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("variance: need >= 2 values");
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double stddev(const std::vector<double>& v) { return std::sqrt(variance(v)); }

inline double excess_kurtosis(const std::vector<double>& v) {
    if (v.size() < 4) throw std::invalid_argument("excess_kurtosis: need >= 4 values");
    double m = mean(v), m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    double n = static_cast<double>(v.size());
    m2 /= n;
    m4 /= n;
    return m4 / (m2 * m2) - 3.0;
}

// Type-7 (linear interpolation) empirical quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    double h = p * (static_cast<double>(sorted.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(h);
    double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// Adaptive Simpson quadrature.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, int max_depth = 40);

// Runs fn(i) for i in [0, n). Work is split across hardware threads; each
// index is processed exactly once, so writes to disjoint slots need no locks.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace driftburst

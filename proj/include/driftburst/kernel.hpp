#pragma once

#include <cmath>
#include <stdexcept>

namespace driftburst {

enum class KernelFamily { LeftExponential };

// Left-sided smoothing kernel. The exponential kernel has infinite support;
// it is truncated at `truncation_radius` bandwidths, where the remaining
// weight is below 5e-5.
struct KernelSpec {
    KernelFamily family = KernelFamily::LeftExponential;
    double truncation_radius = 10.0;
};

// K(x): exp(-|x|) for x <= 0, zero for x > 0 and beyond the truncation radius.
inline double eval_kernel(const KernelSpec& spec, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("eval_kernel: non-finite x");
    if (x > 0.0 || x < -spec.truncation_radius) return 0.0;
    switch (spec.family) {
        case KernelFamily::LeftExponential:
            return std::exp(x);
    }
    return 0.0;
}

// K_2 = integral of K^2 over the support.
double kernel_K2(const KernelSpec& spec);

// m_K(power) = integral of K(x)|x|^power (squared=false) or of
// K^2(x)|x|^power (squared=true). Closed Gamma forms for the exponential
// kernel; adaptive quadrature otherwise.
double kernel_moment(const KernelSpec& spec, double power, bool squared);

// c_{K,beta}: asymptotic standard deviation inflation of the t-statistic
// under a pure volatility burst of rate beta. Equals 2^beta for the
// left-exponential kernel.
double kernel_vb_stdev_factor(const KernelSpec& spec, double beta);

// Parzen lag window: positive semi-definite, w(0)=1, support [-1,1].
inline double parzen(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("parzen: non-finite x");
    double ax = std::abs(x);
    if (ax <= 0.5) return 1.0 - 6.0 * ax * ax + 6.0 * ax * ax * ax;
    if (ax <= 1.0) {
        double u = 1.0 - ax;
        return 2.0 * u * u * u;
    }
    return 0.0;
}

}  // namespace driftburst

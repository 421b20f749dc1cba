#include "driftburst/kernel.hpp"

#include "driftburst/numeric.hpp"

namespace driftburst {

double kernel_K2(const KernelSpec& spec) {
    switch (spec.family) {
        case KernelFamily::LeftExponential:
            return 0.5;
    }
    // Quadrature fallback for kernels without a closed form.
    return integrate([&spec](double x) { double k = eval_kernel(spec, x); return k * k; },
                     -spec.truncation_radius, 0.0, 1e-11);
}

double kernel_moment(const KernelSpec& spec, double power, bool squared) {
    if (power <= -1.0) throw std::domain_error("kernel_moment: power must exceed -1");
    if (spec.family == KernelFamily::LeftExponential) {
        // m_K(a) = Gamma(1+a), m'_K(a) = Gamma(1+a) 2^{-(1+a)}.
        double g = std::tgamma(1.0 + power);
        return squared ? g * std::pow(2.0, -(1.0 + power)) : g;
    }
    // |x|^power is singular at 0 for power < 0; split the range so the
    // adaptive rule concentrates near the singularity.
    auto f = [&spec, power, squared](double x) {
        double k = eval_kernel(spec, x);
        if (squared) k *= k;
        return k * std::pow(std::abs(x), power);
    };
    return integrate(f, -spec.truncation_radius, -1.0, 1e-10) + integrate(f, -1.0, 0.0, 1e-10);
}

double kernel_vb_stdev_factor(const KernelSpec& spec, double beta) {
    if (beta < 0.0 || beta >= 0.5) {
        throw std::domain_error("kernel_vb_stdev_factor: beta must be in [0, 0.5)");
    }
    double k2 = kernel_K2(spec);
    double num = kernel_moment(spec, -2.0 * beta, true);
    double den = kernel_moment(spec, -2.0 * beta, false);
    return std::sqrt(num / (k2 * den));
}

}  // namespace driftburst

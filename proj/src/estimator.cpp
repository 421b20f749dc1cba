#include "driftburst/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace driftburst {

namespace {

struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the last in-window index
    bool empty() const { return begin >= end; }
};

Window find_window(std::span<const double> times, double t, double h, double radius) {
    const double lo = t - radius * h;
    auto first = std::lower_bound(times.begin(), times.end(), lo);
    auto last = std::upper_bound(first, times.end(), t);
    return {static_cast<std::size_t>(first - times.begin()),
            static_cast<std::size_t>(last - times.begin())};
}

// Kernel weights K((times[i] - t)/h) for i in [w.begin, w.end). For the
// exponential kernel consecutive weights differ by exp(dt/h), so repeated
// spacings cost one exp in total.
void fill_weights(std::span<const double> times, const Window& w, double t, double h,
                  const KernelSpec& kernel, std::vector<double>& out) {
    out.resize(w.end - w.begin);
    if (out.empty()) return;
    if (kernel.family == KernelFamily::LeftExponential) {
        double prev_dt = -1.0;
        double factor = 1.0;
        double weight = std::exp((times[w.begin] - t) / h);
        out[0] = weight;
        for (std::size_t j = 1; j < out.size(); ++j) {
            double dt = times[w.begin + j] - times[w.begin + j - 1];
            if (dt != prev_dt) {
                factor = std::exp(dt / h);
                prev_dt = dt;
            }
            weight *= factor;
            out[j] = weight;
        }
    } else {
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] = eval_kernel(kernel, (times[w.begin + j] - t) / h);
        }
    }
}

}  // namespace

double spot_drift(std::span<const double> times, std::span<const double> increments, double t,
                  double h, const KernelSpec& kernel) {
    if (h <= 0.0) throw std::invalid_argument("spot_drift: bandwidth must be positive");
    Window w = find_window(times, t, h, kernel.truncation_radius);
    if (w.empty()) throw EmptyWindow{};
    std::vector<double> weights;
    fill_weights(times, w, t, h, kernel, weights);
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * increments[w.begin + j];
    return s / h;
}

double spot_lrv(std::span<const double> times, std::span<const double> increments, double t,
                double h_prime, const KernelSpec& kernel, int lags) {
    if (h_prime <= 0.0) throw std::invalid_argument("spot_lrv: bandwidth must be positive");
    if (lags < 0) throw std::invalid_argument("spot_lrv: lags must be >= 0");
    Window w = find_window(times, t, h_prime, kernel.truncation_radius);
    if (w.empty()) throw EmptyWindow{};
    std::vector<double> weights;
    fill_weights(times, w, t, h_prime, kernel, weights);

    // Weighted terms K_i * dY_i; the HAC sum is then a plain lag product.
    std::vector<double> wd(weights.size());
    for (std::size_t j = 0; j < wd.size(); ++j) wd[j] = weights[j] * increments[w.begin + j];

    double s = 0.0;
    for (double v : wd) s += v * v;
    const std::size_t nw = wd.size();
    // The lag count must stay small relative to the local sample.
    lags = std::min<int>(lags, static_cast<int>(nw / 4));
    for (int lag = 1; lag <= lags && static_cast<std::size_t>(lag) < nw; ++lag) {
        double wl = parzen(static_cast<double>(lag) / lags);
        if (wl == 0.0) continue;
        double acc = 0.0;
        for (std::size_t j = 0; j + lag < nw; ++j) acc += wd[j] * wd[j + lag];
        s += 2.0 * wl * acc;
    }
    return std::max(s, 0.0) / h_prime;
}

double spot_variance_raw(std::span<const double> times, std::span<const double> increments,
                         double t, double h_prime, const KernelSpec& kernel) {
    if (h_prime <= 0.0) throw std::invalid_argument("spot_variance_raw: bandwidth must be positive");
    Window w = find_window(times, t, h_prime, kernel.truncation_radius);
    if (w.empty()) throw EmptyWindow{};
    std::vector<double> weights;
    fill_weights(times, w, t, h_prime, kernel, weights);
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        double d = increments[w.begin + j];
        s += weights[j] * d * d;
    }
    return std::sqrt(s / h_prime);
}

int auto_lag(std::span<const double> increments) {
    const std::size_t n = increments.size();
    if (n < 50) throw std::invalid_argument("auto_lag: need at least 50 increments");
    double m = 0.0;
    for (double x : increments) m += x;
    m /= static_cast<double>(n);

    const int pilot = static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 2.0 / 9.0)));
    std::vector<double> gamma(pilot + 1, 0.0);
    for (int j = 0; j <= pilot; ++j) {
        double acc = 0.0;
        for (std::size_t i = j; i < n; ++i) acc += (increments[i] - m) * (increments[i - j] - m);
        gamma[j] = acc / static_cast<double>(n);
    }
    double s0 = gamma[0], s1 = 0.0;
    for (int j = 1; j <= pilot; ++j) {
        s0 += 2.0 * gamma[j];
        s1 += 2.0 * j * gamma[j];
    }
    if (!(s0 > 0.0) || gamma[0] <= 0.0) return 0;
    double q = 1.1447 * std::pow((s1 / s0) * (s1 / s0) * static_cast<double>(n), 1.0 / 3.0);
    int out = static_cast<int>(std::ceil(q));
    return std::clamp(out, 0, static_cast<int>(n / 4));
}

int resolve_lags(const LagPolicy& policy, std::span<const double> raw_increments) {
    if (policy.mode == LagPolicy::Mode::Fixed) return std::max(policy.fixed_lags, 0);
    return auto_lag(raw_increments) + std::max(policy.base_add, 0);
}

}  // namespace driftburst

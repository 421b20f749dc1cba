#include "driftburst/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "driftburst/numeric.hpp"

namespace driftburst {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kAlphaMax = 0.99;
constexpr double kBetaMax = 0.49;

void check_window(std::span<const double> times, std::span<const double> increments, double T) {
    if (times.size() != increments.size() + 1) {
        throw std::invalid_argument("parametric: times must have increments.size() + 1 entries");
    }
    if (increments.empty()) throw std::invalid_argument("parametric: empty window");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw std::invalid_argument("parametric: times must be strictly increasing");
        }
    }
    if (!(times.back() < T)) {
        throw std::domain_error("parametric: last observation must precede the explosion time T");
    }
    for (double d : increments) {
        if (!std::isfinite(d)) throw std::invalid_argument("parametric: non-finite increment");
    }
}

// Per-interval factors: w_i = [(T-t_{i-1})^p - (T-t_i)^p]/p with p = 1-alpha,
// and the analogous v_i with p = 1-2 beta. Both are positive on valid input.
void interval_factors(std::span<const double> times, double T, double p, std::vector<double>& out) {
    out.resize(times.size() - 1);
    double prev = std::pow(T - times[0], p);
    for (std::size_t i = 1; i < times.size(); ++i) {
        double cur = std::pow(T - times[i], p);
        out[i - 1] = (prev - cur) / p;
        prev = cur;
    }
}

struct ProfileResult {
    double mu = 0.0;
    double sigma2 = 0.0;
    double loglik = kNegInf;
};

// Given (alpha, beta), the Gaussian MLEs of (mu, sigma^2) are closed-form
// weighted least squares; returns the profiled log-likelihood.
ProfileResult profile_loglik(double alpha, double beta, std::span<const double> times,
                             std::span<const double> increments, double T, std::vector<double>& w,
                             std::vector<double>& v) {
    ProfileResult res;
    if (alpha < 0.0 || alpha > kAlphaMax || beta < 0.0 || beta > kBetaMax) return res;
    interval_factors(times, T, 1.0 - alpha, w);
    interval_factors(times, T, 1.0 - 2.0 * beta, v);
    const std::size_t n = increments.size();
    double sww = 0.0, swd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sww += w[i] * w[i] / v[i];
        swd += w[i] * increments[i] / v[i];
    }
    res.mu = swd / sww;
    double rss = 0.0, logv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = increments[i] - res.mu * w[i];
        rss += r * r / v[i];
        logv += std::log(v[i]);
    }
    res.sigma2 = rss / static_cast<double>(n);
    if (!(res.sigma2 > 0.0) || !std::isfinite(res.sigma2)) return res;
    res.loglik = -0.5 * static_cast<double>(n) * (std::log(2.0 * M_PI * res.sigma2) + 1.0) -
                 0.5 * logv;
    return res;
}

// Derivative-free simplex minimizer with coordinate clamping to a box.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, const std::vector<double>& lo,
                                const std::vector<double>& hi, double step, int max_iter,
                                double tol) {
    const std::size_t d = x0.size();
    auto clamp = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };
    clamp(x0);
    std::vector<std::vector<double>> simplex(d + 1, x0);
    for (std::size_t i = 0; i < d; ++i) {
        simplex[i + 1][i] += (x0[i] + step <= hi[i]) ? step : -step;
        clamp(simplex[i + 1]);
    }
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i <= d; ++i) fv[i] = f(simplex[i]);

    for (int it = 0; it < max_iter; ++it) {
        // Order: simplex[order[0]] best.
        std::vector<std::size_t> order(d + 1);
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        if (std::abs(fv[order[d]] - fv[order[0]]) < tol) break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[order[i]][j];
        }
        for (double& c : centroid) c /= static_cast<double>(d);
        auto& worst = simplex[order[d]];
        double fworst = fv[order[d]];

        auto point = [&](double coef) {
            std::vector<double> x(d);
            for (std::size_t j = 0; j < d; ++j) x[j] = centroid[j] + coef * (centroid[j] - worst[j]);
            clamp(x);
            return x;
        };
        std::vector<double> xr = point(1.0);
        double fr = f(xr);
        if (fr < fv[order[0]]) {
            std::vector<double> xe = point(2.0);
            double fe = f(xe);
            if (fe < fr) { worst = xe; fv[order[d]] = fe; } else { worst = xr; fv[order[d]] = fr; }
        } else if (fr < fv[order[d - 1]]) {
            worst = xr;
            fv[order[d]] = fr;
        } else {
            std::vector<double> xc = point(fr < fworst ? 0.5 : -0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fworst)) {
                worst = xc;
                fv[order[d]] = fc;
            } else {
                // Shrink toward the best vertex.
                for (std::size_t i = 1; i <= d; ++i) {
                    auto& x = simplex[order[i]];
                    for (std::size_t j = 0; j < d; ++j) {
                        x[j] = simplex[order[0]][j] + 0.5 * (x[j] - simplex[order[0]][j]);
                    }
                    clamp(x);
                    fv[order[i]] = f(x);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i) {
        if (fv[i] < fv[best]) best = i;
    }
    return simplex[best];
}

struct BestFit {
    double alpha = 0.0;
    double beta = 0.0;
    ProfileResult prof;
};

enum class FitMode { Full, NoDrift, NoVol };

// Optimizes the profiled likelihood over the free shape parameters.
// extra_starts lets the caller seed the full fit with restricted optima.
BestFit optimize(FitMode mode, std::span<const double> times, std::span<const double> increments,
                 double T, const std::vector<std::pair<double, double>>& extra_starts) {
    std::vector<double> w, v;
    auto eval = [&](double a, double b) { return profile_loglik(a, b, times, increments, T, w, v); };

    static const double a_grid[] = {0.0, 0.3, 0.6};
    static const double b_grid[] = {0.0, 0.2, 0.4};
    std::vector<std::pair<double, double>> starts;
    if (mode == FitMode::Full) {
        for (double a : a_grid)
            for (double b : b_grid) starts.emplace_back(a, b);
    } else if (mode == FitMode::NoDrift) {
        for (double b : b_grid) starts.emplace_back(0.0, b);
    } else {
        for (double a : a_grid) starts.emplace_back(a, 0.0);
    }
    starts.insert(starts.end(), extra_starts.begin(), extra_starts.end());

    BestFit best;
    best.prof.loglik = kNegInf;
    for (auto [a0, b0] : starts) {
        std::vector<double> x0, lo, hi;
        std::function<double(const std::vector<double>&)> obj;
        if (mode == FitMode::Full) {
            x0 = {a0, b0};
            lo = {0.0, 0.0};
            hi = {kAlphaMax, kBetaMax};
            obj = [&](const std::vector<double>& x) { return -eval(x[0], x[1]).loglik; };
        } else if (mode == FitMode::NoDrift) {
            x0 = {b0};
            lo = {0.0};
            hi = {kBetaMax};
            obj = [&](const std::vector<double>& x) { return -eval(0.0, x[0]).loglik; };
        } else {
            x0 = {a0};
            lo = {0.0};
            hi = {kAlphaMax};
            obj = [&](const std::vector<double>& x) { return -eval(x[0], 0.0).loglik; };
        }
        std::vector<double> xopt = nelder_mead(obj, x0, lo, hi, 0.1, 400, 1e-11);
        double a = (mode == FitMode::NoDrift) ? 0.0 : xopt[0];
        double b = (mode == FitMode::Full) ? xopt[1] : (mode == FitMode::NoVol ? 0.0 : xopt[0]);
        ProfileResult pr = eval(a, b);
        if (pr.loglik > best.prof.loglik) {
            best.alpha = a;
            best.beta = b;
            best.prof = pr;
        }
    }
    return best;
}

}  // namespace

double loglik(double mu, double sigma, double alpha, double beta, std::span<const double> times,
              std::span<const double> increments, double T) {
    check_window(times, increments, T);
    if (!(sigma > 0.0) || alpha < 0.0 || alpha >= 1.0 || beta < 0.0 || beta >= 0.5) return kNegInf;
    std::vector<double> w, v;
    interval_factors(times, T, 1.0 - alpha, w);
    interval_factors(times, T, 1.0 - 2.0 * beta, v);
    double acc = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        double var = sigma * sigma * v[i];
        if (!(var > 0.0)) return kNegInf;
        double r = increments[i] - mu * w[i];
        acc += -0.5 * std::log(2.0 * M_PI * var) - r * r / (2.0 * var);
    }
    return acc;
}

ParamFit fit_mle(std::span<const double> times, std::span<const double> increments, double T) {
    check_window(times, increments, T);
    if (increments.size() < 50) throw std::invalid_argument("fit_mle: need at least 50 increments");

    // Rescale time to [0,1] for conditioning; the likelihood value is
    // invariant and (mu, sigma) map back by powers of the scale.
    const double t0 = times[0];
    const double scale = T - t0;
    std::vector<double> st(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) st[i] = (times[i] - t0) / scale;
    const double Ts = 1.0;

    BestFit restricted_drift = optimize(FitMode::NoDrift, st, increments, Ts, {});
    BestFit restricted_vol = optimize(FitMode::NoVol, st, increments, Ts, {});
    BestFit full = optimize(FitMode::Full, st, increments, Ts,
                            {{restricted_drift.alpha, restricted_drift.beta},
                             {restricted_vol.alpha, restricted_vol.beta}});

    if (!std::isfinite(full.prof.loglik)) {
        throw std::runtime_error("fit_mle: likelihood not finite at any start (degenerate window)");
    }

    ParamFit fit;
    fit.alpha = full.alpha;
    fit.beta = full.beta;
    fit.mu = full.prof.mu / std::pow(scale, 1.0 - full.alpha);
    fit.sigma = std::sqrt(full.prof.sigma2 / std::pow(scale, 1.0 - 2.0 * full.beta));
    fit.loglik = full.prof.loglik;
    fit.converged = true;
    std::tie(fit.lr_drift, fit.pvalue_drift) = lr_test(restricted_drift.prof.loglik, fit.loglik);
    std::tie(fit.lr_vol, fit.pvalue_vol) = lr_test(restricted_vol.prof.loglik, fit.loglik);
    return fit;
}

std::pair<double, double> lr_test(double loglik_restricted, double loglik_full) {
    double stat = 2.0 * (loglik_full - loglik_restricted);
    if (stat < -1e-6) {
        throw std::runtime_error("lr_test: full model log-likelihood below restricted model");
    }
    stat = std::max(stat, 0.0);
    return {stat, chi2_1_sf(stat)};
}

std::string ParamFit::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"mu\":" << mu << ",\"sigma\":" << sigma << ",\"alpha\":" << alpha
       << ",\"beta\":" << beta << ",\"loglik\":" << loglik
       << ",\"converged\":" << (converged ? "true" : "false") << ",\"lr_drift\":" << lr_drift
       << ",\"lr_vol\":" << lr_vol << ",\"pvalue_drift\":" << pvalue_drift
       << ",\"pvalue_vol\":" << pvalue_vol << "}";
    return os.str();
}

}  // namespace driftburst

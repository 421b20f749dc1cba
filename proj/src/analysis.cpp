#include "driftburst/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "driftburst/numeric.hpp"

namespace driftburst {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Level at time t with last observation carried forward. Requires
// times.front() <= t (checked by callers via coverage tests).
double locf(const TickSeries& s, double t) {
    auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
    return s.log_prices[static_cast<std::size_t>(it - s.times.begin()) - 1];
}

int nw_auto_lags(std::size_t n) {
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

// Eigenvalues of a symmetric k x k matrix (row-major) by cyclic Jacobi.
std::vector<double> sym_eigenvalues(std::vector<double> a, std::size_t k) {
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) off += a[p * k + q] * a[p * k + q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                double apq = a[p * k + q];
                if (apq == 0.0) continue;
                double theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t r = 0; r < k; ++r) {
                    double arp = a[r * k + p], arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    double apr = a[p * k + r], aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
            }
        }
    }
    std::vector<double> ev(k);
    for (std::size_t i = 0; i < k; ++i) ev[i] = a[i * k + i];
    return ev;
}

// Inverse of a symmetric positive definite k x k matrix by Gauss-Jordan.
std::vector<double> invert(std::vector<double> a, std::size_t k) {
    std::vector<double> inv(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) inv[i * k + i] = 1.0;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
        }
        if (std::abs(a[piv * k + col]) < 1e-300) {
            throw std::runtime_error("regression: singular design matrix");
        }
        if (piv != col) {
            for (std::size_t j = 0; j < k; ++j) {
                std::swap(a[piv * k + j], a[col * k + j]);
                std::swap(inv[piv * k + j], inv[col * k + j]);
            }
        }
        double d = a[col * k + col];
        for (std::size_t j = 0; j < k; ++j) {
            a[col * k + j] /= d;
            inv[col * k + j] /= d;
        }
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            double f = a[r * k + col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < k; ++j) {
                a[r * k + j] -= f * a[col * k + j];
                inv[r * k + j] -= f * inv[col * k + j];
            }
        }
    }
    return inv;
}

struct OlsFit {
    std::vector<double> coef;
    std::vector<double> residuals;
    double r_squared = 0.0;
};

OlsFit ols(std::span<const double> X, std::size_t k, std::span<const double> y) {
    const std::size_t n = y.size();
    std::vector<double> xtx(k * k, 0.0), xty(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = X.data() + i * k;
        for (std::size_t a = 0; a < k; ++a) {
            xty[a] += xi[a] * y[i];
            for (std::size_t b = a; b < k; ++b) xtx[a * k + b] += xi[a] * xi[b];
        }
    }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < a; ++b) xtx[a * k + b] = xtx[b * k + a];

    std::vector<double> inv = invert(xtx, k);
    OlsFit fit;
    fit.coef.assign(k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) fit.coef[a] += inv[a * k + b] * xty[b];

    fit.residuals.resize(n);
    double ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) ybar += y[i];
    ybar /= static_cast<double>(n);
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double yhat = 0.0;
        const double* xi = X.data() + i * k;
        for (std::size_t a = 0; a < k; ++a) yhat += xi[a] * fit.coef[a];
        fit.residuals[i] = y[i] - yhat;
        rss += fit.residuals[i] * fit.residuals[i];
        tss += (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;
    return fit;
}

double cond_number(std::span<const double> X, std::size_t k, std::size_t n) {
    std::vector<double> xtx(k * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = X.data() + i * k;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) xtx[a * k + b] += xi[a] * xi[b];
    }
    std::vector<double> ev = sym_eigenvalues(std::move(xtx), k);
    double lo = *std::min_element(ev.begin(), ev.end());
    double hi = *std::max_element(ev.begin(), ev.end());
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

RegressionResult run_regression(std::span<const double> X, std::size_t k,
                                std::span<const double> y,
                                const std::vector<EventReturns>& samples) {
    OlsFit fit = ols(X, k, y);
    RegressionResult res;
    res.coefficients = fit.coef;
    res.n = y.size();
    res.r_squared = fit.r_squared;
    std::vector<double> se = nw_se(X, k, fit.residuals, nw_auto_lags(res.n));
    res.t_statistics.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
        res.t_statistics[a] = se[a] > 0.0 ? fit.coef[a] / se[a]
                                          : std::numeric_limits<double>::infinity() *
                                                (fit.coef[a] >= 0.0 ? 1.0 : -1.0);
    }
    std::size_t reversals = 0;
    for (const auto& s : samples) {
        if (s.r_minus * s.r_plus < 0.0) ++reversals;
    }
    res.reversal_fraction = static_cast<double>(reversals) / static_cast<double>(samples.size());
    return res;
}

}  // namespace

std::vector<EventReturns> event_returns(const TickSeries& series,
                                        const std::vector<BurstEvent>& events,
                                        double horizon_seconds, const TStatSeries* tstats,
                                        bool endogenous_pre_window) {
    if (horizon_seconds <= 0.0) throw std::domain_error("event_returns: horizon must be positive");
    if (series.times.empty()) return {};
    std::vector<EventReturns> out;
    for (const auto& ev : events) {
        double pre_start = ev.peak_time - horizon_seconds;
        if (endogenous_pre_window && tstats != nullptr) {
            // Latest grid point strictly before the peak where |t| dips
            // below one; keeps the fixed window if the dip never happens.
            for (std::size_t i = tstats->grid_times.size(); i-- > 0;) {
                if (tstats->grid_times[i] >= ev.peak_time) continue;
                const auto& tv = tstats->t_values[i];
                if (tv.has_value() && std::abs(*tv) < 1.0) {
                    pre_start = tstats->grid_times[i];
                    break;
                }
            }
        }
        if (pre_start < series.times.front() ||
            ev.peak_time + horizon_seconds > series.times.back()) {
            continue;  // window not covered; skip semantics
        }
        EventReturns er;
        er.peak_time = ev.peak_time;
        er.sign = ev.sign;
        double x_peak = locf(series, ev.peak_time);
        er.r_minus = x_peak - locf(series, pre_start);
        er.r_plus = locf(series, ev.peak_time + horizon_seconds) - x_peak;
        out.push_back(er);
    }
    return out;
}

RegressionResult reversion_regression(const std::vector<EventReturns>& samples) {
    const std::size_t n = samples.size();
    if (n < 10) throw std::invalid_argument("reversion_regression: need at least 10 samples");
    std::vector<double> X(n * 2), y(n);
    double lo = samples[0].r_minus, hi = lo;
    for (std::size_t i = 0; i < n; ++i) {
        X[i * 2] = 1.0;
        X[i * 2 + 1] = samples[i].r_minus;
        y[i] = samples[i].r_plus;
        lo = std::min(lo, samples[i].r_minus);
        hi = std::max(hi, samples[i].r_minus);
    }
    if (lo == hi) throw std::runtime_error("reversion_regression: degenerate regressor");
    return run_regression(X, 2, y, samples);
}

RegressionResult cgw_regression(const std::vector<EventReturns>& samples) {
    const std::size_t n = samples.size();
    if (n < 20) throw std::invalid_argument("cgw_regression: need at least 20 samples");
    std::vector<double> X(n * 3), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!samples[i].has_volume) {
            throw std::invalid_argument("cgw_regression: all samples need volume");
        }
        X[i * 3] = 1.0;
        X[i * 3 + 1] = samples[i].r_minus;
        X[i * 3 + 2] = samples[i].r_minus * samples[i].v_minus;
        y[i] = samples[i].r_plus;
    }
    bool interaction_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (X[i * 3 + 2] != 0.0) {
            interaction_zero = false;
            break;
        }
    }
    if (interaction_zero) {
        // Degenerate-but-nested case: the model collapses to the plain
        // reversion regression with c pinned at zero.
        RegressionResult res = reversion_regression(samples);
        res.coefficients.push_back(0.0);
        res.t_statistics.push_back(0.0);
        return res;
    }
    if (cond_number(X, 3, n) > 1e10) {
        throw std::runtime_error("cgw_regression: collinear design (condition number > 1e10)");
    }
    return run_regression(X, 3, y, samples);
}

std::vector<double> nw_se(std::span<const double> design, std::size_t k,
                          std::span<const double> residuals, int lags) {
    if (lags < 0) throw std::domain_error("nw_se: lags must be >= 0");
    const std::size_t n = residuals.size();
    if (design.size() != n * k) throw std::invalid_argument("nw_se: design/residual size mismatch");

    std::vector<double> xtx(k * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = design.data() + i * k;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) xtx[a * k + b] += xi[a] * xi[b];
    }
    std::vector<double> bread = invert(std::move(xtx), k);

    // Bartlett-weighted score covariance: S = sum_j w_j sum_i s_i s_{i+j}'
    // (lag-0 term once, higher lags symmetrized).
    std::vector<double> meat(k * k, 0.0);
    for (int j = 0; j <= std::min<int>(lags, static_cast<int>(n) - 1); ++j) {
        double w = 1.0 - static_cast<double>(j) / (static_cast<double>(lags) + 1.0);
        for (std::size_t i = 0; i + static_cast<std::size_t>(j) < n; ++i) {
            const double* xi = design.data() + i * k;
            const double* xj = design.data() + (i + static_cast<std::size_t>(j)) * k;
            double uu = residuals[i] * residuals[i + static_cast<std::size_t>(j)];
            for (std::size_t a = 0; a < k; ++a) {
                for (std::size_t b = 0; b < k; ++b) {
                    double term = w * uu * xi[a] * xj[b];
                    meat[a * k + b] += term;
                    if (j > 0) meat[b * k + a] += term;
                }
            }
        }
    }

    std::vector<double> se(k);
    for (std::size_t a = 0; a < k; ++a) {
        double var = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = 0; q < k; ++q)
                var += bread[a * k + p] * meat[p * k + q] * bread[q * k + a];
        se[a] = std::sqrt(std::max(var, 0.0));
    }
    return se;
}

std::vector<double> normalized_volume(const std::vector<Trade>& trades,
                                      const std::vector<VolumeWindow>& windows,
                                      double horizon_seconds) {
    if (horizon_seconds <= 0.0) throw std::domain_error("normalized_volume: horizon must be positive");
    std::set<int> days;
    for (const auto& t : trades) days.insert(t.day);
    if (days.size() < 20) {
        throw std::runtime_error("normalized_volume: need trades on at least 20 distinct days");
    }
    std::vector<double> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        double lo = w.end_s - horizon_seconds;
        double numer = 0.0, total = 0.0;
        for (const auto& t : trades) {
            if (t.time_s >= lo && t.time_s <= w.end_s) {
                total += t.notional;
                if (t.day == w.day) numer += t.notional;
            }
        }
        double denom = total / static_cast<double>(days.size());
        if (denom <= 0.0) {
            throw std::runtime_error("normalized_volume: empty time-of-day profile for a window");
        }
        out.push_back(numer / denom);
    }
    return out;
}

namespace {

// 0 = low (<= Q1), 2 = high (>= Q3), 1 = inter-quartile.
int bucket(double x, double q1, double q3) {
    if (x <= q1) return 0;
    if (x >= q3) return 2;
    return 1;
}

DoubleSortTable sort_group(const std::vector<const EventReturns*>& group) {
    DoubleSortTable tab;
    tab.n = group.size();
    for (auto& row : tab.cells) row.fill(kNaN);
    tab.high_minus_low.fill(kNaN);
    if (group.empty()) return tab;

    std::vector<double> r, v;
    for (const auto* s : group) {
        r.push_back(s->r_minus);
        v.push_back(s->v_minus);
    }
    std::sort(r.begin(), r.end());
    std::sort(v.begin(), v.end());
    double rq1 = quantile_sorted(r, 0.25), rq3 = quantile_sorted(r, 0.75);
    double vq1 = quantile_sorted(v, 0.25), vq3 = quantile_sorted(v, 0.75);

    std::array<std::array<double, 3>, 3> sums{};
    for (const auto* s : group) {
        int i = bucket(s->r_minus, rq1, rq3);
        int j = bucket(s->v_minus, vq1, vq3);
        sums[i][j] += s->r_plus;
        ++tab.counts[i][j];
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (tab.counts[i][j] > 0) {
                tab.cells[i][j] = sums[i][j] / static_cast<double>(tab.counts[i][j]);
            }
        }
        if (tab.counts[i][2] > 0 && tab.counts[i][0] > 0) {
            tab.high_minus_low[i] = tab.cells[i][2] - tab.cells[i][0];
        }
    }
    return tab;
}

}  // namespace

DoubleSortResult double_sort(const std::vector<EventReturns>& samples) {
    if (samples.size() < 30) throw std::invalid_argument("double_sort: need at least 30 samples");
    std::vector<const EventReturns*> neg, pos;
    for (const auto& s : samples) {
        if (!s.has_volume) throw std::invalid_argument("double_sort: all samples need volume");
        (s.r_minus < 0.0 ? neg : pos).push_back(&s);
    }
    DoubleSortResult res;
    res.negative = sort_group(neg);
    res.positive = sort_group(pos);
    return res;
}

}  // namespace driftburst

#include "driftburst/critval.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "driftburst/numeric.hpp"

namespace driftburst {

Ar1Fit fit_ar1(const TStatSeries& ts) {
    double sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 1; i < ts.t_values.size(); ++i) {
        if (!ts.t_values[i] || !ts.t_values[i - 1]) continue;
        double x = *ts.t_values[i - 1], y = *ts.t_values[i];
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 30) throw std::invalid_argument("fit_ar1: need >= 30 consecutive non-missing pairs");
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_ar1: degenerate (constant) regressor");
    return {std::clamp(sxy / sxx, -0.999, 0.999), n};
}

Ar1Fit fit_ar1(const std::vector<double>& values) {
    TStatSeries ts;
    ts.grid_times.resize(values.size());
    for (double v : values) ts.t_values.emplace_back(v);
    return fit_ar1(ts);
}

namespace {

std::vector<double> simulate_maxima(std::size_t m, double rho, std::size_t n_sims,
                                    std::size_t burn_in, std::uint64_t seed) {
    if (rho < 0.0 || rho >= 1.0) throw std::domain_error("critval: rho must be in [0, 1)");
    if (m == 0) throw std::invalid_argument("critval: m must be positive");
    std::vector<double> maxima(n_sims);
    const double innov = std::sqrt(1.0 - rho * rho);
    parallel_for(n_sims, [&](std::size_t r) {
        std::mt19937_64 rng(derive_seed(seed, r));
        std::normal_distribution<double> normal;
        double z = normal(rng);  // stationary start
        for (std::size_t i = 0; i < burn_in; ++i) z = rho * z + innov * normal(rng);
        double mx = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            z = rho * z + innov * normal(rng);
            mx = std::max(mx, std::abs(z));
        }
        maxima[r] = mx;
    });
    return maxima;
}

}  // namespace

QuantileRow simulate_max_quantiles(std::size_t m, double rho, const std::vector<double>& levels,
                                   std::size_t n_sims, std::size_t burn_in, std::uint64_t seed) {
    if (n_sims < 1000) throw std::invalid_argument("simulate_max_quantiles: n_sims must be >= 1000");
    std::vector<double> maxima = simulate_maxima(m, rho, n_sims, burn_in, seed);
    std::sort(maxima.begin(), maxima.end());

    double lm = std::log(static_cast<double>(m));
    double a_m = std::sqrt(2.0 * lm);
    double b_m = m > 1 ? a_m - 0.5 * std::log(M_PI * lm) / a_m : 0.0;

    QuantileRow row;
    row.levels = levels;
    for (double p : levels) {
        if (p <= 0.0 || p >= 1.0) throw std::domain_error("simulate_max_quantiles: level in (0,1)");
        double q = quantile_sorted(maxima, p);
        row.raw.push_back(q);
        row.normalized.push_back(m > 1 ? (q - b_m) * a_m : q);
        // se(q_p) = sqrt(p(1-p)/n) * q'(p), slope from a central difference.
        double delta = std::min({0.005, p / 2.0, (1.0 - p) / 2.0});
        double slope = (quantile_sorted(maxima, p + delta) - quantile_sorted(maxima, p - delta)) /
                       (2.0 * delta);
        row.std_errors.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(n_sims)) * slope);
    }
    return row;
}

CriticalValueTable build_critical_value_table(const CriticalValueConfig& cfg) {
    CriticalValueTable table;
    table.m_axis = cfg.m_axis;
    table.rho_axis = cfg.rho_axis;
    table.levels = cfg.levels;
    table.n_sims = cfg.n_sims;
    table.burn_in = cfg.burn_in;
    table.seed = cfg.seed;
    for (std::size_t im = 0; im < cfg.m_axis.size(); ++im) {
        table.raw.emplace_back();
        table.normalized.emplace_back();
        table.std_errors.emplace_back();
        for (double rho : cfg.rho_axis) {
            // The seed is shared across rho nodes: common random numbers keep
            // the quantiles smooth and monotone in rho.
            QuantileRow row = simulate_max_quantiles(cfg.m_axis[im], rho, cfg.levels, cfg.n_sims,
                                                     cfg.burn_in, cfg.seed);
            table.raw[im].push_back(row.raw);
            table.normalized[im].push_back(row.normalized);
            table.std_errors[im].push_back(row.std_errors);
        }
    }
    return table;
}

double critical_value(const CriticalValueTable& table, std::size_t m, double rho, double level) {
    auto il = std::find_if(table.levels.begin(), table.levels.end(),
                           [&](double l) { return std::abs(l - level) < 1e-12; });
    if (il == table.levels.end()) throw std::out_of_range("critical_value: level not in table");
    std::size_t lidx = static_cast<std::size_t>(il - table.levels.begin());

    if (m < table.m_axis.front() || m > table.m_axis.back()) {
        throw std::out_of_range("critical_value: m outside table hull");
    }
    if (rho < table.rho_axis.front() || rho > table.rho_axis.back()) {
        throw std::out_of_range("critical_value: rho outside table hull");
    }
    auto mi = std::upper_bound(table.m_axis.begin(), table.m_axis.end(), m);
    std::size_t i1 = std::min<std::size_t>(mi - table.m_axis.begin(), table.m_axis.size() - 1);
    std::size_t i0 = i1 == 0 ? 0 : i1 - 1;
    auto ri = std::upper_bound(table.rho_axis.begin(), table.rho_axis.end(), rho);
    std::size_t j1 = std::min<std::size_t>(ri - table.rho_axis.begin(), table.rho_axis.size() - 1);
    std::size_t j0 = j1 == 0 ? 0 : j1 - 1;

    double lm = std::log(static_cast<double>(m));
    double lm0 = std::log(static_cast<double>(table.m_axis[i0]));
    double lm1 = std::log(static_cast<double>(table.m_axis[i1]));
    double fx = (i0 == i1) ? 0.0 : (lm - lm0) / (lm1 - lm0);
    double r0 = table.rho_axis[j0], r1 = table.rho_axis[j1];
    double fy = (j0 == j1) ? 0.0 : (rho - r0) / (r1 - r0);

    double v00 = table.raw[i0][j0][lidx], v01 = table.raw[i0][j1][lidx];
    double v10 = table.raw[i1][j0][lidx], v11 = table.raw[i1][j1][lidx];
    return (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) + fx * ((1.0 - fy) * v10 + fy * v11);
}

std::string critical_value_table_to_json(const CriticalValueTable& table) {
    nlohmann::json j;
    j["version"] = table.version;
    j["n_sims"] = table.n_sims;
    j["burn_in"] = table.burn_in;
    j["seed"] = table.seed;
    j["m_axis"] = table.m_axis;
    j["rho_axis"] = table.rho_axis;
    j["levels"] = table.levels;
    j["raw"] = table.raw;
    j["normalized"] = table.normalized;
    j["std_errors"] = table.std_errors;
    return j.dump();
}

CriticalValueTable critical_value_table_from_json(const std::string& json) {
    nlohmann::json j = nlohmann::json::parse(json);
    CriticalValueTable table;
    if (j.at("version").get<std::string>() != CriticalValueTable::kVersion) {
        throw std::runtime_error("critical_value_table_from_json: version mismatch");
    }
    table.n_sims = j.at("n_sims").get<std::size_t>();
    table.burn_in = j.at("burn_in").get<std::size_t>();
    table.seed = j.at("seed").get<std::uint64_t>();
    table.m_axis = j.at("m_axis").get<std::vector<std::size_t>>();
    table.rho_axis = j.at("rho_axis").get<std::vector<double>>();
    table.levels = j.at("levels").get<std::vector<double>>();
    table.raw = j.at("raw").get<std::vector<std::vector<std::vector<double>>>>();
    table.normalized = j.at("normalized").get<std::vector<std::vector<std::vector<double>>>>();
    table.std_errors = j.at("std_errors").get<std::vector<std::vector<std::vector<double>>>>();
    return table;
}

double expected_false_positives(std::size_t m, double rho, double threshold,
                                std::size_t min_separation_points, std::size_t n_sims,
                                std::uint64_t seed) {
    if (threshold <= 0.0) throw std::invalid_argument("expected_false_positives: threshold > 0");
    if (rho < 0.0 || rho >= 1.0) throw std::domain_error("expected_false_positives: rho in [0, 1)");
    std::vector<double> counts(n_sims);
    const double innov = std::sqrt(1.0 - rho * rho);
    parallel_for(n_sims, [&](std::size_t r) {
        std::mt19937_64 rng(derive_seed(seed, r));
        std::normal_distribution<double> normal;
        std::vector<double> z(m);
        double zi = normal(rng);
        for (std::size_t i = 0; i < m; ++i) {
            zi = rho * zi + innov * normal(rng);
            z[i] = zi;
        }
        // Same extremum and greedy-separation rules as the detector.
        struct Peak {
            std::size_t idx;
            double v;
        };
        std::vector<Peak> peaks;
        for (std::size_t i = 1; i + 1 < m; ++i) {
            double cur = std::abs(z[i]);
            if (cur >= threshold && cur > std::abs(z[i - 1]) && cur >= std::abs(z[i + 1])) {
                peaks.push_back({i, cur});
            }
        }
        std::stable_sort(peaks.begin(), peaks.end(),
                         [](const Peak& a, const Peak& b) { return a.v > b.v; });
        std::vector<std::size_t> kept;
        for (const auto& p : peaks) {
            bool clash = false;
            for (std::size_t k : kept) {
                std::size_t d = p.idx > k ? p.idx - k : k - p.idx;
                if (d < min_separation_points) {
                    clash = true;
                    break;
                }
            }
            if (!clash) kept.push_back(p.idx);
        }
        counts[r] = static_cast<double>(kept.size());
    });
    return mean(counts);
}

}  // namespace driftburst

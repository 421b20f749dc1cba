#include "driftburst/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace driftburst {

namespace {

int default_lags(const DetectorConfig& cfg, std::span<const double> raw_increments) {
    int base = cfg.lags.base_add >= 0 ? cfg.lags.base_add : 2 * (cfg.preavg_window - 1);
    if (cfg.lags.mode == LagPolicy::Mode::Fixed) return std::max(cfg.lags.fixed_lags, 0);
    if (raw_increments.size() < 50) return base;
    return auto_lag(raw_increments) + base;
}

struct TStatPoint {
    double t_value;
    double mu;
    double lrv;
};

// Core evaluation shared by tstat_at and tstat_grid. lrv holds the HAC
// long-run variance in noise-robust mode and the squared raw spot
// volatility otherwise.
std::optional<TStatPoint> eval_point(const PreparedSeries& prep, double t,
                                     const DetectorConfig& cfg) {
    const double h = cfg.mean_bandwidth_s;
    const double hp = cfg.var_bandwidth_s;
    if (h <= 0.0 || hp <= 0.0) throw std::invalid_argument("detector: bandwidths must be positive");
    try {
        if (cfg.noise_robust) {
            double mu = spot_drift(prep.pa_times, prep.pa_increments, t, h, cfg.kernel);
            double lrv = spot_lrv(prep.pa_times, prep.pa_increments, t, hp, cfg.kernel, prep.lags);
            if (lrv < cfg.lrv_floor) return TStatPoint{std::nan(""), mu, lrv};
            return TStatPoint{std::sqrt(h) * mu / std::sqrt(lrv), mu, lrv};
        }
        double mu = spot_drift(prep.raw_times, prep.raw_increments, t, h, cfg.kernel);
        double sigma = spot_variance_raw(prep.raw_times, prep.raw_increments, t, hp, cfg.kernel);
        double lrv = sigma * sigma;
        if (lrv < cfg.lrv_floor) return TStatPoint{std::nan(""), mu, lrv};
        return TStatPoint{std::sqrt(h / kernel_K2(cfg.kernel)) * mu / sigma, mu, lrv};
    } catch (const EmptyWindow&) {
        return std::nullopt;
    }
}

}  // namespace

std::size_t TStatSeries::n_present() const {
    std::size_t n = 0;
    for (const auto& v : t_values) n += v.has_value() ? 1 : 0;
    return n;
}

PreparedSeries prepare_series(const TickSeries& series, const DetectorConfig& cfg) {
    if (series.times.size() != series.log_prices.size()) {
        throw std::invalid_argument("prepare_series: times/log_prices size mismatch");
    }
    if (series.times.size() < 2) throw std::invalid_argument("prepare_series: need >= 2 ticks");
    for (std::size_t i = 1; i < series.times.size(); ++i) {
        if (!(series.times[i] > series.times[i - 1])) {
            throw std::invalid_argument("prepare_series: timestamps must be strictly increasing");
        }
    }
    PreparedSeries prep;
    const std::size_t n = series.times.size() - 1;
    prep.raw_times.resize(n);
    prep.raw_increments.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        prep.raw_times[i] = series.times[i];
        prep.raw_increments[i] = series.log_prices[i + 1] - series.log_prices[i];
    }
    const int k = cfg.preavg_window;
    if (cfg.noise_robust && k > 1) {
        if (prep.raw_increments.size() < static_cast<std::size_t>(k)) {
            throw std::invalid_argument("prepare_series: series shorter than pre-averaging window");
        }
        prep.pa_increments = preaverage(prep.raw_increments, {k, PreAvgWeight::MinTriangle});
        prep.pa_times.assign(prep.raw_times.begin(),
                             prep.raw_times.begin() + prep.pa_increments.size());
    } else {
        prep.pa_times = prep.raw_times;
        prep.pa_increments = prep.raw_increments;
    }
    prep.lags = cfg.noise_robust ? default_lags(cfg, prep.raw_increments) : 0;
    return prep;
}

std::optional<double> tstat_at(const PreparedSeries& prep, double t, const DetectorConfig& cfg) {
    auto p = eval_point(prep, t, cfg);
    if (!p || std::isnan(p->t_value)) return std::nullopt;
    return p->t_value;
}

std::optional<double> tstat_at(const TickSeries& series, double t, const DetectorConfig& cfg) {
    return tstat_at(prepare_series(series, cfg), t, cfg);
}

TStatSeries tstat_grid(const TickSeries& series, double grid_spacing_s,
                       const DetectorConfig& cfg) {
    if (grid_spacing_s <= 0.0) throw std::invalid_argument("tstat_grid: grid spacing must be positive");
    if (series.times.empty()) throw std::invalid_argument("tstat_grid: empty series");
    PreparedSeries prep = prepare_series(series, cfg);

    const double t0 = series.times.front();
    const double t_end = series.times.back();
    const double burn_in = cfg.burn_in_s >= 0.0 ? cfg.burn_in_s : cfg.var_bandwidth_s;
    const double lookback = cfg.revision_lookback_s > 0.0 ? cfg.revision_lookback_s : grid_spacing_s;

    TStatSeries out;
    out.config_snapshot = cfg;
    const double eps = 1e-9 * std::max(1.0, std::abs(t_end));
    for (std::size_t i = 1;; ++i) {
        double t = t0 + static_cast<double>(i) * grid_spacing_s;
        if (t > t_end + eps) break;
        out.grid_times.push_back(t);
        out.t_values.emplace_back();
        out.mu_hats.emplace_back();
        out.lrv_hats.emplace_back();
        if (t < t0 + burn_in - eps) continue;
        // Require a price update in the preceding lookback interval.
        auto lo = std::upper_bound(series.times.begin(), series.times.end(), t - lookback - eps);
        auto hi = std::upper_bound(lo, series.times.end(), t + eps);
        if (lo == hi) continue;
        auto p = eval_point(prep, t, cfg);
        if (!p) continue;
        out.mu_hats.back() = p->mu;
        out.lrv_hats.back() = p->lrv;
        if (!std::isnan(p->t_value)) out.t_values.back() = p->t_value;
    }
    return out;
}

MaxStat max_stat(const TStatSeries& ts) {
    MaxStat out;
    for (const auto& v : ts.t_values) {
        if (!v) continue;
        ++out.m;
        out.t_star = std::max(out.t_star, std::abs(*v));
    }
    if (out.m < 2) throw EmptyWindow{};
    double lm = std::log(static_cast<double>(out.m));
    out.a_m = std::sqrt(2.0 * lm);
    out.b_m = out.a_m - 0.5 * std::log(M_PI * lm) / out.a_m;
    out.normalized = (out.t_star - out.b_m) * out.a_m;
    return out;
}

std::vector<BurstEvent> extract_events(const TStatSeries& ts, double threshold,
                                       double min_separation_s) {
    if (threshold <= 0.0) throw std::invalid_argument("extract_events: threshold must be positive");
    struct Candidate {
        double time;
        double t;
    };
    std::vector<Candidate> cands;
    const auto& tv = ts.t_values;
    for (std::size_t i = 1; i + 1 < tv.size(); ++i) {
        if (!tv[i] || !tv[i - 1] || !tv[i + 1]) continue;
        double cur = std::abs(*tv[i]);
        if (cur < threshold) continue;
        // Strict rise from the left, non-strict to the right: the earliest
        // point of a plateau qualifies.
        if (cur > std::abs(*tv[i - 1]) && cur >= std::abs(*tv[i + 1])) {
            cands.push_back({ts.grid_times[i], *tv[i]});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (std::abs(a.t) != std::abs(b.t)) return std::abs(a.t) > std::abs(b.t);
        return a.time < b.time;
    });
    std::vector<BurstEvent> events;
    for (const auto& c : cands) {
        bool clash = false;
        for (const auto& e : events) {
            if (std::abs(e.peak_time - c.time) < min_separation_s) {
                clash = true;
                break;
            }
        }
        if (clash) continue;
        events.push_back({c.time, c.t, c.t >= 0.0 ? 1 : -1, threshold});
    }
    std::sort(events.begin(), events.end(),
              [](const BurstEvent& a, const BurstEvent& b) { return a.peak_time < b.peak_time; });
    return events;
}

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

std::string tstat_series_to_csv(const TStatSeries& ts) {
    std::ostringstream os;
    os << "time,t,mu_hat,lrv_hat\n";
    for (std::size_t i = 0; i < ts.grid_times.size(); ++i) {
        os << fmt17(ts.grid_times[i]) << ',';
        if (ts.t_values[i]) os << fmt17(*ts.t_values[i]);
        os << ',';
        if (ts.mu_hats[i]) os << fmt17(*ts.mu_hats[i]);
        os << ',';
        if (ts.lrv_hats[i]) os << fmt17(*ts.lrv_hats[i]);
        os << '\n';
    }
    return os.str();
}

TStatSeries tstat_series_from_csv(const std::string& csv) {
    TStatSeries out;
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line) || line.rfind("time,t,mu_hat,lrv_hat", 0) != 0) {
        throw std::invalid_argument("tstat_series_from_csv: bad header");
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<std::string, 4> fields;
        std::size_t start = 0;
        for (int f = 0; f < 4; ++f) {
            std::size_t pos = f < 3 ? line.find(',', start) : line.size();
            if (pos == std::string::npos) throw std::invalid_argument("tstat_series_from_csv: bad row");
            fields[f] = line.substr(start, pos - start);
            start = pos + 1;
        }
        out.grid_times.push_back(std::stod(fields[0]));
        auto parse_opt = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        out.t_values.push_back(parse_opt(fields[1]));
        out.mu_hats.push_back(parse_opt(fields[2]));
        out.lrv_hats.push_back(parse_opt(fields[3]));
    }
    return out;
}

namespace {

nlohmann::json opt_array(const std::vector<std::optional<double>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& x : v) {
        if (x) arr.push_back(*x);
        else arr.push_back(nullptr);
    }
    return arr;
}

std::vector<std::optional<double>> opt_from_json(const nlohmann::json& arr) {
    std::vector<std::optional<double>> out;
    for (const auto& x : arr) {
        if (x.is_null()) out.emplace_back();
        else out.emplace_back(x.get<double>());
    }
    return out;
}

}  // namespace

std::string tstat_series_to_json(const TStatSeries& ts) {
    nlohmann::json j;
    j["grid_times"] = ts.grid_times;
    j["t"] = opt_array(ts.t_values);
    j["mu_hat"] = opt_array(ts.mu_hats);
    j["lrv_hat"] = opt_array(ts.lrv_hats);
    const auto& c = ts.config_snapshot;
    j["config"] = {{"mean_bandwidth_s", c.mean_bandwidth_s},
                   {"var_bandwidth_s", c.var_bandwidth_s},
                   {"preavg_window", c.preavg_window},
                   {"grid_spacing_s", c.grid_spacing_s},
                   {"burn_in_s", c.burn_in_s},
                   {"noise_robust", c.noise_robust},
                   {"truncation_radius", c.kernel.truncation_radius}};
    return j.dump();
}

TStatSeries tstat_series_from_json(const std::string& json) {
    nlohmann::json j = nlohmann::json::parse(json);
    TStatSeries out;
    out.grid_times = j.at("grid_times").get<std::vector<double>>();
    out.t_values = opt_from_json(j.at("t"));
    out.mu_hats = opt_from_json(j.at("mu_hat"));
    out.lrv_hats = opt_from_json(j.at("lrv_hat"));
    const auto& c = j.at("config");
    out.config_snapshot.mean_bandwidth_s = c.at("mean_bandwidth_s").get<double>();
    out.config_snapshot.var_bandwidth_s = c.at("var_bandwidth_s").get<double>();
    out.config_snapshot.preavg_window = c.at("preavg_window").get<int>();
    out.config_snapshot.grid_spacing_s = c.at("grid_spacing_s").get<double>();
    out.config_snapshot.burn_in_s = c.at("burn_in_s").get<double>();
    out.config_snapshot.noise_robust = c.at("noise_robust").get<bool>();
    out.config_snapshot.kernel.truncation_radius = c.at("truncation_radius").get<double>();
    return out;
}

}  // namespace driftburst

#include "driftburst/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "driftburst/numeric.hpp"

namespace driftburst {

namespace {

using nlohmann::json;

TickSeries restrict_session(const TickSeries& series, double start_s, double end_s) {
    if (end_s < 0.0 && start_s <= 0.0) return series;
    TickSeries out;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        double t = series.times[i];
        if (t < start_s) continue;
        if (end_s >= 0.0 && t > end_s) break;
        out.times.push_back(t);
        out.log_prices.push_back(series.log_prices[i]);
    }
    return out;
}

double clamp_to_axis(double rho, const std::vector<double>& axis) {
    return std::clamp(rho, axis.front(), axis.back());
}

}  // namespace

DetectReport run_detect(const RunConfig& cfg, const TickSeries& series,
                        const CriticalValueTable* table) {
    TickSeries windowed = restrict_session(series, cfg.session_start_s, cfg.session_end_s);
    if (windowed.times.size() < 2) {
        throw std::invalid_argument("run_detect: fewer than two observations in session window");
    }

    DetectReport report;
    report.tstats = tstat_grid(windowed, cfg.detector.grid_spacing_s, cfg.detector);
    report.max = max_stat(report.tstats);

    std::vector<double> present;
    present.reserve(report.max.m);
    for (const auto& tv : report.tstats.t_values) {
        if (tv) present.push_back(*tv);
    }
    report.t_std = present.size() >= 2 ? stddev(present) : 0.0;
    report.t_kurtosis = present.size() >= 4 ? excess_kurtosis(present) + 3.0 : 0.0;

    if (cfg.threshold.mode == ThresholdSpec::Mode::Fixed) {
        report.threshold = cfg.threshold.fixed;
        try {
            report.rho_hat = fit_ar1(report.tstats).rho_hat;
        } catch (const std::exception&) {
            report.rho_hat = 0.0;  // diagnostic only in fixed mode
        }
    } else {
        if (table == nullptr) {
            throw std::invalid_argument("run_detect: critical-value threshold needs a table");
        }
        report.rho_hat = fit_ar1(report.tstats).rho_hat;
        double rho = clamp_to_axis(report.rho_hat, table->rho_axis);
        report.threshold = critical_value(*table, report.max.m, rho, cfg.threshold.level);
    }
    report.events = extract_events(report.tstats, report.threshold, cfg.min_event_separation_s);
    return report;
}

std::string events_to_csv(const std::vector<BurstEvent>& events) {
    std::ostringstream os;
    os.precision(17);
    os << "peak_time,peak_t,sign,threshold\n";
    for (const auto& e : events) {
        os << e.peak_time << ',' << e.peak_t << ',' << e.sign << ',' << e.threshold_used << '\n';
    }
    return os.str();
}

std::vector<BurstEvent> events_from_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("events_from_csv: empty input");
    std::vector<BurstEvent> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        BurstEvent e;
        char c1, c2, c3;
        if (!(ls >> e.peak_time >> c1 >> e.peak_t >> c2 >> e.sign >> c3 >> e.threshold_used) ||
            c1 != ',' || c2 != ',' || c3 != ',') {
            throw std::invalid_argument("events_from_csv: malformed line: " + line);
        }
        out.push_back(e);
    }
    return out;
}

std::string DetectReport::events_to_csv() const { return driftburst::events_to_csv(events); }

std::string DetectReport::to_json() const {
    json j;
    j["threshold"] = threshold;
    j["rho_hat"] = rho_hat;
    j["t_std"] = t_std;
    j["t_kurtosis"] = t_kurtosis;
    j["max"] = {{"m", max.m},
                {"t_star", max.t_star},
                {"a_m", max.a_m},
                {"b_m", max.b_m},
                {"normalized", max.normalized}};
    j["events"] = json::array();
    for (const auto& e : events) {
        j["events"].push_back({{"peak_time", e.peak_time},
                               {"peak_t", e.peak_t},
                               {"sign", e.sign},
                               {"threshold", e.threshold_used}});
    }
    j["tstats"] = json::parse(tstat_series_to_json(tstats));
    return j.dump(2);
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                          const CriticalValueTable& table) {
    if (cfg.replications < 100) {
        throw std::invalid_argument("run_experiment: need at least 100 replications");
    }
    if (cfg.cells.empty()) throw std::invalid_argument("run_experiment: no cells");
    for (double lvl : cfg.levels) {
        bool found = false;
        for (double tl : table.levels) found = found || std::abs(tl - lvl) < 1e-12;
        if (!found) throw std::invalid_argument("run_experiment: level missing from table");
    }

    std::vector<ExperimentRow> rows;
    std::uint64_t cell_stream = 0;
    for (const auto& cell : cfg.cells) {
        for (double h : cfg.mean_bandwidths_s) {
            ++cell_stream;
            const int reps = cfg.replications;
            std::vector<double> tstars(reps), rhos(reps);
            std::vector<std::size_t> ms(reps);
            const std::uint64_t cell_seed = derive_seed(cfg.seed, cell_stream);

            parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
                ScenarioSpec sc = cfg.base;
                sc.seed = derive_seed(cell_seed, r);
                sc.with_burst = cell.with_burst;
                if (cell.with_burst) {
                    sc.burst.a = cfg.burst_a;
                    sc.burst.alpha = cell.alpha;
                    sc.burst.b = cfg.burst_b;
                    sc.burst.beta = cell.beta;
                }
                DayPath day = simulate_day(sc);
                TickSeries series{day.times, day.noisy};

                DetectorConfig det;
                det.mean_bandwidth_s = h;
                det.var_bandwidth_s = 5.0 * h;
                det.grid_spacing_s = cfg.grid_spacing_s;
                det.burn_in_s = cfg.burn_in_s;
                TStatSeries ts = tstat_grid(series, det.grid_spacing_s, det);
                MaxStat ms_r = max_stat(ts);
                tstars[r] = ms_r.t_star;
                ms[r] = ms_r.m;
                rhos[r] = std::clamp(fit_ar1(ts).rho_hat, table.rho_axis.front(),
                                     table.rho_axis.back());
            });

            ExperimentRow row;
            row.cell = cell;
            row.mean_bandwidth_s = h;
            row.replications = reps;
            row.levels = cfg.levels;
            row.rejection_rates.assign(cfg.levels.size(), 0.0);
            for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
                int rejected = 0;
                for (int r = 0; r < reps; ++r) {
                    double q = critical_value(table, ms[r], rhos[r], cfg.levels[li]);
                    if (tstars[r] > q) ++rejected;
                }
                row.rejection_rates[li] = static_cast<double>(rejected) / reps;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string experiment_to_csv(const std::vector<ExperimentRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "with_burst,alpha,beta,bandwidth_s,level,replications,rejection_rate\n";
    for (const auto& row : rows) {
        for (std::size_t li = 0; li < row.levels.size(); ++li) {
            os << (row.cell.with_burst ? 1 : 0) << ',' << row.cell.alpha << ',' << row.cell.beta
               << ',' << row.mean_bandwidth_s << ',' << row.levels[li] << ',' << row.replications
               << ',' << row.rejection_rates[li] << '\n';
        }
    }
    return os.str();
}

}  // namespace driftburst

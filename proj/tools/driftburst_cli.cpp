// driftburst: command-line front end for the burst detection toolkit.
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftburst/analysis.hpp"
#include "driftburst/critval.hpp"
#include "driftburst/detector.hpp"
#include "driftburst/ingest.hpp"
#include "driftburst/parametric.hpp"
#include "driftburst/pipeline.hpp"
#include "driftburst/simulator.hpp"

namespace db = driftburst;

namespace {

constexpr const char* kVersion = "driftburst 1.0.0";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

struct DetectorFlags {
    double mean_bandwidth = 300.0;
    double var_bandwidth = -1.0;  // <0: 5x mean
    int preavg = 3;
    double grid = 5.0;
    double burn_in = -1.0;
    double lookback = -1.0;
    int fixed_lags = -1;  // <0: automatic
    bool noise_free = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mean-bandwidth", mean_bandwidth, "Drift bandwidth h in seconds");
        cmd->add_option("--var-bandwidth", var_bandwidth,
                        "Variance bandwidth in seconds (default 5x mean)");
        cmd->add_option("--preavg", preavg, "Pre-averaging window k");
        cmd->add_option("--grid", grid, "Grid spacing in seconds");
        cmd->add_option("--burn-in", burn_in,
                        "Burn-in before the first grid point (default: one variance bandwidth)");
        cmd->add_option("--lookback", lookback,
                        "Required price-update lookback per grid point (default: grid spacing)");
        cmd->add_option("--lags", fixed_lags, "Fixed HAC lag count (default: automatic)");
        cmd->add_flag("--noise-free", noise_free,
                      "Raw-increment statistic without pre-averaging or HAC correction");
    }

    db::DetectorConfig build() const {
        db::DetectorConfig cfg;
        cfg.mean_bandwidth_s = mean_bandwidth;
        cfg.var_bandwidth_s = var_bandwidth < 0.0 ? 5.0 * mean_bandwidth : var_bandwidth;
        cfg.preavg_window = preavg;
        cfg.grid_spacing_s = grid;
        cfg.burn_in_s = burn_in;
        cfg.revision_lookback_s = lookback;
        cfg.noise_robust = !noise_free;
        if (noise_free) cfg.preavg_window = 1;
        if (fixed_lags >= 0) {
            cfg.lags.mode = db::LagPolicy::Mode::Fixed;
            cfg.lags.fixed_lags = fixed_lags;
        }
        return cfg;
    }
};

int cmd_simulate(const std::string& scenario_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_path) {
    db::ScenarioSpec spec =
        scenario_path.empty() ? db::ScenarioSpec{} : db::scenario_from_file(scenario_path);
    if (seed_set) spec.seed = seed;
    db::DayPath day = db::simulate_day(spec);
    db::save_ticks(out_path, db::day_to_ticks(day));
    std::cout << "wrote " << day.times.size() << " ticks to " << out_path << "\n";
    return 0;
}

int cmd_detect(const std::string& ticks_path, const DetectorFlags& flags, double threshold,
               double level, bool level_set, const std::string& table_path,
               const std::string& report_path, const std::string& tstats_path,
               const std::string& events_path) {
    db::LoadedTicks loaded = db::load_ticks(ticks_path);
    if (loaded.malformed_rows > 0) {
        std::cerr << "warning: skipped " << loaded.malformed_rows << " malformed rows\n";
    }
    if (loaded.records.empty()) throw std::invalid_argument("no ticks in " + ticks_path);
    db::TickSeries series = db::build_midquote(loaded.records);

    db::RunConfig cfg;
    cfg.detector = flags.build();
    db::CriticalValueTable table;
    const db::CriticalValueTable* table_ptr = nullptr;
    if (level_set) {
        if (table_path.empty()) {
            throw std::invalid_argument("--level needs --table with simulated critical values");
        }
        table = db::critical_value_table_from_json(slurp(table_path));
        table_ptr = &table;
        cfg.threshold.mode = db::ThresholdSpec::Mode::CriticalValue;
        cfg.threshold.level = level;
    } else {
        cfg.threshold.fixed = threshold;
    }

    db::DetectReport report = db::run_detect(cfg, series, table_ptr);
    if (!report_path.empty()) spill(report_path, report.to_json());
    if (!tstats_path.empty()) spill(tstats_path, db::tstat_series_to_csv(report.tstats));
    if (!events_path.empty()) spill(events_path, report.events_to_csv());
    std::cout << "grid points: " << report.max.m << "  max |t|: " << report.max.t_star
              << "  threshold: " << report.threshold << "  events: " << report.events.size()
              << "\n";
    for (const auto& e : report.events) {
        std::cout << "event t=" << e.peak_time << "s  T=" << e.peak_t << "  sign=" << e.sign
                  << "\n";
    }
    return 0;
}

int cmd_crit_build(const db::CriticalValueConfig& cfg, const std::string& out_path) {
    db::CriticalValueTable table = db::build_critical_value_table(cfg);
    spill(out_path, db::critical_value_table_to_json(table));
    std::cout << "wrote " << cfg.m_axis.size() << "x" << cfg.rho_axis.size() << "x"
              << cfg.levels.size() << " table to " << out_path << "\n";
    return 0;
}

int cmd_crit_query(const std::string& table_path, std::size_t m, double rho, double level) {
    db::CriticalValueTable table = db::critical_value_table_from_json(slurp(table_path));
    std::printf("%.10g\n", db::critical_value(table, m, rho, level));
    return 0;
}

int cmd_experiment(const db::ExperimentConfig& cfg, const std::string& table_path,
                   const std::string& out_path) {
    db::CriticalValueTable table = db::critical_value_table_from_json(slurp(table_path));
    std::vector<db::ExperimentRow> rows = db::run_experiment(cfg, table);
    std::string csv = db::experiment_to_csv(rows);
    if (!out_path.empty()) {
        spill(out_path, csv);
    } else {
        std::cout << csv;
    }
    return 0;
}

int cmd_fit_db(const std::string& ticks_path, double t_end, double window_s) {
    db::LoadedTicks loaded = db::load_ticks(ticks_path);
    db::TickSeries series = db::build_midquote(loaded.records);
    std::vector<double> times, increments;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        double t = series.times[i];
        if (t >= t_end - window_s && t < t_end) {
            times.push_back(t);
            if (times.size() > 1) {
                increments.push_back(series.log_prices[i] - series.log_prices[i - 1]);
            }
        }
    }
    db::ParamFit fit = db::fit_mle(times, increments, t_end);
    std::cout << fit.to_json() << "\n";
    return 0;
}

int cmd_events(const std::string& ticks_path, const std::string& events_path, double horizon,
               const std::string& volumes_path, const std::string& out_path) {
    db::LoadedTicks loaded = db::load_ticks(ticks_path);
    db::TickSeries series = db::build_midquote(loaded.records);
    std::vector<db::BurstEvent> events = db::events_from_csv(slurp(events_path));
    std::vector<db::EventReturns> samples = db::event_returns(series, events, horizon);

    if (!volumes_path.empty()) {
        // One normalized volume per line, aligned with the computed samples.
        std::istringstream vs(slurp(volumes_path));
        std::string line;
        std::size_t i = 0;
        while (std::getline(vs, line) && i < samples.size()) {
            if (line.empty()) continue;
            samples[i].v_minus = std::stod(line);
            samples[i].has_volume = true;
            ++i;
        }
    }

    std::ostringstream os;
    os.precision(17);
    os << "peak_time,sign,r_minus,r_plus,v_minus\n";
    for (const auto& s : samples) {
        os << s.peak_time << ',' << s.sign << ',' << s.r_minus << ',' << s.r_plus << ',';
        if (s.has_volume) os << s.v_minus;
        os << '\n';
    }
    if (!out_path.empty()) spill(out_path, os.str());

    if (samples.size() >= 10) {
        db::RegressionResult rev = db::reversion_regression(samples);
        std::cout << "reversion: a=" << rev.coefficients[0] << " b=" << rev.coefficients[1]
                  << " t(b)=" << rev.t_statistics[1] << " R2=" << rev.r_squared
                  << " reversal_fraction=" << rev.reversal_fraction << " n=" << rev.n << "\n";
        bool all_volume = !samples.empty();
        for (const auto& s : samples) all_volume = all_volume && s.has_volume;
        if (all_volume && samples.size() >= 20) {
            db::RegressionResult cgw = db::cgw_regression(samples);
            std::cout << "cgw: a=" << cgw.coefficients[0] << " b=" << cgw.coefficients[1]
                      << " c=" << cgw.coefficients[2] << " t(c)=" << cgw.t_statistics[2] << "\n";
            if (samples.size() >= 30) {
                db::DoubleSortResult ds = db::double_sort(samples);
                auto dump = [](const char* name, const db::DoubleSortTable& t) {
                    std::cout << name << " (n=" << t.n << "):\n";
                    for (int i = 0; i < 3; ++i) {
                        for (int j = 0; j < 3; ++j) std::cout << '\t' << t.cells[i][j];
                        std::cout << "\thigh-low " << t.high_minus_low[i] << "\n";
                    }
                };
                dump("negative bursts", ds.negative);
                dump("positive bursts", ds.positive);
            }
        }
    } else {
        std::cout << "computed " << samples.size() << " event returns (too few for regression)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drift burst detection toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a session and write tick CSV");
    std::string sim_scenario, sim_out = "ticks.csv";
    std::uint64_t sim_seed = 1;
    sim->add_option("--scenario", sim_scenario, "Scenario key=value file");
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "RNG seed override");
    sim->add_option("--out", sim_out, "Output tick CSV path");

    // detect
    auto* det = app.add_subcommand("detect", "Run the detector on a tick CSV");
    std::string det_ticks, det_table, det_report, det_tstats, det_events;
    double det_threshold = 4.5, det_level = 0.95;
    DetectorFlags det_flags;
    det->add_option("--ticks", det_ticks, "Input tick CSV")->required();
    det->add_option("--threshold", det_threshold, "Fixed |t| threshold");
    auto* det_level_opt =
        det->add_option("--level", det_level, "Confidence level (uses --table instead of --threshold)");
    det->add_option("--table", det_table, "Critical-value table JSON");
    det->add_option("--report", det_report, "Report JSON output path");
    det->add_option("--tstats", det_tstats, "t-statistic CSV output path");
    det->add_option("--events", det_events, "Events CSV output path");
    det_flags.attach(det);

    // crit
    auto* crit = app.add_subcommand("crit", "Build or query critical-value tables");
    auto* crit_build = crit->add_subcommand("build", "Simulate a table");
    db::CriticalValueConfig crit_cfg;
    std::string crit_out = "critval.json";
    crit_build->add_option("--m-axis", crit_cfg.m_axis, "Grid sizes m");
    crit_build->add_option("--rho-axis", crit_cfg.rho_axis, "AR(1) coefficients");
    crit_build->add_option("--levels", crit_cfg.levels, "Confidence levels");
    crit_build->add_option("--n-sims", crit_cfg.n_sims, "Monte Carlo replications per cell");
    crit_build->add_option("--seed", crit_cfg.seed, "RNG seed");
    crit_build->add_option("--out", crit_out, "Output JSON path");
    auto* crit_query = crit->add_subcommand("query", "Interpolate a critical value");
    std::string critq_table;
    std::size_t critq_m = 341;
    double critq_rho = 0.0, critq_level = 0.95;
    crit_query->add_option("--table", critq_table, "Table JSON")->required();
    crit_query->add_option("--m", critq_m, "Number of grid evaluations");
    crit_query->add_option("--rho", critq_rho, "Fitted AR(1) coefficient");
    crit_query->add_option("--level", critq_level, "Confidence level");
    crit->require_subcommand(1);

    // experiment
    auto* exp = app.add_subcommand("experiment", "Size/power study on simulated sessions");
    db::ExperimentConfig exp_cfg;
    std::string exp_table, exp_out, exp_scenario;
    std::vector<std::string> exp_cells;
    exp->add_option("--table", exp_table, "Critical-value table JSON")->required();
    exp->add_option("--cell", exp_cells,
                    "Cell spec: 'size' or 'alpha:beta' (repeatable)")
        ->required();
    exp->add_option("--scenario", exp_scenario, "Base scenario key=value file");
    exp->add_option("--a", exp_cfg.burst_a, "Drift burst magnitude");
    exp->add_option("--b", exp_cfg.burst_b, "Volatility burst magnitude");
    exp->add_option("--bandwidths", exp_cfg.mean_bandwidths_s, "Drift bandwidths in seconds");
    exp->add_option("--levels", exp_cfg.levels, "Confidence levels");
    exp->add_option("--reps", exp_cfg.replications, "Replications per cell");
    exp->add_option("--seed", exp_cfg.seed, "Master seed");
    exp->add_option("--grid", exp_cfg.grid_spacing_s, "Grid spacing in seconds");
    exp->add_option("--burn-in", exp_cfg.burn_in_s, "Burn-in in seconds");
    exp->add_option("--out", exp_out, "Output CSV path (default stdout)");

    // fit-db
    auto* fit = app.add_subcommand("fit-db", "Parametric MLE and LR tests on an event window");
    std::string fit_ticks;
    double fit_t_end = 0.0, fit_window = 1800.0;
    fit->add_option("--ticks", fit_ticks, "Input tick CSV")->required();
    fit->add_option("--t-end", fit_t_end, "Explosion time T in seconds")->required();
    fit->add_option("--window", fit_window, "Window length before T in seconds");

    // events
    auto* evc = app.add_subcommand("events", "Post-detection return analytics");
    std::string ev_ticks, ev_events, ev_volumes, ev_out;
    double ev_horizon = 300.0;
    evc->add_option("--ticks", ev_ticks, "Input tick CSV")->required();
    evc->add_option("--events", ev_events, "Events CSV from detect")->required();
    evc->add_option("--horizon", ev_horizon, "Return horizon in seconds");
    evc->add_option("--volumes", ev_volumes, "Optional normalized volumes, one per line");
    evc->add_option("--out", ev_out, "Event returns CSV output path");

    auto* ver = app.add_subcommand("version", "Print version");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ver->parsed()) {
            std::cout << kVersion << "\n";
            return 0;
        }
        if (sim->parsed()) return cmd_simulate(sim_scenario, sim_seed, !sim_seed_opt->empty(), sim_out);
        if (det->parsed()) {
            return cmd_detect(det_ticks, det_flags, det_threshold, det_level,
                              !det_level_opt->empty(), det_table, det_report, det_tstats,
                              det_events);
        }
        if (crit->parsed()) {
            if (crit_build->parsed()) return cmd_crit_build(crit_cfg, crit_out);
            return cmd_crit_query(critq_table, critq_m, critq_rho, critq_level);
        }
        if (exp->parsed()) {
            if (!exp_scenario.empty()) exp_cfg.base = db::scenario_from_file(exp_scenario);
            for (const auto& spec : exp_cells) {
                db::ExperimentCell cell;
                if (spec != "size") {
                    auto colon = spec.find(':');
                    if (colon == std::string::npos) {
                        throw std::invalid_argument("--cell expects 'size' or 'alpha:beta': " + spec);
                    }
                    cell.with_burst = true;
                    cell.alpha = std::stod(spec.substr(0, colon));
                    cell.beta = std::stod(spec.substr(colon + 1));
                }
                exp_cfg.cells.push_back(cell);
            }
            return cmd_experiment(exp_cfg, exp_table, exp_out);
        }
        if (fit->parsed()) return cmd_fit_db(fit_ticks, fit_t_end, fit_window);
        if (evc->parsed()) return cmd_events(ev_ticks, ev_events, ev_horizon, ev_volumes, ev_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

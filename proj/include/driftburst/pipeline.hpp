#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftburst/critval.hpp"
#include "driftburst/detector.hpp"
#include "driftburst/simulator.hpp"

namespace driftburst {

struct ThresholdSpec {
    enum class Mode { Fixed, CriticalValue };
    Mode mode = Mode::Fixed;
    double fixed = 4.5;
    double level = 0.95;  // used in CriticalValue mode
};

struct RunConfig {
    DetectorConfig detector;
    // Restrict processing to [session_start_s, session_end_s]; negative end
    // means the full data span.
    double session_start_s = 0.0;
    double session_end_s = -1.0;
    ThresholdSpec threshold;
    double min_event_separation_s = 300.0;
};

struct DetectReport {
    TStatSeries tstats;
    std::vector<BurstEvent> events;
    MaxStat max;
    double threshold = 0.0;
    double rho_hat = 0.0;         // AR(1) fit of the t-series
    double t_std = 0.0;           // std of the non-missing t-values
    double t_kurtosis = 0.0;      // plain kurtosis (normal = 3)

    std::string to_json() const;
    std::string events_to_csv() const;
};

// Full detection pipeline on a prepared mid-quote series. The critical-value
// table is required in CriticalValue threshold mode; the fitted rho is
// clamped to the table's rho axis.
DetectReport run_detect(const RunConfig& cfg, const TickSeries& series,
                        const CriticalValueTable* table = nullptr);

std::string events_to_csv(const std::vector<BurstEvent>& events);
std::vector<BurstEvent> events_from_csv(const std::string& csv);

// Size/power study: each cell simulates `replications` sessions, runs the
// detector on a 60-second grid after a 3000-second burn-in (m = 341 on a
// full session) and rejects when max |t| exceeds the table's critical value
// at the fitted rho.
struct ExperimentCell {
    bool with_burst = false;
    double alpha = 0.0;
    double beta = 0.0;
};

struct ExperimentConfig {
    ScenarioSpec base;                 // burst shape overridden per cell
    double burst_a = 3.0;
    double burst_b = 0.15;
    std::vector<ExperimentCell> cells;
    std::vector<double> mean_bandwidths_s = {300.0};
    std::vector<double> levels = {0.95};
    int replications = 1000;
    std::uint64_t seed = 7;
    double grid_spacing_s = 60.0;
    double burn_in_s = 3000.0;
};

struct ExperimentRow {
    ExperimentCell cell;
    double mean_bandwidth_s = 0.0;
    int replications = 0;
    std::vector<double> levels;
    std::vector<double> rejection_rates;
};

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                          const CriticalValueTable& table);

// Long format: with_burst,alpha,beta,bandwidth_s,level,replications,rejection_rate
std::string experiment_to_csv(const std::vector<ExperimentRow>& rows);

}  // namespace driftburst

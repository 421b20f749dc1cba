#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "driftburst/ingest.hpp"
#include "driftburst/pipeline.hpp"

using namespace driftburst;

namespace {

TickSeries simulated_series(const ScenarioSpec& spec) {
    DayPath day = simulate_day(spec);
    return TickSeries{day.times, day.noisy};
}

ScenarioSpec null_scenario(std::uint64_t seed) {
    ScenarioSpec s;
    s.seed = seed;
    s.noise.gamma = 0.5;
    return s;
}

ScenarioSpec burst_scenario(std::uint64_t seed) {
    ScenarioSpec s = null_scenario(seed);
    s.with_burst = true;
    s.burst.a = 3.0;
    s.burst.alpha = 0.75;
    s.burst.b = 0.15;
    s.burst.beta = 0.2;
    return s;
}

}  // namespace

TEST_CASE("quiet sessions stay quiet at the fixed threshold") {
    RunConfig cfg;
    for (std::uint64_t seed : {101, 102, 103}) {
        DetectReport rep = run_detect(cfg, simulated_series(null_scenario(seed)));
        CHECK(rep.events.empty());
        CHECK(rep.threshold == 4.5);
        CHECK(rep.max.m > 3000);  // 5-second grid over the session
        CHECK(rep.t_std > 0.6);
        CHECK(rep.t_std < 1.5);
        CHECK(rep.t_kurtosis > 1.5);
        CHECK(rep.t_kurtosis < 6.0);
    }
}

TEST_CASE("a strong burst is detected near its explosion time") {
    RunConfig cfg;
    DetectReport rep = run_detect(cfg, simulated_series(burst_scenario(301)));
    REQUIRE(!rep.events.empty());
    bool near = false;
    for (const auto& ev : rep.events) {
        if (std::abs(ev.peak_time - 11700.0) < 300.0) near = true;
        CHECK(std::abs(ev.peak_t) > rep.threshold);
        CHECK(ev.threshold_used == rep.threshold);
    }
    CHECK(near);
    CHECK(rep.max.t_star > 4.5);
}

TEST_CASE("run_detect is deterministic") {
    RunConfig cfg;
    TickSeries s = simulated_series(burst_scenario(77));
    DetectReport a = run_detect(cfg, s);
    DetectReport b = run_detect(cfg, s);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.events_to_csv() == b.events_to_csv());
}

TEST_CASE("session restriction") {
    RunConfig cfg;
    cfg.session_start_s = 6000.0;
    cfg.session_end_s = 16000.0;
    DetectReport rep = run_detect(cfg, simulated_series(null_scenario(55)));
    CHECK(rep.tstats.grid_times.front() >= 6000.0);
    CHECK(rep.tstats.grid_times.back() <= 16000.0);

    cfg.session_start_s = 23000.0;
    cfg.session_end_s = 23001.0;
    CHECK_THROWS_AS(run_detect(cfg, simulated_series(null_scenario(55))), std::invalid_argument);
}

TEST_CASE("critical-value threshold mode") {
    CriticalValueConfig cv;
    cv.m_axis = {1000, 3000, 10000};
    cv.rho_axis = {0.0, 0.5, 0.9};
    cv.levels = {0.95};
    cv.n_sims = 4000;
    cv.seed = 321;
    CriticalValueTable table = build_critical_value_table(cv);

    RunConfig cfg;
    cfg.threshold.mode = ThresholdSpec::Mode::CriticalValue;
    cfg.threshold.level = 0.95;
    CHECK_THROWS_AS(run_detect(cfg, simulated_series(null_scenario(9))), std::invalid_argument);

    DetectReport rep = run_detect(cfg, simulated_series(null_scenario(9)), &table);
    // 5s grid -> m around 4000; the 95% max-|t| quantile sits between 3.5 and 4.5.
    CHECK(rep.threshold > 3.3);
    CHECK(rep.threshold < 4.6);
    CHECK(rep.rho_hat > -1.0);
    CHECK(rep.rho_hat < 1.0);
}

TEST_CASE("piping the simulator through tick CSV equals the in-process path") {
    ScenarioSpec sc = burst_scenario(2024);
    DayPath day = simulate_day(sc);
    TickSeries direct{day.times, day.noisy};

    // simulate -> tick CSV -> parse -> mid-quote, as the CLI subcommands do.
    LoadedTicks lt = parse_ticks(ticks_to_csv(day_to_ticks(day)));
    TickSeries piped = build_midquote(lt.records);

    RunConfig cfg;
    DetectReport a = run_detect(cfg, direct);
    DetectReport b = run_detect(cfg, piped);
    // Timestamps survive the millisecond quantization exactly; prices go
    // through exp/log, so t-values agree to rounding error only.
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].peak_time == b.events[i].peak_time);
        CHECK(a.events[i].sign == b.events[i].sign);
        CHECK(a.events[i].peak_t == doctest::Approx(b.events[i].peak_t).epsilon(1e-9));
    }
    CHECK(a.max.t_star == doctest::Approx(b.max.t_star).epsilon(1e-9));
}

TEST_CASE("events CSV round trip") {
    std::vector<BurstEvent> evs;
    BurstEvent e1{11700.0, 5.25, -1, 4.5};
    BurstEvent e2{20000.0 + 1e-9, -4.75, 1, 4.5};
    evs.push_back(e1);
    evs.push_back(e2);
    auto back = events_from_csv(events_to_csv(evs));
    REQUIRE(back.size() == 2);
    CHECK(back[0].peak_time == e1.peak_time);
    CHECK(back[0].peak_t == e1.peak_t);
    CHECK(back[0].sign == -1);
    CHECK(back[1].peak_time == e2.peak_time);
    CHECK(back[1].threshold_used == 4.5);

    CHECK(events_from_csv("peak_time,peak_t,sign,threshold\n").empty());
    CHECK_THROWS_AS(events_from_csv(""), std::invalid_argument);
    CHECK_THROWS_AS(events_from_csv("peak_time,peak_t,sign,threshold\n1,2\n"),
                    std::invalid_argument);
}

TEST_CASE("run_experiment validation and a small null cell") {
    CriticalValueConfig cv;
    cv.m_axis = {100, 341, 1000};
    cv.rho_axis = {0.0, 0.5, 0.9};
    cv.levels = {0.95};
    cv.n_sims = 5000;
    cv.seed = 9;
    CriticalValueTable table = build_critical_value_table(cv);

    ExperimentConfig cfg;
    cfg.base.n = 5850;  // 4-second ticks keep the runtime small
    cfg.base.noise.gamma = 0.5;
    cfg.replications = 100;
    cfg.cells = {{false, 0.0, 0.0}};

    ExperimentConfig bad = cfg;
    bad.replications = 99;
    CHECK_THROWS_AS(run_experiment(bad, table), std::invalid_argument);
    bad = cfg;
    bad.cells.clear();
    CHECK_THROWS_AS(run_experiment(bad, table), std::invalid_argument);
    bad = cfg;
    bad.levels = {0.42};
    CHECK_THROWS_AS(run_experiment(bad, table), std::invalid_argument);

    auto rows = run_experiment(cfg, table);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].replications == 100);
    REQUIRE(rows[0].rejection_rates.size() == 1);
    // Null rejection at the 95% critical value: near 5%.
    CHECK(rows[0].rejection_rates[0] <= 0.15);

    // Determinism across runs.
    auto rows2 = run_experiment(cfg, table);
    CHECK(rows[0].rejection_rates == rows2[0].rejection_rates);

    std::string csv = experiment_to_csv(rows);
    CHECK(csv.find("with_burst,alpha,beta,bandwidth_s,level,replications,rejection_rate") == 0);
    CHECK(csv.find("\n0,0,0,300,0.9") != std::string::npos);
}

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "driftburst/detector.hpp"
#include "driftburst/numeric.hpp"

using namespace driftburst;

namespace {

// Equidistant Brownian day with one-second ticks.
TickSeries brownian_day(std::uint64_t seed, int n = 23400, double sigma2_daily = 0.0225 / 252.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    TickSeries s;
    s.times.resize(n + 1);
    s.log_prices.resize(n + 1);
    s.times[0] = 0.0;
    s.log_prices[0] = 0.0;
    double step = std::sqrt(sigma2_daily / n);
    for (int i = 1; i <= n; ++i) {
        s.times[i] = static_cast<double>(i);
        s.log_prices[i] = s.log_prices[i - 1] + step * normal(rng);
    }
    return s;
}

TStatSeries series_of(const std::vector<double>& values) {
    TStatSeries ts;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ts.grid_times.push_back(static_cast<double>(i) * 5.0);
        ts.t_values.emplace_back(values[i]);
        ts.mu_hats.emplace_back(0.0);
        ts.lrv_hats.emplace_back(1.0);
    }
    return ts;
}

}  // namespace

TEST_CASE("constant price gives missing t-values") {
    TickSeries s;
    for (int i = 0; i <= 5000; ++i) {
        s.times.push_back(static_cast<double>(i));
        s.log_prices.push_back(4.2);
    }
    DetectorConfig cfg;
    TStatSeries ts = tstat_grid(s, 60.0, cfg);
    CHECK(ts.n_present() == 0);
}

TEST_CASE("burn-in rule masks the first volatility bandwidth") {
    TickSeries s = brownian_day(1);
    DetectorConfig cfg;  // h' = 1500s default
    TStatSeries ts = tstat_grid(s, 5.0, cfg);
    for (std::size_t i = 0; i < ts.grid_times.size(); ++i) {
        if (ts.grid_times[i] < 1500.0) {
            CHECK(!ts.t_values[i].has_value());
        }
    }
    // Present somewhere after the burn-in.
    CHECK(ts.n_present() > 0);
}

TEST_CASE("60-second grid with 3000s burn-in yields m = 341") {
    TickSeries s = brownian_day(2);
    DetectorConfig cfg;
    cfg.grid_spacing_s = 60.0;
    cfg.burn_in_s = 3000.0;
    TStatSeries ts = tstat_grid(s, 60.0, cfg);
    CHECK(max_stat(ts).m == 341);
}

TEST_CASE("stale prices mask later grid points") {
    TickSeries s = brownian_day(3, 10000);
    // Truncate: no updates after t = 6000.
    while (!s.times.empty() && s.times.back() > 6000.0) {
        s.times.pop_back();
        s.log_prices.pop_back();
    }
    DetectorConfig cfg;
    TStatSeries ts = tstat_grid(s, 5.0, cfg);
    bool seen_present = false;
    for (std::size_t i = 0; i < ts.grid_times.size(); ++i) {
        if (ts.grid_times[i] > 6000.0 + cfg.grid_spacing_s) {
            CHECK(!ts.t_values[i].has_value());
        } else if (ts.t_values[i].has_value()) {
            seen_present = true;
        }
    }
    CHECK(seen_present);
}

TEST_CASE("null t-values look standard normal") {
    std::vector<double> pooled;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        TickSeries s = brownian_day(seed);
        DetectorConfig cfg;
        cfg.grid_spacing_s = 60.0;
        cfg.burn_in_s = 3000.0;
        TStatSeries ts = tstat_grid(s, 60.0, cfg);
        for (const auto& tv : ts.t_values) {
            if (tv) pooled.push_back(*tv);
        }
    }
    CHECK(stddev(pooled) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("scale invariance of the t-statistic") {
    TickSeries s = brownian_day(5, 8000);
    TickSeries scaled = s;
    for (double& p : scaled.log_prices) p *= 37.0;
    DetectorConfig cfg;
    TStatSeries a = tstat_grid(s, 60.0, cfg);
    TStatSeries b = tstat_grid(scaled, 60.0, cfg);
    REQUIRE(a.t_values.size() == b.t_values.size());
    for (std::size_t i = 0; i < a.t_values.size(); ++i) {
        REQUIRE(a.t_values[i].has_value() == b.t_values[i].has_value());
        if (a.t_values[i]) {
            CHECK(*a.t_values[i] == doctest::Approx(*b.t_values[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("max statistic worked example and constants") {
    TStatSeries ts = series_of({1.0, -3.2, 2.1});
    MaxStat m = max_stat(ts);
    CHECK(m.m == 3);
    CHECK(m.t_star == doctest::Approx(3.2).epsilon(1e-15));

    // m = 341 normalizing constants.
    std::vector<double> vals(341, 0.5);
    MaxStat m341 = max_stat(series_of(vals));
    CHECK(m341.a_m == doctest::Approx(3.41524).epsilon(5e-5));
    CHECK(m341.b_m == doctest::Approx(2.98953).epsilon(5e-5));
    CHECK(m341.a_m == doctest::Approx(std::sqrt(2.0 * std::log(341.0))).epsilon(1e-12));

    TStatSeries empty;
    empty.grid_times = {0.0, 5.0};
    empty.t_values = {std::nullopt, std::nullopt};
    empty.mu_hats = {std::nullopt, std::nullopt};
    empty.lrv_hats = {std::nullopt, std::nullopt};
    CHECK_THROWS_AS(max_stat(empty), EmptyWindow);
}

TEST_CASE("gumbel normalization sanity at m = 10000") {
    // Medians of the normalized max of i.i.d. standard normals approach
    // -ln(ln 2); convergence is slow, so the band is wide.
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    const int m = 10000, reps = 400;
    std::vector<double> normalized(reps);
    double a = std::sqrt(2.0 * std::log(static_cast<double>(m)));
    double b = a - std::log(M_PI * std::log(static_cast<double>(m))) / (2.0 * a);
    for (int r = 0; r < reps; ++r) {
        double mx = 0.0;
        for (int i = 0; i < m; ++i) mx = std::max(mx, std::abs(normal(rng)));
        normalized[r] = (mx - b) * a;
    }
    std::sort(normalized.begin(), normalized.end());
    double median = 0.5 * (normalized[reps / 2 - 1] + normalized[reps / 2]);
    CHECK(std::abs(median + std::log(std::log(2.0))) < 0.15);
}

TEST_CASE("event extraction rules") {
    SUBCASE("nothing above threshold") {
        TStatSeries ts = series_of({1.0, 2.0, 3.0, 2.0, 1.0});
        CHECK(extract_events(ts, 4.5).empty());
    }
    SUBCASE("separation keeps the larger of two close peaks") {
        // Peaks at indices 10 (4.8) and 50 (5.1): 200s apart on the 5s grid.
        std::vector<double> v(100, 0.0);
        v[9] = 4.0;
        v[10] = 4.8;
        v[11] = 4.0;
        v[49] = 4.0;
        v[50] = 5.1;
        v[51] = 4.0;
        auto events = extract_events(series_of(v), 4.5, 300.0);
        REQUIRE(events.size() == 1);
        CHECK(events[0].peak_t == doctest::Approx(5.1));
        CHECK(events[0].peak_time == doctest::Approx(250.0));
        CHECK(events[0].sign == 1);
        CHECK(events[0].threshold_used == doctest::Approx(4.5));

        // Far enough apart: both kept, sorted by time.
        std::vector<double> w(300, 0.0);
        w[9] = 4.0;
        w[10] = 4.8;
        w[11] = 4.0;
        w[199] = 4.0;
        w[200] = -5.1;
        w[201] = -4.0;
        auto two = extract_events(series_of(w), 4.5, 300.0);
        REQUIRE(two.size() == 2);
        CHECK(two[0].peak_time < two[1].peak_time);
        CHECK(two[1].sign == -1);
    }
    SUBCASE("plateau takes the earliest grid point") {
        std::vector<double> v(20, 0.0);
        v[8] = 4.0;
        v[9] = 5.0;
        v[10] = 5.0;
        v[11] = 4.0;
        auto events = extract_events(series_of(v), 4.5, 300.0);
        REQUIRE(events.size() == 1);
        CHECK(events[0].peak_time == doctest::Approx(45.0));
    }
    SUBCASE("missing neighbor blocks an extremum") {
        TStatSeries ts = series_of({0.0, 4.0, 5.0, 4.0, 0.0});
        ts.t_values[1] = std::nullopt;
        CHECK(extract_events(ts, 4.5).empty());
    }
}

TEST_CASE("t-stat series serialization round-trips bit-exactly") {
    TickSeries s = brownian_day(9, 6000);
    DetectorConfig cfg;
    TStatSeries ts = tstat_grid(s, 30.0, cfg);
    // Punch a hole to exercise missing-value serialization.
    REQUIRE(ts.t_values.size() > 80);
    ts.t_values[80] = std::nullopt;
    ts.mu_hats[80] = std::nullopt;
    ts.lrv_hats[80] = std::nullopt;

    TStatSeries fc = tstat_series_from_csv(tstat_series_to_csv(ts));
    TStatSeries fj = tstat_series_from_json(tstat_series_to_json(ts));
    for (const TStatSeries* r : {&fc, &fj}) {
        REQUIRE(r->grid_times.size() == ts.grid_times.size());
        for (std::size_t i = 0; i < ts.grid_times.size(); ++i) {
            CHECK(r->grid_times[i] == ts.grid_times[i]);
            REQUIRE(r->t_values[i].has_value() == ts.t_values[i].has_value());
            if (ts.t_values[i]) {
                CHECK(*r->t_values[i] == *ts.t_values[i]);
                CHECK(*r->mu_hats[i] == *ts.mu_hats[i]);
                CHECK(*r->lrv_hats[i] == *ts.lrv_hats[i]);
            }
        }
    }
}

#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "driftburst/analysis.hpp"

using namespace driftburst;

namespace {

// 1-second grid over [0, 1000] with log-price given by f.
template <typename F>
TickSeries grid_series(F f) {
    TickSeries s;
    for (int t = 0; t <= 1000; ++t) {
        s.times.push_back(static_cast<double>(t));
        s.log_prices.push_back(f(static_cast<double>(t)));
    }
    return s;
}

double vshape(double t) {
    // Flat, crash to -0.05 at t = 500, full recovery by 600, flat after.
    if (t <= 400.0) return 0.0;
    if (t <= 500.0) return -0.05 * (t - 400.0) / 100.0;
    if (t <= 600.0) return -0.05 + 0.05 * (t - 500.0) / 100.0;
    return 0.0;
}

BurstEvent event_at(double t, int sign) {
    BurstEvent ev;
    ev.peak_time = t;
    ev.sign = sign;
    return ev;
}

}  // namespace

TEST_CASE("event_returns on a V-shaped crash") {
    TickSeries s = grid_series(vshape);
    auto out = event_returns(s, {event_at(500.0, -1)}, 100.0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].r_minus == doctest::Approx(-0.05).epsilon(1e-12));
    CHECK(out[0].r_plus == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(out[0].sign == -1);
    CHECK(out[0].r_minus * out[0].r_plus < 0.0);  // reversal
}

TEST_CASE("event_returns on a monotone path keeps the sign") {
    TickSeries s = grid_series([](double t) { return t / 1000.0; });
    auto out = event_returns(s, {event_at(500.0, 1)}, 100.0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].r_minus > 0.0);
    CHECK(out[0].r_plus > 0.0);
}

TEST_CASE("event_returns skips uncovered windows") {
    TickSeries s = grid_series(vshape);
    auto out = event_returns(s, {event_at(50.0, 1), event_at(980.0, 1), event_at(500.0, -1)}, 100.0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].peak_time == 500.0);
    CHECK_THROWS_AS(event_returns(s, {}, 0.0), std::domain_error);
    CHECK(event_returns(TickSeries{}, {event_at(500.0, 1)}, 100.0).empty());
}

TEST_CASE("event_returns endogenous pre-window") {
    TickSeries s = grid_series([](double t) { return t / 1000.0; });
    TStatSeries ts;
    for (int g = 0; g <= 20; ++g) {
        ts.grid_times.push_back(50.0 * g);
        double t = 50.0 * g;
        // |t-stat| dips below 1 at grid time 350, stays above after.
        ts.t_values.push_back(t == 350.0 ? 0.5 : 2.0);
        ts.mu_hats.push_back(0.0);
        ts.lrv_hats.push_back(1.0);
    }
    auto fixed = event_returns(s, {event_at(500.0, 1)}, 100.0, &ts, false);
    auto endo = event_returns(s, {event_at(500.0, 1)}, 100.0, &ts, true);
    REQUIRE(fixed.size() == 1);
    REQUIRE(endo.size() == 1);
    CHECK(fixed[0].r_minus == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(endo[0].r_minus == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(endo[0].r_plus == fixed[0].r_plus);
}

TEST_CASE("reversion regression on exactly anti-symmetric samples") {
    std::vector<EventReturns> samples;
    for (int i = 0; i < 12; ++i) {
        EventReturns er;
        er.r_minus = -0.01 * (i + 1) * (i % 2 == 0 ? 1.0 : -1.0);
        er.r_plus = -er.r_minus;
        samples.push_back(er);
    }
    RegressionResult res = reversion_regression(samples);
    REQUIRE(res.coefficients.size() == 2);
    CHECK(res.coefficients[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.coefficients[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(res.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.reversal_fraction == 1.0);
    CHECK(res.n == 12);
}

TEST_CASE("reversion regression validation") {
    std::vector<EventReturns> few(5);
    CHECK_THROWS_AS(reversion_regression(few), std::invalid_argument);
    std::vector<EventReturns> flat(12);
    for (auto& s : flat) s.r_minus = 0.02;
    CHECK_THROWS_AS(reversion_regression(flat), std::runtime_error);
}

TEST_CASE("cgw regression nests the plain reversion fit when volume is constant zero interaction") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    std::vector<EventReturns> samples;
    for (int i = 0; i < 25; ++i) {
        EventReturns er;
        er.r_minus = 0.01 * normal(rng);
        er.r_plus = -0.4 * er.r_minus + 0.001 * normal(rng);
        er.v_minus = 0.0;
        er.has_volume = true;
        samples.push_back(er);
    }
    RegressionResult full = cgw_regression(samples);
    RegressionResult base = reversion_regression(samples);
    REQUIRE(full.coefficients.size() == 3);
    CHECK(full.coefficients[0] == base.coefficients[0]);
    CHECK(full.coefficients[1] == base.coefficients[1]);
    CHECK(full.coefficients[2] == 0.0);
    CHECK(full.t_statistics[2] == 0.0);
    CHECK(full.r_squared == base.r_squared);
}

TEST_CASE("cgw regression recovers a synthetic volume interaction") {
    const double a = 0.001, b = -0.2, c = -0.5;
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    std::vector<EventReturns> samples;
    for (int i = 0; i < 400; ++i) {
        EventReturns er;
        er.r_minus = 0.01 * normal(rng);
        er.v_minus = 1.0 + 0.5 * std::abs(normal(rng));
        er.r_plus = a + b * er.r_minus + c * er.r_minus * er.v_minus + 0.0005 * normal(rng);
        er.has_volume = true;
        samples.push_back(er);
    }
    RegressionResult res = cgw_regression(samples);
    REQUIRE(res.coefficients.size() == 3);
    const double truth[3] = {a, b, c};
    for (int k = 0; k < 3; ++k) {
        double se = res.coefficients[k] / res.t_statistics[k];
        CHECK(std::abs(res.coefficients[k] - truth[k]) < 3.0 * std::abs(se));
    }
    CHECK(res.t_statistics[2] < -2.0);
}

TEST_CASE("cgw regression validation") {
    std::vector<EventReturns> few(10);
    for (auto& s : few) s.has_volume = true;
    CHECK_THROWS_AS(cgw_regression(few), std::invalid_argument);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    std::vector<EventReturns> novol;
    for (int i = 0; i < 25; ++i) {
        EventReturns er;
        er.r_minus = normal(rng);
        er.r_plus = normal(rng);
        er.has_volume = false;
        novol.push_back(er);
    }
    CHECK_THROWS_AS(cgw_regression(novol), std::invalid_argument);

    // Perfectly collinear interaction (v constant and nonzero).
    std::vector<EventReturns> collinear;
    for (int i = 0; i < 25; ++i) {
        EventReturns er;
        er.r_minus = normal(rng);
        er.r_plus = normal(rng);
        er.v_minus = 1.0;
        er.has_volume = true;
        collinear.push_back(er);
    }
    CHECK_THROWS_AS(cgw_regression(collinear), std::runtime_error);
}

TEST_CASE("nw_se lag zero equals the White sandwich") {
    // Intercept-only design, hand-computed: bread = 1/n, meat = sum u_i^2.
    std::vector<double> X = {1.0, 1.0, 1.0};
    std::vector<double> u = {1.0, 2.0, 3.0};
    auto se = nw_se(X, 1, u, 0);
    REQUIRE(se.size() == 1);
    CHECK(se[0] == doctest::Approx(std::sqrt(14.0) / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS(nw_se(X, 1, u, -1), std::domain_error);
    std::vector<double> short_u = {1.0};
    CHECK_THROWS_AS(nw_se(X, 1, short_u, 0), std::invalid_argument);
}

TEST_CASE("nw_se agrees with classical errors on iid data and inflates under AR(1)") {
    const std::size_t n = 10000;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    std::vector<double> X(n, 1.0), iid(n), ar(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        iid[i] = normal(rng);
        prev = 0.5 * prev + normal(rng) * std::sqrt(0.75);
        ar[i] = prev;
    }
    int lags = static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 2.0 / 9.0)));

    double classical = 0.0;
    for (double u : iid) classical += u * u;
    classical = std::sqrt(classical / static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
    double nw_iid = nw_se(X, 1, iid, lags)[0];
    CHECK(nw_iid / classical == doctest::Approx(1.0).epsilon(0.10));

    // AR(1) with rho = 0.5: true long-run factor sqrt(3); require clear inflation.
    double white_ar = nw_se(X, 1, ar, 0)[0];
    double nw_ar = nw_se(X, 1, ar, lags)[0];
    CHECK(nw_ar > 1.3 * white_ar);
}

TEST_CASE("normalized volume") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    std::vector<Trade> trades;
    std::vector<double> notionals(25);
    for (int d = 0; d < 25; ++d) {
        notionals[d] = unif(rng);
        trades.push_back({d, 100.0, notionals[d]});
        trades.push_back({d, 800.0, unif(rng)});  // outside the windows below
    }
    std::vector<VolumeWindow> windows;
    for (int d = 0; d < 25; ++d) windows.push_back({d, 300.0});

    auto nv = normalized_volume(trades, windows, 300.0);
    REQUIRE(nv.size() == 25);
    double total = 0.0;
    for (double x : notionals) total += x;
    for (int d = 0; d < 25; ++d) {
        CHECK(nv[d] == doctest::Approx(notionals[d] / (total / 25.0)).epsilon(1e-12));
    }
    // Unconditional mean is 1 by construction.
    double m = 0.0;
    for (double x : nv) m += x;
    CHECK(m / 25.0 == doctest::Approx(1.0).epsilon(1e-12));

    // Scale invariance: doubling every notional changes nothing.
    std::vector<Trade> doubled = trades;
    for (auto& t : doubled) t.notional *= 2.0;
    CHECK(normalized_volume(doubled, windows, 300.0) == nv);

    std::vector<Trade> few(trades.begin(), trades.begin() + 10);
    CHECK_THROWS_AS(normalized_volume(few, windows, 300.0), std::runtime_error);
    CHECK_THROWS_AS(normalized_volume(trades, windows, -1.0), std::domain_error);
    std::vector<VolumeWindow> empty_window = {{0, 50.0}};
    CHECK_THROWS_AS(normalized_volume(trades, empty_window, 10.0), std::runtime_error);
}

TEST_CASE("double sort separates volume columns") {
    // Deterministic grid: r in {-4..-1}, v in {1..4}, two copies each;
    // r_plus = -r * v / 4 so reversion strengthens with volume.
    std::vector<EventReturns> samples;
    for (int rep = 0; rep < 2; ++rep) {
        for (int rv = 1; rv <= 4; ++rv) {
            for (int vv = 1; vv <= 4; ++vv) {
                EventReturns er;
                er.r_minus = -static_cast<double>(rv);
                er.v_minus = static_cast<double>(vv);
                er.r_plus = static_cast<double>(rv) * vv / 4.0;
                er.has_volume = true;
                samples.push_back(er);
            }
        }
    }
    DoubleSortResult res = double_sort(samples);
    CHECK(res.negative.n == 32);
    CHECK(res.positive.n == 0);
    for (int j = 0; j < 3; ++j) CHECK(std::isnan(res.positive.cells[0][j]));

    // Low r bucket = r = -4: cell means are 4 * v / 4.
    CHECK(res.negative.cells[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.negative.cells[0][2] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(res.negative.cells[2][0] == doctest::Approx(0.25).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(res.negative.high_minus_low[i] > 0.0);
    std::size_t total = 0;
    for (const auto& row : res.negative.counts)
        for (std::size_t c : row) total += c;
    CHECK(total == 32);

    // Order invariance.
    std::vector<EventReturns> shuffled = samples;
    std::reverse(shuffled.begin(), shuffled.end());
    DoubleSortResult res2 = double_sort(shuffled);
    CHECK(res2.negative.cells == res.negative.cells);
    CHECK(res2.negative.counts == res.negative.counts);

    std::vector<EventReturns> few(samples.begin(), samples.begin() + 20);
    CHECK_THROWS_AS(double_sort(few), std::invalid_argument);
    samples[0].has_volume = false;
    CHECK_THROWS_AS(double_sort(samples), std::invalid_argument);
}

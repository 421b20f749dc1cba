#include "driftburst/simulator.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "driftburst/numeric.hpp"

namespace driftburst {

namespace {

void validate(const HestonParams& p) {
    if (p.kappa <= 0.0 || p.theta <= 0.0 || p.xi <= 0.0) {
        throw std::domain_error("simulate_heston: kappa, theta, xi must be positive");
    }
    if (p.rho < -1.0 || p.rho > 1.0) throw std::domain_error("simulate_heston: |rho| <= 1");
}

}  // namespace

HestonPath simulate_heston(const HestonParams& p, std::size_t n, double day_fraction_of_year,
                           std::uint64_t seed) {
    validate(p);
    if (n < 2) throw std::domain_error("simulate_heston: n must be >= 2");
    const double dt = day_fraction_of_year / static_cast<double>(n);
    const double sqdt = std::sqrt(dt);
    const double rho2 = std::sqrt(1.0 - p.rho * p.rho);

    std::mt19937_64 rng(seed);
    // Stationary law: Gamma(shape 2*kappa*theta/xi^2, rate 2*kappa/xi^2).
    std::gamma_distribution<double> stationary(2.0 * p.kappa * p.theta / (p.xi * p.xi),
                                               p.xi * p.xi / (2.0 * p.kappa));
    std::normal_distribution<double> normal;

    HestonPath path;
    path.variance.resize(n);
    path.increments.resize(n);
    path.price_shocks.resize(n);
    double v = stationary(rng);
    for (std::size_t i = 0; i < n; ++i) {
        path.variance[i] = v;
        double z1 = normal(rng);
        double z2 = normal(rng);
        double sv = std::sqrt(v);
        path.price_shocks[i] = z1;
        path.increments[i] = sv * sqdt * z1;
        // Full-truncation Euler step.
        v = std::max(0.0, v + p.kappa * (p.theta - v) * dt + p.xi * sv * sqdt * (p.rho * z1 + rho2 * z2));
    }
    return path;
}

namespace {

// Signed integral of sign(t - tau)|tau - t|^{-alpha} over [t1, t2] (day
// fractions), exact antiderivative on each side of tau.
double drift_burst_integral(double t1, double t2, double tau, double alpha) {
    double acc = 0.0;
    double p = 1.0 - alpha;
    if (t1 < tau) {
        double b = std::min(t2, tau);
        acc += (std::pow(tau - b, p) - std::pow(tau - t1, p)) / p;
    }
    if (t2 > tau) {
        double a = std::max(t1, tau);
        acc += (std::pow(t2 - tau, p) - std::pow(a - tau, p)) / p;
    }
    return acc;
}

// Integral of |tau - t|^{-2 beta} over [t1, t2].
double vb_variance_integral(double t1, double t2, double tau, double beta) {
    double acc = 0.0;
    double p = 1.0 - 2.0 * beta;
    if (t1 < tau) {
        double b = std::min(t2, tau);
        acc += (std::pow(tau - t1, p) - std::pow(tau - b, p)) / p;
    }
    if (t2 > tau) {
        double a = std::max(t1, tau);
        acc += (std::pow(t2 - tau, p) - std::pow(a - tau, p)) / p;
    }
    return acc;
}

}  // namespace

void inject_bursts(std::vector<double>& increments, const BurstParams& bp, double theta,
                   double day_fraction_of_year, std::uint64_t seed,
                   const std::vector<double>* price_shocks) {
    if (bp.vb_on_price_brownian &&
        (price_shocks == nullptr || price_shocks->size() != increments.size())) {
        throw std::invalid_argument("inject_bursts: vb_on_price_brownian needs matching shocks");
    }
    if (bp.window_lo < 0.0 || bp.window_hi > 1.0 || bp.window_lo >= bp.window_hi) {
        throw std::domain_error("inject_bursts: window must satisfy 0 <= lo < hi <= 1");
    }
    if (!(bp.window_lo < bp.tau_db && bp.tau_db < bp.window_hi)) {
        throw std::domain_error("inject_bursts: tau_db must lie inside the window");
    }
    if (bp.alpha <= 0.0 || bp.alpha >= 1.0) throw std::domain_error("inject_bursts: alpha in (0,1)");
    if (bp.beta < 0.0 || bp.beta >= 0.5 || bp.b < 0.0) {
        throw std::domain_error("inject_bursts: beta in [0,0.5), b >= 0");
    }
    if (bp.a == 0.0 && bp.b == 0.0) return;

    const std::size_t n = increments.size();
    const double du = 1.0 / static_cast<double>(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;

    std::vector<double> vb;
    std::vector<std::size_t> vb_idx;
    for (std::size_t i = 0; i < n; ++i) {
        double u1 = static_cast<double>(i) * du;
        double u2 = u1 + du;
        double lo = std::max(u1, bp.window_lo);
        double hi = std::min(u2, bp.window_hi);
        if (lo >= hi) continue;
        if (bp.a != 0.0) {
            increments[i] +=
                bp.a * day_fraction_of_year * drift_burst_integral(lo, hi, bp.tau_db, bp.alpha);
        }
        if (bp.b > 0.0) {
            double var_years = bp.b * bp.b * theta * day_fraction_of_year *
                               vb_variance_integral(lo, hi, bp.tau_db, bp.beta);
            double z = bp.vb_on_price_brownian ? (*price_shocks)[i] : normal(rng);
            vb.push_back(std::sqrt(var_years) * z);
            vb_idx.push_back(i);
        }
    }
    if (!vb.empty()) {
        if (bp.recenter_vb) {
            double m = 0.0;
            for (double x : vb) m += x;
            m /= static_cast<double>(vb.size());
            for (double& x : vb) x -= m;
        }
        for (std::size_t j = 0; j < vb.size(); ++j) increments[vb_idx[j]] += vb[j];
    }
}

std::vector<double> simulate_tempered_stable(const JumpParams& jp, std::size_t n,
                                             double day_fraction_of_year, std::uint64_t seed) {
    if (jp.upsilon != 0.5) {
        throw std::invalid_argument("simulate_tempered_stable: only upsilon = 0.5 is supported");
    }
    if (jp.psi < 0.0 || jp.lambda <= 0.0) {
        throw std::domain_error("simulate_tempered_stable: psi >= 0, lambda > 0");
    }
    std::vector<double> out(n, 0.0);
    if (jp.psi == 0.0) return out;

    // One-sided 1/2-stable subordinator with Levy density psi x^{-3/2} e^{-lambda x}
    // has Laplace exponent c (sqrt(lambda + u) - sqrt(lambda)), c = 2 sqrt(pi) psi.
    // Its increment over dt is exactly inverse Gaussian with shape (dt c)^2 / 2
    // and mean dt c / (2 sqrt(lambda)), drawn with the Michael-Schucany-Haas
    // transform; this stays O(1) per draw however heavy the tempered mass is.
    const double dt = day_fraction_of_year / static_cast<double>(n);
    const double c = 2.0 * std::sqrt(M_PI) * jp.psi;
    const double shape = (dt * c) * (dt * c) / 2.0;
    const double mu = dt * c / (2.0 * std::sqrt(jp.lambda));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw_one = [&]() {
        double z = normal(rng);
        double v = z * z;
        double x = mu + mu * mu * v / (2.0 * shape) -
                   mu / (2.0 * shape) * std::sqrt(4.0 * mu * shape * v + mu * mu * v * v);
        return unif(rng) <= mu / (mu + x) ? x : mu * mu / x;
    };
    for (std::size_t i = 0; i < n; ++i) out[i] = draw_one() - draw_one();
    return out;
}

double calibrate_jump_intensity(double target_share, const HestonParams& hp, double lambda,
                                double upsilon) {
    if (target_share <= 0.0 || target_share >= 1.0) {
        throw std::domain_error("calibrate_jump_intensity: share in (0,1)");
    }
    // Jump QV per unit time per side: psi * Gamma(2 - upsilon) * lambda^{upsilon - 2}.
    double per_psi = 2.0 * std::tgamma(2.0 - upsilon) * std::pow(lambda, upsilon - 2.0);
    return target_share / (1.0 - target_share) * hp.theta / per_psi;
}

std::vector<double> add_noise(const std::vector<double>& levels,
                              const std::vector<double>& variance, const NoiseParams& np,
                              double day_fraction_of_year, std::uint64_t seed) {
    if (np.gamma < 0.0) throw std::domain_error("add_noise: gamma must be >= 0");
    if (levels.size() != variance.size() + 1) {
        throw std::invalid_argument("add_noise: levels must have variance.size() + 1 entries");
    }
    if (np.gamma == 0.0) return levels;
    const std::size_t n = variance.size();
    const double dt = day_fraction_of_year / static_cast<double>(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        double v = variance[std::min(i, n - 1)];
        out[i] = levels[i] + np.gamma * std::sqrt(v * dt) * normal(rng);
    }
    return out;
}

std::vector<double> inject_fixed_jump(const std::vector<double>& levels, double jump_size,
                                      double jump_time_fraction) {
    if (jump_time_fraction < 0.0 || jump_time_fraction > 1.0) {
        throw std::domain_error("inject_fixed_jump: jump time must be in [0,1]");
    }
    std::vector<double> out = levels;
    const std::size_t n = levels.size() - 1;
    for (std::size_t i = 0; i <= n; ++i) {
        if (static_cast<double>(i) / static_cast<double>(n) >= jump_time_fraction) {
            out[i] += jump_size;
        }
    }
    return out;
}

DayPath simulate_day(const ScenarioSpec& spec) {
    HestonPath hp = simulate_heston(spec.heston, spec.n, spec.day_fraction_of_year,
                                    derive_seed(spec.seed, 1));
    std::vector<double> inc = hp.increments;
    if (spec.with_burst) {
        inject_bursts(inc, spec.burst, spec.heston.theta, spec.day_fraction_of_year,
                      derive_seed(spec.seed, 2), &hp.price_shocks);
    }
    if (spec.with_jumps) {
        JumpParams jp = spec.jumps;
        if (spec.jump_qv_share > 0.0) {
            jp.psi = calibrate_jump_intensity(spec.jump_qv_share, spec.heston, jp.lambda, jp.upsilon);
        }
        std::vector<double> jumps =
            simulate_tempered_stable(jp, spec.n, spec.day_fraction_of_year, derive_seed(spec.seed, 3));
        for (std::size_t i = 0; i < inc.size(); ++i) inc[i] += jumps[i];
    }

    DayPath day;
    day.variance = hp.variance;
    day.times.resize(spec.n + 1);
    day.clean.resize(spec.n + 1);
    const double step_s = spec.session_seconds / static_cast<double>(spec.n);
    day.times[0] = 0.0;
    day.clean[0] = 0.0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        day.times[i + 1] = static_cast<double>(i + 1) * step_s;
        day.clean[i + 1] = day.clean[i] + inc[i];
    }
    day.noisy = add_noise(day.clean, day.variance, spec.noise, spec.day_fraction_of_year,
                          derive_seed(spec.seed, 4));
    return day;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
            if (!blank) throw std::invalid_argument("scenario: malformed line: " + line);
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace

ScenarioSpec scenario_from_string(const std::string& text) {
    auto kv = parse_kv(text);
    ScenarioSpec s;
    auto take = [&kv](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::string{};
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto num = [&take](const char* key, double dflt) {
        std::string v = take(key);
        return v.empty() ? dflt : std::stod(v);
    };
    s.n = static_cast<std::size_t>(num("n", static_cast<double>(s.n)));
    s.session_seconds = num("session_seconds", s.session_seconds);
    s.day_fraction_of_year = num("day_fraction_of_year", s.day_fraction_of_year);
    s.seed = static_cast<std::uint64_t>(num("seed", static_cast<double>(s.seed)));
    s.heston.kappa = num("kappa", s.heston.kappa);
    s.heston.theta = num("theta", s.heston.theta);
    s.heston.xi = num("xi", s.heston.xi);
    s.heston.rho = num("rho", s.heston.rho);
    s.with_burst = num("with_burst", 0.0) != 0.0;
    s.burst.a = num("burst_a", s.burst.a);
    s.burst.alpha = num("burst_alpha", s.burst.alpha);
    s.burst.b = num("burst_b", s.burst.b);
    s.burst.beta = num("burst_beta", s.burst.beta);
    s.burst.tau_db = num("tau_db", s.burst.tau_db);
    s.burst.window_lo = num("window_lo", s.burst.window_lo);
    s.burst.window_hi = num("window_hi", s.burst.window_hi);
    s.burst.recenter_vb = num("recenter_vb", 1.0) != 0.0;
    s.burst.vb_on_price_brownian = num("vb_on_price_brownian", 0.0) != 0.0;
    s.with_jumps = num("with_jumps", 0.0) != 0.0;
    s.jumps.psi = num("jump_psi", s.jumps.psi);
    s.jumps.lambda = num("jump_lambda", s.jumps.lambda);
    s.jumps.upsilon = num("jump_upsilon", s.jumps.upsilon);
    s.jump_qv_share = num("jump_qv_share", s.jump_qv_share);
    s.noise.gamma = num("noise_gamma", s.noise.gamma);
    if (!kv.empty()) throw std::invalid_argument("scenario: unknown key: " + kv.begin()->first);
    return s;
}

ScenarioSpec scenario_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario_from_file: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_string(ss.str());
}

std::string scenario_to_string(const ScenarioSpec& s) {
    std::ostringstream os;
    os.precision(17);
    os << "n = " << s.n << "\n"
       << "session_seconds = " << s.session_seconds << "\n"
       << "day_fraction_of_year = " << s.day_fraction_of_year << "\n"
       << "seed = " << s.seed << "\n"
       << "kappa = " << s.heston.kappa << "\n"
       << "theta = " << s.heston.theta << "\n"
       << "xi = " << s.heston.xi << "\n"
       << "rho = " << s.heston.rho << "\n"
       << "with_burst = " << (s.with_burst ? 1 : 0) << "\n"
       << "burst_a = " << s.burst.a << "\n"
       << "burst_alpha = " << s.burst.alpha << "\n"
       << "burst_b = " << s.burst.b << "\n"
       << "burst_beta = " << s.burst.beta << "\n"
       << "tau_db = " << s.burst.tau_db << "\n"
       << "window_lo = " << s.burst.window_lo << "\n"
       << "window_hi = " << s.burst.window_hi << "\n"
       << "recenter_vb = " << (s.burst.recenter_vb ? 1 : 0) << "\n"
       << "vb_on_price_brownian = " << (s.burst.vb_on_price_brownian ? 1 : 0) << "\n"
       << "with_jumps = " << (s.with_jumps ? 1 : 0) << "\n"
       << "jump_psi = " << s.jumps.psi << "\n"
       << "jump_lambda = " << s.jumps.lambda << "\n"
       << "jump_upsilon = " << s.jumps.upsilon << "\n"
       << "jump_qv_share = " << s.jump_qv_share << "\n"
       << "noise_gamma = " << s.noise.gamma << "\n";
    return os.str();
}

}  // namespace driftburst

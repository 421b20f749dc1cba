#include "driftburst/numeric.hpp"

#include <atomic>

namespace driftburst {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double fm, double whole, double rel_tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * rel_tol * std::abs(left + right)) {
        return left + right + delta / 15.0;
    }
    return simpson(f, a, fa, m, fm, flm, left, rel_tol, depth - 1) +
           simpson(f, m, fm, b, fb, frm, right, rel_tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, fa, b, fb, fm, whole, rel_tol, max_depth);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t n_threads = std::min<std::size_t>(hw == 0 ? 1 : hw, n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace driftburst

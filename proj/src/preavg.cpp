#include "driftburst/preavg.hpp"

namespace driftburst {

std::vector<double> preaverage(const std::vector<double>& increments, const PreAvgConfig& cfg) {
    if (cfg.window < 1) throw std::invalid_argument("preaverage: window must be >= 1");
    const int k = cfg.window;
    if (k == 1) return increments;
    const std::size_t n = increments.size();
    if (n < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("preaverage: input shorter than window");
    }
    std::vector<double> g(k - 1);
    for (int j = 1; j < k; ++j) g[j - 1] = weight_g(static_cast<double>(j) / k);

    std::vector<double> out(n - k + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (int j = 1; j < k; ++j) s += g[j - 1] * increments[i + j];
        out[i] = s;
    }
    return out;
}

std::vector<double> preaverage_levels(const std::vector<double>& levels, const PreAvgConfig& cfg) {
    if (cfg.window < 1) throw std::invalid_argument("preaverage_levels: window must be >= 1");
    const int k = cfg.window;
    if (levels.size() < static_cast<std::size_t>(k) + 1) {
        throw std::invalid_argument("preaverage_levels: input shorter than window");
    }
    if (k == 1) {
        std::vector<double> out(levels.size() - 1);
        for (std::size_t i = 0; i + 1 < levels.size(); ++i) out[i] = levels[i + 1] - levels[i];
        return out;
    }
    // H_j = g((j+1)/k) - g(j/k) with g(0) = g(1) = 0.
    std::vector<double> h(k);
    for (int j = 0; j < k; ++j) {
        double gj = (j == 0) ? 0.0 : weight_g(static_cast<double>(j) / k);
        double gj1 = (j + 1 == k) ? 0.0 : weight_g(static_cast<double>(j + 1) / k);
        h[j] = gj1 - gj;
    }
    const std::size_t n = levels.size() - 1;  // number of increments
    std::vector<double> out(n - k + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += h[j] * levels[i + j + 1];
        out[i] = -s;
    }
    return out;
}

}  // namespace driftburst

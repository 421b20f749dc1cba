#pragma once

#include <stdexcept>
#include <vector>

namespace driftburst {

enum class PreAvgWeight { MinTriangle };  // g(x) = min(x, 1-x)

struct PreAvgConfig {
    int window = 3;  // k_n; 1 means no pre-averaging
    PreAvgWeight weight = PreAvgWeight::MinTriangle;
};

inline double weight_g(double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("weight_g: x must be in [0,1]");
    return x < 1.0 - x ? x : 1.0 - x;
}

// Pre-averaged increments: out[i] = sum_{j=1}^{k-1} g(j/k) * increments[i+j],
// length n - k + 1 for n input increments. k = 1 returns the input unchanged.
std::vector<double> preaverage(const std::vector<double>& increments, const PreAvgConfig& cfg);

// Equivalent level form: out[i] = -sum_{j=0}^{k-1} (g((j+1)/k) - g(j/k)) * levels[i+j+1]
// over the levels spanned by the same increments. Kept as an independent
// cross-check of the increment form.
std::vector<double> preaverage_levels(const std::vector<double>& levels, const PreAvgConfig& cfg);

}  // namespace driftburst

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

/// One-sample Kolmogorov-Smirnov statistic against the exponential(rate) cdf.
inline double ks_statistic_exponential(std::vector<double> samples, double rate) {
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double cdf = 1.0 - std::exp(-rate * samples[k]);
        d = std::max(d, std::abs(cdf - static_cast<double>(k) / n));
        d = std::max(d, std::abs(static_cast<double>(k + 1) / n - cdf));
    }
    return d;
}

inline double mean(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

}  // namespace oracle

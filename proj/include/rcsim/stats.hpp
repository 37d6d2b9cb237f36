#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rcsim {

// One-sided exact sign test: probability of >= wins successes out of n fair
// coin flips. Ties must be dropped by the caller.
inline double sign_test_p(std::int64_t wins, std::int64_t n) {
    if (n <= 0) return 1.0;
    if (wins < 0) wins = 0;
    double p = 0.0;
    const double log_half = std::log(0.5);
    for (std::int64_t j = wins; j <= n; ++j) {
        const double log_choose = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        p += std::exp(log_choose + n * log_half);
    }
    return p > 1.0 ? 1.0 : p;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// sample standard deviation (n-1); 0 for fewer than two values
inline double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// coefficient of variation; 0 for a zero mean
inline double cv_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    if (m == 0.0) return 0.0;
    return stddev_of(v) / m;
}

}  // namespace rcsim

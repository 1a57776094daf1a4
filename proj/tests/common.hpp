#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "visco/model.hpp"
#include "visco/spectrum.hpp"

namespace fixture {

inline visco::ModelParams canonical() { return visco::validate_params(1.0, 0.05, 0.15, 0.1, 0.3); }
inline visco::ModelParams equal_rates() { return visco::validate_params(1.0, 0.1, 0.1, 0.2, 0.2); }

inline double canonical_threshold(int modes = 50) {
    return visco::control_time_threshold(visco::spectral_limits(canonical(), modes));
}

/// Least-squares slope of log(values) against log(index), index starting at `first`.
inline double log_log_slope(const std::vector<double>& values, int first) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = std::log(static_cast<double>(first) + static_cast<double>(i));
        const double y = std::log(values[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace fixture

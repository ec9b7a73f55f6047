#pragma once

#include <cmath>
#include <numbers>

namespace qcurv::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double pi3 = pi * pi * pi;

// Fundamental solution: Delta^3 log|x| = gamma6 * delta_0 in R^6.
inline constexpr double gamma6 = 64.0 * pi3;
// |S^5|; radial volume element is omega5 r^5 dr.
inline constexpr double omega5 = pi3;
inline constexpr double omega6 = 16.0 * pi3 / 15.0;
inline constexpr double Lambda1 = 128.0 * pi3;

inline double delta_star() { return std::sqrt(1.0 - 1.0 / std::sqrt(3.0)); }

}  // namespace qcurv::constants

#ifndef KERROMIT_CONSTANTS_HPP
#define KERROMIT_CONSTANTS_HPP

#include <limits>
#include <numbers>

namespace kerromit
{
inline constexpr double kHbar = 1.054571817e-34;        // J*s (exact, SI 2019)
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s (exact)
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline constexpr const char *kVersion = "kerromit 0.1.0";
} // namespace kerromit

#endif

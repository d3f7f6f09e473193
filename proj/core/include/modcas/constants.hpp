#pragma once

namespace modcas::constants {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double c = 2.99792458e8;         // m/s
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double kB = 1.380649e-23;        // J/K

} // namespace modcas::constants

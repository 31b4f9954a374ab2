#ifndef QLW_WEIGHTS_HPP
#define QLW_WEIGHTS_HPP

// The decay exponents used by the weighted norms. They recur across the
// whole toolkit and must not drift, so they are defined exactly once here
// as exact rationals.

namespace qlw {

inline constexpr double kConeExponentBracket = 15.0 / 16.0; // [.]  cone-distance power
inline constexpr double kConeExponentDouble = 1.0;          // [[.]] cone-distance power
inline constexpr double kAngleExponent = 7.0 / 16.0;        // <.>  (1+|x|+t) power
inline constexpr double kAngleExponentDouble = 1.0 / 2.0;   // <<.>> (1+|x|+t) power
inline constexpr double kRadialExponent = 1.0 / 2.0;        // (1+|x|) power in brackets

} // namespace qlw

#endif

#pragma once

// Thin generic layer over double / long double / __float128 so the quadrature
// and Bessel templates can run in whichever precision the cancellation budget
// demands.  The matrix-element integrals cancel down to exp(-b^2/4a) ~ 1e-22
// of the integrand magnitude, which is below double and x87 long double
// resolution, hence the __float128 path.

#include <cmath>
#include <quadmath.h>

namespace spintrap {

using quad_real = __float128;

namespace fl {

inline double exp(double x) { return std::exp(x); }
inline long double exp(long double x) { return std::exp(x); }
inline quad_real exp(quad_real x) { return ::expq(x); }

inline double log(double x) { return std::log(x); }
inline long double log(long double x) { return std::log(x); }
inline quad_real log(quad_real x) { return ::logq(x); }

inline double sqrt(double x) { return std::sqrt(x); }
inline long double sqrt(long double x) { return std::sqrt(x); }
inline quad_real sqrt(quad_real x) { return ::sqrtq(x); }

inline double sin(double x) { return std::sin(x); }
inline long double sin(long double x) { return std::sin(x); }
inline quad_real sin(quad_real x) { return ::sinq(x); }

inline double cos(double x) { return std::cos(x); }
inline long double cos(long double x) { return std::cos(x); }
inline quad_real cos(quad_real x) { return ::cosq(x); }

inline double atan(double x) { return std::atan(x); }
inline long double atan(long double x) { return std::atan(x); }
inline quad_real atan(quad_real x) { return ::atanq(x); }

inline double abs(double x) { return std::fabs(x); }
inline long double abs(long double x) { return std::fabs(x); }
inline quad_real abs(quad_real x) { return ::fabsq(x); }

template <class T> struct traits;
template <> struct traits<double> {
    static constexpr double eps = 2.220446049250313e-16;
    static constexpr double pi = 3.141592653589793238462643383279502884;
};
template <> struct traits<long double> {
    static constexpr long double eps = 1.084202172485504434e-19L;
    static constexpr long double pi = 3.141592653589793238462643383279502884L;
};
template <> struct traits<quad_real> {
    static constexpr quad_real eps = FLT128_EPSILON;
    static constexpr quad_real pi = M_PIq;
};

/// Assemble a constant from a hi/lo double pair (~32 significant digits).
template <class T>
constexpr T from_pair(double hi, double lo) {
    return static_cast<T>(hi) + static_cast<T>(lo);
}

} // namespace fl
} // namespace spintrap

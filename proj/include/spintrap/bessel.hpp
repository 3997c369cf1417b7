#pragma once

// Bessel functions of the first kind J0, J1, J2, implemented in-repo so the
// numerical contract of the matrix-element pipeline is self-contained.
//
// Three regimes:
//   |x| <= 2   ascending power series (terms decay immediately, no
//              cancellation), accumulated in __float128;
//   2..30      Miller backward recurrence with the J0 + 2*sum J_{2k} = 1
//              normalization -- cancellation-free where the power series
//              would lose ~11 digits and the Hankel expansion has not yet
//              bottomed out;
//   |x| > 30   Hankel asymptotic expansion truncated at its smallest term
//              (~exp(-2x) <= 1e-26 there).
// The quadrature layer relies on the resulting near-eps pointwise accuracy:
// its panel-acceptance roundoff floor assumes integrand noise of a few eps.

#include <cstdlib>
#include <vector>

#include "spintrap/errors.hpp"
#include "spintrap/quadreal.hpp"

namespace spintrap {

namespace detail {

template <class T>
T bessel_j_series(int order, T x) {
    // J_n(x) = sum_m (-1)^m (x/2)^{n+2m} / (m! (m+n)!)
    const quad_real xq = static_cast<quad_real>(x);
    const quad_real half_x = xq / 2;
    const quad_real x2 = half_x * half_x;
    quad_real term = 1;
    for (int i = 1; i <= order; ++i) term *= half_x / i;
    quad_real sum = term;
    for (int m = 1; m < 200; ++m) {
        term *= -x2 / (static_cast<quad_real>(m) * (m + order));
        sum += term;
        if (::fabsq(term) < ::fabsq(sum) * FLT128_EPSILON && m > 4) break;
    }
    return static_cast<T>(sum);
}

inline quad_real bessel_j_miller(int order, quad_real x) {
    const int start = static_cast<int>(1.5 * static_cast<double>(x)) + 60;
    quad_real j_above = 0;    // J_{n+1}
    quad_real j_n = 1e-30;    // J_n seed, rescaled away by the normalization
    quad_real even_sum = 0;   // sum of J_{2k}, k >= 1
    quad_real out = (start == order) ? j_n : quad_real(0);
    for (int n = start; n > 0; --n) {
        const quad_real j_below = (2 * n / x) * j_n - j_above;
        j_above = j_n;
        j_n = j_below; // now J_{n-1}
        const int idx = n - 1;
        if (idx == order) out = j_n;
        if (idx >= 2 && idx % 2 == 0) even_sum += j_n;
        if (::fabsq(j_n) > quad_real(1e300)) {
            j_n *= quad_real(1e-300);
            j_above *= quad_real(1e-300);
            even_sum *= quad_real(1e-300);
            out *= quad_real(1e-300);
        }
    }
    return out / (2 * even_sum + j_n); // j_n holds J_0
}

template <class T>
T bessel_j_asymptotic(int order, T x) {
    // J_n(x) = sqrt(2/(pi x)) [ P(x) cos chi - Q(x) sin chi ],
    // chi = x - n pi/2 - pi/4, with Hankel coefficient ratio
    //   t_k = t_{k-1} * (mu - (2k-1)^2) / (8 k x), mu = 4 n^2.
    const T mu = T(4 * order * order);
    const T inv8x = T(1) / (8 * x);
    T t = 1;
    T p = 1, q = 0;
    T prev_mag = fl::abs(t);
    for (int k = 1; k <= 60; ++k) {
        const T f = (mu - T((2 * k - 1) * (2 * k - 1))) * inv8x / T(k);
        t *= f;
        const T mag = fl::abs(t);
        if (mag > prev_mag) break; // divergent tail reached; stop at smallest term
        prev_mag = mag;
        switch (k % 4) {
        case 1: q += t; break;
        case 2: p -= t; break;
        case 3: q -= t; break;
        case 0: p += t; break;
        }
        if (mag < fl::traits<T>::eps) break;
    }
    const T chi = x - (T(order) / 2 + T(0.25L)) * fl::traits<T>::pi;
    return fl::sqrt(T(2) / (fl::traits<T>::pi * x)) * (p * fl::cos(chi) - q * fl::sin(chi));
}

} // namespace detail

/// J_n(x) for n in {0, 1, 2}; relative accuracy ~1e-16 (double) away from
/// zeros, far better than the 1e-14 contract.
template <class T>
T bessel_j(int order, T x) {
    if (order < 0 || order > 2) throw domain_error("bessel_j: order must be 0, 1 or 2");
    bool flip = false;
    if (x < T(0)) { // J_n(-x) = (-1)^n J_n(x)
        x = -x;
        flip = (order % 2) != 0;
    }
    // all branches run in quad internally: the double path would otherwise
    // lose the 1e-14 contract to phase reduction (x * eps) at large x
    const quad_real xq = static_cast<quad_real>(x);
    quad_real v;
    if (x <= T(2))
        v = detail::bessel_j_series(order, xq);
    else if (x <= T(30))
        v = detail::bessel_j_miller(order, xq);
    else
        v = detail::bessel_j_asymptotic(order, xq);
    return flip ? -static_cast<T>(v) : static_cast<T>(v);
}

inline double cyl_j0(double x) { return bessel_j(0, x); }
inline double cyl_j1(double x) { return bessel_j(1, x); }
inline double cyl_j2(double x) { return bessel_j(2, x); }

/// Zeros of J1 on (0, x_max), found by sign-change scan + bisection.
/// Used by the density-of-states zero-counting oracle.
inline std::vector<double> j1_zeros_up_to(double x_max) {
    std::vector<double> zeros;
    if (x_max <= 0.0) return zeros;
    const double step = 0.5; // J1 zeros are ~pi apart; 0.5 cannot skip one
    double a = 1e-12, fa = cyl_j1(a);
    for (double b = step; a < x_max; a = b, b += step) {
        if (b > x_max) b = x_max;
        double fb = cyl_j1(b);
        if (fa == 0.0) zeros.push_back(a);
        else if (fa * fb < 0.0) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 50; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = cyl_j1(mid);
                if (flo * fm <= 0.0) hi = mid;
                else { lo = mid; flo = fm; }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        fa = fb;
        if (a == x_max) break;
    }
    return zeros;
}

} // namespace spintrap

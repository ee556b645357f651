#pragma once

#include <cmath>
#include <numbers>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace detail {

// Power series for J0 carried in long double; the alternating terms peak
// near e^x / (pi x), so the extra precision keeps the absolute error below
// 1e-12 up to the switch point.
inline double bessel_j0_series(double x) {
    const long double q = -0.25L * static_cast<long double>(x) * x;
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 400; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum) && std::abs(term) < 1e-22L) break;
    }
    return static_cast<double>(sum);
}

// Hankel asymptotic expansion, truncated at its smallest term.
inline double bessel_j0_asymptotic(double x) {
    // a_k = prod_{i=1..k} (-(2i-1)^2) / (k! 8^k); P takes even k, Q odd k.
    double p = 0.0, q = 0.0;
    double a = 1.0;  // a_0
    double xpow = 1.0;
    double last = INFINITY;
    for (int k = 0; k < 200; ++k) {
        const double term = a / xpow;
        if (std::abs(term) > last) break;
        last = std::abs(term);
        switch (k % 4) {
            case 0: p += term; break;
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
        }
        if (last < 1e-18) break;
        const double odd = 2.0 * k + 1.0;
        a *= -(odd * odd) / ((k + 1.0) * 8.0);
        xpow *= x;
    }
    // cos(x - pi/4) and sin(x - pi/4) without forming x - pi/4.
    const double c = std::cos(x), s = std::sin(x);
    const double cchi = (c + s) * std::numbers::sqrt2 / 2.0;
    const double schi = (s - c) * std::numbers::sqrt2 / 2.0;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cchi - q * schi);
}

}  // namespace detail

// Bessel function of the first kind, order zero.
inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x <= 17.0) return detail::bessel_j0_series(x);
    return detail::bessel_j0_asymptotic(x);
}

// Legendre polynomial P_k(x) by the Bonnet three-term recurrence.
inline double legendre_p(int k, double x) {
    if (k < 0) throw InvalidArgument("legendre_p: negative degree");
    if (k == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int n = 1; n < k; ++n) {
        const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// P_k(0) from the same recurrence specialised to x = 0:
// P_{n+1}(0) = -n/(n+1) P_{n-1}(0).
inline double legendre_p_at_zero(int k) {
    if (k < 0) throw InvalidArgument("legendre_p_at_zero: negative degree");
    if (k % 2 == 1) return 0.0;
    double p = 1.0;
    for (int n = 1; n < k; n += 2) p *= -static_cast<double>(n) / (n + 1.0);
    return p;
}

}  // namespace curvlab

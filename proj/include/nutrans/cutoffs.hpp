#pragma once

#include <cmath>

namespace nutrans {

/// Value with first and second derivative.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

namespace detail {

// psi(u) = exp(-1/u) for u > 0, with its first two derivatives.
inline Jet psi(double u)
{
    if (u <= 0.0)
        return {};
    const double e = std::exp(-1.0 / u);
    const double u2 = u * u;
    return {e, e / u2, e * (1.0 / (u2 * u2) - 2.0 / (u2 * u))};
}

} // namespace detail

/// Smooth transition h(u) = psi(u) / (psi(u) + psi(1-u)): 0 for u <= 0, 1 for u >= 1.
inline Jet transition(double u)
{
    if (u <= 0.0)
        return {0.0, 0.0, 0.0};
    if (u >= 1.0)
        return {1.0, 0.0, 0.0};
    const Jet a = detail::psi(u);
    const Jet b = detail::psi(1.0 - u);
    // derivatives of b with respect to u
    const double b1 = -b.d1;
    const double b2 = b.d2;
    const double S = a.value + b.value;
    const double S1 = a.d1 + b1;
    const double N = a.d1 * b.value - a.value * b1;
    const double N1 = a.d2 * b.value - a.value * b2;
    Jet h;
    h.value = a.value / S;
    h.d1 = N / (S * S);
    h.d2 = (N1 * S - 2.0 * N * S1) / (S * S * S);
    return h;
}

/// zeta(t) = h(3t - 1): 0 for t <= 1/3, 1 for t >= 2/3.
inline Jet zeta(double t)
{
    const Jet h = transition(3.0 * t - 1.0);
    return {h.value, 3.0 * h.d1, 9.0 * h.d2};
}

/// Plateau cutoff phi(x) = h(4 (5/4 - |x|)): 1 on [-1,1], 0 outside (-5/4,5/4).
inline Jet plateau(double x)
{
    const double ax = std::abs(x);
    const Jet h = transition(4.0 * (1.25 - ax));
    const double sg = x < 0.0 ? -1.0 : 1.0;
    return {h.value, -4.0 * sg * h.d1, 16.0 * h.d2};
}

/// Sup of zeta' over the real line, attained at t = 1/2 by symmetry of h.
inline double zeta_slope_max() { return zeta(0.5).d1; }

} // namespace nutrans

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace nutrans {

template <int D>
using Vec = std::array<double, D>;

template <int D>
using Mat = std::array<std::array<double, D>, D>;

/// Raised on arguments outside an operation's domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A velocity value together with its spatial Jacobian J[a][b] = d v_a / d x_b.
template <int D>
struct FieldSample {
    Vec<D> v{};
    Mat<D> J{};

    static FieldSample zero() { return FieldSample{}; }

    FieldSample& scale(double value_factor, double jacobian_factor)
    {
        for (int a = 0; a < D; ++a) {
            v[a] *= value_factor;
            for (int b = 0; b < D; ++b)
                J[a][b] *= jacobian_factor;
        }
        return *this;
    }

    double trace() const
    {
        double s = 0.0;
        for (int a = 0; a < D; ++a)
            s += J[a][a];
        return s;
    }

    /// Entrywise l2 (Frobenius) magnitude of the Jacobian.
    double jacobian_norm() const
    {
        double s = 0.0;
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b)
                s += J[a][b] * J[a][b];
        return std::sqrt(s);
    }

    bool is_zero() const
    {
        for (int a = 0; a < D; ++a) {
            if (v[a] != 0.0)
                return false;
            for (int b = 0; b < D; ++b)
                if (J[a][b] != 0.0)
                    return false;
        }
        return true;
    }
};

template <std::size_t N>
inline double norm2(const std::array<double, N>& x)
{
    double s = 0.0;
    for (double c : x)
        s += c * c;
    return std::sqrt(s);
}

template <std::size_t N>
inline double norm_inf(const std::array<double, N>& x)
{
    double s = 0.0;
    for (double c : x)
        s = std::max(s, std::abs(c));
    return s;
}

template <std::size_t N>
inline std::array<double, N> operator+(std::array<double, N> a, const std::array<double, N>& b)
{
    for (std::size_t l = 0; l < N; ++l)
        a[l] += b[l];
    return a;
}

template <std::size_t N>
inline std::array<double, N> operator-(std::array<double, N> a, const std::array<double, N>& b)
{
    for (std::size_t l = 0; l < N; ++l)
        a[l] -= b[l];
    return a;
}

template <std::size_t N>
inline std::array<double, N> operator*(double c, std::array<double, N> a)
{
    for (std::size_t l = 0; l < N; ++l)
        a[l] *= c;
    return a;
}

template <std::size_t N>
inline double dot(const std::array<double, N>& a, const std::array<double, N>& b)
{
    double s = 0.0;
    for (std::size_t l = 0; l < N; ++l)
        s += a[l] * b[l];
    return s;
}

template <std::size_t N>
inline std::array<double, N> filled(double c)
{
    std::array<double, N> x;
    x.fill(c);
    return x;
}

} // namespace nutrans

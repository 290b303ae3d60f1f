#pragma once

#include <nutrans/linalg.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <type_traits>
#include <string>

namespace nutrans {

/// Axis-aligned cube; membership is the closed box.
template <int D>
struct Cube {
    Vec<D> center{};
    double side = 1.0;

    Cube() = default;
    Cube(const Vec<D>& c, double ell) : center(c), side(ell)
    {
        if (!(ell > 0.0))
            throw DomainError("cube side must be positive");
    }

    double volume() const { return std::pow(side, D); }
};

template <int D>
inline bool cube_contains(const Cube<D>& c, const std::type_identity_t<Vec<D>>& x)
{
    const double h = 0.5 * c.side;
    for (int l = 0; l < D; ++l)
        if (!(std::abs(x[l] - c.center[l]) <= h))
            return false;
    return true;
}

/// Largest generation whose digits fit comfortably in 64-bit integers.
inline constexpr int max_digit_generation = 62;

template <int D>
using Digits = std::array<std::int64_t, D>;

/// Generation-eta cell index k in {1..2^{eta d}} together with its base-2^eta digits.
template <int D>
struct DyadicIndex {
    int generation = 1;
    std::uint64_t k = 1;
    Digits<D> digits{};
};

namespace detail {

inline void check_generation(int eta, int d)
{
    if (eta < 1)
        throw DomainError("generation must be positive");
    if (static_cast<long>(eta) * d > max_digit_generation)
        throw DomainError("generation too deep for 64-bit cell indices");
}

inline double pow2i(int e) { return std::ldexp(1.0, e); }

} // namespace detail

template <int D>
inline std::uint64_t cell_count(int eta)
{
    detail::check_generation(eta, D);
    return std::uint64_t{1} << (eta * D);
}

template <int D>
inline DyadicIndex<D> dyadic_index(int eta, std::uint64_t k)
{
    if (k < 1 || k > cell_count<D>(eta))
        throw DomainError("cell index k out of range");
    DyadicIndex<D> out;
    out.generation = eta;
    out.k = k;
    std::uint64_t rest = k - 1;
    const std::uint64_t mask = (std::uint64_t{1} << eta) - 1;
    for (int l = 0; l < D; ++l) {
        out.digits[l] = static_cast<std::int64_t>(rest & mask);
        rest >>= eta;
    }
    return out;
}

template <int D>
inline std::uint64_t index_of_digits(int eta, const Digits<D>& j)
{
    detail::check_generation(eta, D);
    std::uint64_t k = 0;
    for (int l = D - 1; l >= 0; --l)
        k = (k << eta) | static_cast<std::uint64_t>(j[l]);
    return k + 1;
}

/// Center of the generation-eta cell with the given digits (any eta up to 62).
template <int D>
inline Vec<D> center_of_digits(int eta, const Digits<D>& j)
{
    const double cells = detail::pow2i(eta);
    Vec<D> c;
    for (int l = 0; l < D; ++l)
        c[l] = (static_cast<double>(j[l]) + 0.5) / cells - 0.5;
    return c;
}

/// c_k^eta: center of the k-th generation-eta cell of [-1/2,1/2]^d.
template <int D>
inline Vec<D> center_of_index(int eta, std::uint64_t k)
{
    return center_of_digits<D>(eta, dyadic_index<D>(eta, k).digits);
}

/// Digits of the half-open generation-eta cell containing x, or nothing outside [-1/2,1/2)^d.
/// Works per coordinate, so eta is only limited by 64-bit digits.
template <int D>
inline std::optional<Digits<D>> cell_digits(int eta, const Vec<D>& x)
{
    if (eta < 0 || eta > max_digit_generation)
        throw DomainError("generation out of range");
    const double cells = detail::pow2i(eta);
    const auto top = static_cast<std::int64_t>(cells) - 1;
    Digits<D> j;
    for (int l = 0; l < D; ++l) {
        if (!(x[l] >= -0.5 && x[l] < 0.5))
            return std::nullopt;
        auto jl = static_cast<std::int64_t>(std::floor((x[l] + 0.5) * cells));
        j[l] = std::clamp<std::int64_t>(jl, 0, top);
    }
    return j;
}

template <int D>
inline std::optional<std::uint64_t> index_of_point(int eta, const Vec<D>& x)
{
    detail::check_generation(eta, D);
    auto j = cell_digits<D>(eta, x);
    if (!j)
        return std::nullopt;
    return index_of_digits<D>(eta, *j);
}

/// Center of the half-open generation-eta cell containing x.
template <int D>
inline std::optional<Vec<D>> cell_center(int eta, const Vec<D>& x)
{
    auto j = cell_digits<D>(eta, x);
    if (!j)
        return std::nullopt;
    return center_of_digits<D>(eta, *j);
}

/// The closed cube Q(c, 1) = [-1/2,1/2]^d shifted to c.
template <int D>
inline Cube<D> unit_cube()
{
    return Cube<D>(Vec<D>{}, 1.0);
}

template <int D>
inline bool in_unit_cube(const Vec<D>& x)
{
    for (int l = 0; l < D; ++l)
        if (!(std::abs(x[l]) <= 0.5))
            return false;
    return true;
}

} // namespace nutrans

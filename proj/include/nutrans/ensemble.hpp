#pragma once

#include <nutrans/geometry.hpp>
#include <nutrans/linalg.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

namespace nutrans {

/// The number 2^{base2 + nu * nu_mult}; products stay exact in the exponents.
struct Pow2 {
    std::int64_t base2 = 0;
    std::int64_t nu_mult = 0;

    double value(double nu) const
    {
        return std::exp2(static_cast<double>(base2) + static_cast<double>(nu_mult) * nu);
    }

    Pow2 operator*(const Pow2& o) const { return {base2 + o.base2, nu_mult + o.nu_mult}; }
    Pow2 pow(std::int64_t n) const { return {base2 * n, nu_mult * n}; }

    auto operator<=>(const Pow2&) const = default;
};

/// Constant-value cube. Side and value are exact powers tagged by Pow2 exponents.
template <int D>
struct ValuedCube {
    Vec<D> center{};
    Pow2 side_exp{};
    Pow2 value_exp{};
    double side = 1.0;
    double value = 1.0;

    Cube<D> cube() const { return Cube<D>(center, side); }
    double volume() const { return std::pow(side, D); }
};

template <int D>
ValuedCube<D> make_valued_cube(const Vec<D>& center, Pow2 side_exp, Pow2 value_exp, double nu)
{
    ValuedCube<D> c;
    c.center = center;
    c.side_exp = side_exp;
    c.value_exp = value_exp;
    c.side = side_exp.value(nu);
    c.value = value_exp.value(nu);
    return c;
}

/// Disjoint list of constant-value cubes; nu is the irrational exponent used by the tags.
template <int D>
struct CubeEnsemble {
    double nu = 0.0;
    std::vector<ValuedCube<D>> cubes;

    std::size_t size() const { return cubes.size(); }
    bool empty() const { return cubes.empty(); }

    void add(const Vec<D>& center, Pow2 side_exp, Pow2 value_exp)
    {
        cubes.push_back(make_valued_cube<D>(center, side_exp, value_exp, nu));
    }

    /// Append the ensemble `sub` pulled back by x = origin + y * 2^{zoom_exp}^{-1}, values times 2^{value_exp}.
    void append_scaled(const CubeEnsemble& sub, const Vec<D>& origin, Pow2 zoom_exp, Pow2 value_exp)
    {
        const Pow2 shrink{-zoom_exp.base2, -zoom_exp.nu_mult};
        const double inv = shrink.value(nu);
        cubes.reserve(cubes.size() + sub.size());
        for (const auto& c : sub.cubes) {
            Vec<D> x;
            for (int l = 0; l < D; ++l)
                x[l] = origin[l] + inv * c.center[l];
            cubes.push_back(make_valued_cube<D>(x, c.side_exp * shrink, c.value_exp * value_exp, nu));
        }
    }

    /// Value at x: the first containing cube, 0 if none.
    double value_at(const Vec<D>& x) const
    {
        for (const auto& c : cubes)
            if (cube_contains(c.cube(), x))
                return c.value;
        return 0.0;
    }
};

/// Multiset of (value, side) pairs: enough for all integral norms, without geometry.
template <int D>
struct VolumeProfile {
    double nu = 0.0;
    std::map<std::pair<Pow2, Pow2>, double> counts; // (value_exp, side_exp) -> count

    void add(Pow2 value_exp, Pow2 side_exp, double count)
    {
        counts[{value_exp, side_exp}] += count;
    }

    void merge_scaled(const VolumeProfile& sub, Pow2 value_exp, Pow2 side_exp, double count)
    {
        for (const auto& [key, n] : sub.counts)
            add(key.first * value_exp, key.second * side_exp, n * count);
    }

    double cube_count() const
    {
        double n = 0.0;
        for (const auto& kv : counts)
            n += kv.second;
        return n;
    }
};

template <int D>
VolumeProfile<D> profile_of(const CubeEnsemble<D>& ens)
{
    VolumeProfile<D> p;
    p.nu = ens.nu;
    for (const auto& c : ens.cubes)
        p.add(c.value_exp, c.side_exp, 1.0);
    return p;
}

namespace detail {

/// Exact sum of count * 2^e over integer exponents by binary carry propagation.
class DyadicAccumulator {
public:
    void add(std::int64_t e, std::uint64_t count) { bits_[e] += count; }

    double value() const
    {
        std::map<std::int64_t, std::uint64_t> work(bits_.begin(), bits_.end());
        // carry upward until every exponent holds 0 or 1
        for (auto it = work.begin(); it != work.end(); ++it) {
            const std::uint64_t carry = it->second >> 1;
            it->second &= 1u;
            if (carry)
                work[it->first + 1] += carry;
        }
        // sum from the smallest exponent up; the result is exact while it fits 53 bits
        double s = 0.0;
        for (const auto& [e, b] : work)
            if (b)
                s += std::ldexp(1.0, static_cast<int>(e));
        return s;
    }

private:
    std::map<std::int64_t, std::uint64_t> bits_;
};

} // namespace detail

/**
 * Sum of value * volume. Cubes whose value*volume has no nu component contribute
 * exact dyadic rationals and are summed without rounding.
 */
template <int D>
double mass(const VolumeProfile<D>& prof)
{
    detail::DyadicAccumulator exact;
    double rest = 0.0;
    for (const auto& [key, n] : prof.counts) {
        const Pow2 m = key.first * key.second.pow(D);
        if (m.nu_mult == 0 && n == std::floor(n) && n < 1.8e19)
            exact.add(m.base2, static_cast<std::uint64_t>(n));
        else
            rest += n * m.value(prof.nu);
    }
    return exact.value() + rest;
}

template <int D>
double mass(const CubeEnsemble<D>& ens)
{
    return mass<D>(profile_of<D>(ens));
}

/// (sum value^r volume)^{1/r}.
template <int D>
double lr_norm_exact(const VolumeProfile<D>& prof, double r)
{
    if (!(r >= 1.0))
        throw DomainError("exponent r must be >= 1");
    long double s = 0.0L;
    for (const auto& [key, n] : prof.counts) {
        // combine exponents first so huge values and tiny volumes never overflow
        const double e = r * (static_cast<double>(key.first.base2) + static_cast<double>(key.first.nu_mult) * prof.nu)
                         + D * (static_cast<double>(key.second.base2) + static_cast<double>(key.second.nu_mult) * prof.nu);
        s += static_cast<long double>(n) * static_cast<long double>(std::exp2(e));
    }
    return std::pow(static_cast<double>(s), 1.0 / r);
}

template <int D>
double lr_norm_exact(const CubeEnsemble<D>& ens, double r)
{
    return lr_norm_exact<D>(profile_of<D>(ens), r);
}

/// Largest value present.
template <int D>
double max_value(const VolumeProfile<D>& prof)
{
    double m = 0.0;
    for (const auto& kv : prof.counts)
        m = std::max(m, kv.first.first.value(prof.nu));
    return m;
}

/**
 * @brief Uniform-bucket point index over an ensemble.
 *
 * Each cube is registered in every bucket its closed box meets, so a lookup only
 * scans one bucket.
 */
template <int D>
class EnsembleIndex {
public:
    explicit EnsembleIndex(const CubeEnsemble<D>& ens, int buckets_per_axis = 0) : ens_(&ens)
    {
        n_ = buckets_per_axis;
        if (n_ <= 0) {
            const double target = std::pow(static_cast<double>(std::max<std::size_t>(ens.size(), 1)), 1.0 / D);
            n_ = std::clamp(static_cast<int>(std::ceil(target)), 1, D == 2 ? 1024 : 128);
        }
        std::size_t total = 1;
        for (int l = 0; l < D; ++l)
            total *= static_cast<std::size_t>(n_);
        buckets_.assign(total, {});
        lo_ = filled<D>(-0.5);
        hi_ = filled<D>(0.5);
        for (const auto& c : ens.cubes)
            for (int l = 0; l < D; ++l) {
                lo_[l] = std::min(lo_[l], c.center[l] - 0.5 * c.side);
                hi_[l] = std::max(hi_[l], c.center[l] + 0.5 * c.side);
            }
        for (std::size_t idx = 0; idx < ens.cubes.size(); ++idx) {
            const auto& c = ens.cubes[idx];
            std::array<int, D> a{}, b{};
            for (int l = 0; l < D; ++l) {
                a[l] = bucket(l, c.center[l] - 0.5 * c.side);
                b[l] = bucket(l, c.center[l] + 0.5 * c.side);
            }
            std::array<int, D> j = a;
            while (true) {
                buckets_[flat(j)].push_back(static_cast<std::uint32_t>(idx));
                int l = 0;
                for (; l < D; ++l) {
                    if (++j[l] <= b[l])
                        break;
                    j[l] = a[l];
                }
                if (l == D)
                    break;
            }
        }
    }

    double value_at(const Vec<D>& x) const
    {
        std::array<int, D> j;
        for (int l = 0; l < D; ++l) {
            if (x[l] < lo_[l] || x[l] > hi_[l])
                return 0.0;
            j[l] = bucket(l, x[l]);
        }
        for (auto idx : buckets_[flat(j)]) {
            const auto& c = ens_->cubes[idx];
            if (cube_contains(c.cube(), x))
                return c.value;
        }
        return 0.0;
    }

private:
    int bucket(int l, double x) const
    {
        const double u = (x - lo_[l]) / (hi_[l] - lo_[l]);
        return std::clamp(static_cast<int>(std::floor(u * n_)), 0, n_ - 1);
    }

    std::size_t flat(const std::array<int, D>& j) const
    {
        std::size_t f = 0;
        for (int l = D - 1; l >= 0; --l)
            f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j[l]);
        return f;
    }

    const CubeEnsemble<D>* ens_;
    int n_ = 1;
    Vec<D> lo_{}, hi_{};
    std::vector<std::vector<std::uint32_t>> buckets_;
};

} // namespace nutrans

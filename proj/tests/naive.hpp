#pragma once

// Straight recursive transcriptions of the two constructions, used as a cross-check
// for the unrolled evaluators. Cells are located with plain floor arithmetic and all
// factors are recomputed with pow at every level.

#include <nutrans/blocks.hpp>
#include <nutrans/construction_l1.hpp>
#include <nutrans/construction_lr.hpp>

#include <cmath>
#include <optional>

namespace naive {

using nutrans::Vec;

template <int D>
std::optional<Vec<D>> cell_of(int gen, const Vec<D>& x)
{
    const double n = std::pow(2.0, gen);
    Vec<D> c;
    for (int l = 0; l < D; ++l) {
        if (x[l] < -0.5 || x[l] >= 0.5)
            return std::nullopt;
        const double j = std::min(std::floor((x[l] + 0.5) * n), n - 1);
        c[l] = (j + 0.5) / n - 0.5;
    }
    return c;
}

template <int D>
bool inside(const Vec<D>& x, const Vec<D>& c, double side)
{
    for (int l = 0; l < D; ++l)
        if (std::abs(x[l] - c[l]) > side / 2)
            return false;
    return true;
}

template <int D>
Vec<D> zoom(const Vec<D>& x, const Vec<D>& c, double z)
{
    Vec<D> y;
    for (int l = 0; l < D; ++l)
        y[l] = z * (x[l] - c[l]);
    return y;
}

inline int l1_interval(double beta, double t)
{
    int i = 1;
    while (t >= 1.0 - std::pow(2.0, -beta * i))
        ++i;
    return i;
}

template <int D>
nutrans::FieldSample<D> l1_velocity(double t, const Vec<D>& x, const nutrans::L1Params& p, int depth)
{
    if (depth == 0 || t >= 1.0)
        return {};
    const int i = l1_interval(p.beta, t);
    const double tau = 1.0 - std::pow(2.0, -p.beta * (i - 1));
    const double next = 1.0 - std::pow(2.0, -p.beta * i);
    const double mid = 0.5 * (tau + next);
    const auto c = cell_of<D>(i, x);
    if (!c)
        return {};
    if (t < mid) {
        const double z = std::pow(2.0, (1.0 + p.nu) * i);
        auto f = l1_velocity<D>((mid - t) / (mid - tau), zoom<D>(x, *c, z), p, depth - 1);
        const double a = -1.0 / (z * (mid - tau));
        return f.scale(a, a * z);
    }
    const double z = std::pow(2.0, i);
    const nutrans::BlockParams bp(1, std::pow(2.0, -p.nu * i), std::pow(2.0, -p.nu * (i + 1)));
    auto f = nutrans::block_velocity<D>((t - mid) / (next - mid), zoom<D>(x, *c, z), bp);
    const double a = 1.0 / (z * (next - mid));
    return f.scale(a, a * z);
}

template <int D>
double l1_density(double t, const Vec<D>& x, const nutrans::L1Params& p, int depth)
{
    const auto c0 = cell_of<D>(0, x);
    if (!c0)
        return 0.0;
    if (depth == 0)
        return p.base == nutrans::DensityBase::Freeze ? 1.0 : 0.0;
    if (t >= 1.0)
        return 1.0;
    const int i = l1_interval(p.beta, t);
    const double tau = 1.0 - std::pow(2.0, -p.beta * (i - 1));
    const double next = 1.0 - std::pow(2.0, -p.beta * i);
    const double mid = 0.5 * (tau + next);
    const auto c = cell_of<D>(i, x);
    if (t < mid)
        return std::pow(2.0, p.nu * D * i)
               * l1_density<D>((mid - t) / (mid - tau), zoom<D>(x, *c, std::pow(2.0, (1.0 + p.nu) * i)), p, depth - 1);
    const nutrans::BlockParams bp(1, std::pow(2.0, -p.nu * i), std::pow(2.0, -p.nu * (i + 1)));
    return std::pow(2.0, p.nu * D * (i + 1))
           * nutrans::block_density<D>((t - mid) / (next - mid), zoom<D>(x, *c, std::pow(2.0, i)), bp);
}

struct Slot {
    int k;
    double t1, mid, t2, end;
};

inline Slot lr_slot(double beta, int eta, int d, double t)
{
    const double n = std::pow(2.0, eta * d);
    int k = static_cast<int>(std::floor(t * n)) + 1;
    k = std::min(k, static_cast<int>(n));
    Slot s{k, (k - 1) / n, 0.0, (k - std::pow(2.0, -beta)) / n, k / n};
    s.mid = 0.5 * (s.t1 + s.t2);
    return s;
}

template <int D>
Vec<D> lr_center(int eta, int k)
{
    // k - 1 = sum_l 2^{eta l} j_l
    const int n = 1 << eta;
    int r = k - 1;
    Vec<D> c;
    for (int l = 0; l < D; ++l) {
        c[l] = ((r % n) - (n - 1) / 2.0) / n;
        r /= n;
    }
    return c;
}

template <int D>
nutrans::FieldSample<D> lr_velocity(int i, double t, const Vec<D>& x, const nutrans::LrParams& p, int depth)
{
    if (depth == 0 || t >= 1.0)
        return {};
    const Slot s = lr_slot(p.beta, p.eta, D, t);
    const Vec<D> c = lr_center<D>(p.eta, s.k);
    if (!inside<D>(x, Vec<D>{}, 1.0) || !inside<D>(x, c, std::pow(2.0, -p.eta)))
        return {};
    if (t < s.mid) {
        const double z = std::pow(2.0, p.eta + p.nu * i);
        auto f = lr_velocity<D>(1, (s.mid - t) / (s.mid - s.t1), zoom<D>(x, c, z), p, depth - 1);
        const double a = p.t1_sign / (z * (s.mid - s.t1));
        return f.scale(a, a * z);
    }
    const double z = std::pow(2.0, p.eta);
    if (t < s.t2) {
        const nutrans::BlockParams bp(p.eta, std::pow(2.0, -p.nu * i), std::pow(2.0, -p.nu * (i + 1)));
        auto f = nutrans::block_velocity<D>((t - s.mid) / (s.t2 - s.mid), zoom<D>(x, c, z), bp);
        const double a = 1.0 / (z * (s.t2 - s.mid));
        return f.scale(a, a * z);
    }
    auto f = lr_velocity<D>(i + 1, (t - s.t2) / (s.end - s.t2), zoom<D>(x, c, z), p, depth - 1);
    const double a = 1.0 / (z * (s.end - s.t2));
    return f.scale(a, a * z);
}

template <int D>
double lr_density(int i, double t, const Vec<D>& x, const nutrans::LrParams& p, int depth)
{
    if (!inside<D>(x, Vec<D>{}, 1.0))
        return 0.0;
    if (depth == 0)
        return p.base == nutrans::DensityBase::Freeze ? 1.0 : 0.0;
    if (t >= 1.0)
        return 1.0;
    const Slot s = lr_slot(p.beta, p.eta, D, t);
    const Vec<D> c = lr_center<D>(p.eta, s.k);
    if (!inside<D>(x, c, std::pow(2.0, -p.eta))) {
        const auto other = cell_of<D>(p.eta, x);
        if (!other)
            return 0.0;
        // index of the other cell
        const int n = 1 << p.eta;
        int k = 0;
        for (int l = D - 1; l >= 0; --l)
            k = k * n + static_cast<int>(std::lround(((*other)[l] + 0.5) * n - 0.5));
        ++k;
        if (k < s.k)
            return 1.0;
        return inside<D>(x, *other, std::pow(2.0, -(p.eta + p.nu * i))) ? std::pow(2.0, p.nu * D * i) : 0.0;
    }
    if (t < s.mid)
        return std::pow(2.0, p.nu * D * i)
               * lr_density<D>(1, (s.mid - t) / (s.mid - s.t1), zoom<D>(x, c, std::pow(2.0, p.eta + p.nu * i)), p,
                               depth - 1);
    const double z = std::pow(2.0, p.eta);
    if (t < s.t2) {
        const nutrans::BlockParams bp(p.eta, std::pow(2.0, -p.nu * i), std::pow(2.0, -p.nu * (i + 1)));
        return std::pow(2.0, p.nu * D * (i + 1))
               * nutrans::block_density<D>((t - s.mid) / (s.t2 - s.mid), zoom<D>(x, c, z), bp);
    }
    return lr_density<D>(i + 1, (t - s.t2) / (s.end - s.t2), zoom<D>(x, c, z), p, depth - 1);
}

} // namespace naive

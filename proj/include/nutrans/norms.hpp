#pragma once

#include <nutrans/ensemble.hpp>
#include <nutrans/geometry.hpp>
#include <nutrans/linalg.hpp>
#include <nutrans/quadrature.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace nutrans {

/// Midpoint-rule L^r norm of a pointwise scalar field over a cube.
template <int D, class F>
double lr_norm_grid(F&& f, double r, int resolution, const Cube<D>& domain = unit_cube<D>())
{
    if (!(r >= 1.0))
        throw DomainError("exponent r must be >= 1");
    long double s = 0.0L;
    const double vol = for_each_midpoint<D>(domain, resolution, [&](const Vec<D>& x) {
        const double v = std::abs(f(x));
        if (v != 0.0)
            s += std::pow(static_cast<long double>(v), static_cast<long double>(r));
    });
    return std::pow(static_cast<double>(s * vol), 1.0 / r);
}

/// Midpoint-rule homogeneous W^{1,p} seminorm: L^p norm of the Frobenius magnitude of J.
template <int D, class F>
double w1p_seminorm_grid(F&& field, double p, int resolution, const Cube<D>& domain = unit_cube<D>())
{
    if (!(p >= 1.0))
        throw DomainError("exponent p must be >= 1");
    long double s = 0.0L;
    const double vol = for_each_midpoint<D>(domain, resolution, [&](const Vec<D>& x) {
        const double g = field(x).jacobian_norm();
        if (g != 0.0)
            s += std::pow(static_cast<long double>(g), static_cast<long double>(p));
    });
    return std::pow(static_cast<double>(s * vol), 1.0 / p);
}

/**
 * W^{1,p} seminorm by Gauss quadrature over a list of disjoint cubes that contain the
 * support of the field. Each cube is split into `panels` per axis.
 */
template <int D, class F>
double w1p_seminorm_on_cubes(F&& field, double p, const std::vector<Cube<D>>& cubes, int panels = 8)
{
    if (!(p >= 1.0))
        throw DomainError("exponent p must be >= 1");
    long double s = 0.0L;
    for (const auto& c : cubes)
        for_each_gauss_node<D>(c, panels, [&](const Vec<D>& x, double w) {
            const double g = field(x).jacobian_norm();
            if (g != 0.0)
                s += static_cast<long double>(w) * std::pow(static_cast<long double>(g), static_cast<long double>(p));
        });
    return std::pow(static_cast<double>(s), 1.0 / p);
}

/**
 * @brief Lower estimate of the space-time C^alpha seminorm of a vector field.
 *
 * Pair j uses a base point from a fixed pseudo-random stream and an offset of length
 * 2^{-(j mod 24)}; the first pairs per scale are axis-aligned. Because the pair sequence
 * is fixed, the estimate is nondecreasing in the sample count.
 * f(t, x) returns any container indexable by [0, D).
 */
template <int D, class F>
double holder_estimate(F&& f, double alpha, std::size_t samples, std::uint64_t seed = 7)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("Hoelder exponent must lie in (0,1]");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
        const double len = std::ldexp(1.0, -static_cast<int>(j % 24));
        // direction in (t, x) space
        std::array<double, D + 1> dir{};
        const std::size_t axis_slot = (j / 24) % (D + 3);
        if (axis_slot <= static_cast<std::size_t>(D)) {
            dir[axis_slot] = 1.0;
        } else {
            double nn = 0.0;
            for (auto& c : dir) {
                c = gauss(gen);
                nn += c * c;
            }
            nn = std::sqrt(nn);
            for (auto& c : dir)
                c /= nn;
        }
        double t0 = unit(gen);
        Vec<D> x0;
        for (int l = 0; l < D; ++l)
            x0[l] = unit(gen) - 0.5;
        double t1 = t0 + len * dir[0];
        Vec<D> x1;
        for (int l = 0; l < D; ++l)
            x1[l] = x0[l] + len * dir[l + 1];
        if (t1 < 0.0 || t1 > 1.0) {
            t1 = t0 - len * dir[0];
            for (int l = 0; l < D; ++l)
                x1[l] = x0[l] - len * dir[l + 1];
        }
        if (t1 < 0.0 || t1 > 1.0)
            continue;
        const auto a = f(t0, x0);
        const auto b = f(t1, x1);
        double diff = 0.0;
        for (int l = 0; l < D; ++l)
            diff += (a[l] - b[l]) * (a[l] - b[l]);
        double dist = (t1 - t0) * (t1 - t0);
        for (int l = 0; l < D; ++l)
            dist += (x1[l] - x0[l]) * (x1[l] - x0[l]);
        if (dist == 0.0)
            continue;
        best = std::max(best, std::sqrt(diff) / std::pow(std::sqrt(dist), alpha));
    }
    return best;
}

/// Max |trace J| of an analytic-Jacobian field over the given points.
template <int D, class F>
double divergence_check(F&& field, const std::vector<Vec<D>>& points)
{
    double m = 0.0;
    for (const auto& x : points)
        m = std::max(m, std::abs(field(x).trace()));
    return m;
}

/// Central-difference divergence at x with step h; divides by the representable step actually taken.
template <int D, class F>
double fd_divergence_at(F&& field, const Vec<D>& x, double h)
{
    double div = 0.0;
    for (int l = 0; l < D; ++l) {
        Vec<D> xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        div += (field(xp).v[l] - field(xm).v[l]) / (xp[l] - xm[l]);
    }
    return div;
}

struct FiniteDifferenceDivergence {
    double worst_ratio = 0.0;  ///< max |div_fd| / |J| over points with J != 0
    double worst_abs = 0.0;
    std::size_t checked = 0;
};

/**
 * Central-difference divergence. The step is rel_step times the local length |v|/|J|
 * (capped at 1), so deep rescaled fields are resolved at their own scale.
 */
template <int D, class F>
FiniteDifferenceDivergence fd_divergence_check(F&& field, const std::vector<Vec<D>>& points, double rel_step = 1e-5)
{
    FiniteDifferenceDivergence out;
    for (const auto& x : points) {
        const auto f0 = field(x);
        const double g = f0.jacobian_norm();
        if (g == 0.0)
            continue;
        const double len = std::min(1.0, norm2<D>(f0.v) / g);
        const double h = rel_step * (len > 0.0 ? len : 1.0);
        double div = 0.0;
        for (int l = 0; l < D; ++l) {
            Vec<D> xp = x, xm = x;
            xp[l] += h;
            xm[l] -= h;
            div += (field(xp).v[l] - field(xm).v[l]) / (2.0 * h);
        }
        out.worst_abs = std::max(out.worst_abs, std::abs(div));
        out.worst_ratio = std::max(out.worst_ratio, std::abs(div) / g);
        ++out.checked;
    }
    return out;
}

} // namespace nutrans

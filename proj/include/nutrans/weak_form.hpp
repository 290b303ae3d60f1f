#pragma once

#include <nutrans/cutoffs.hpp>
#include <nutrans/ensemble.hpp>
#include <nutrans/geometry.hpp>
#include <nutrans/linalg.hpp>
#include <nutrans/quadrature.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace nutrans {

/// Smooth test function with gradient; sup_grad is the sup of |grad| over the unit cube.
template <int D>
struct TestFunction {
    std::string name;
    std::function<double(const Vec<D>&)> value;
    std::function<Vec<D>(const Vec<D>&)> gradient;
    double sup_grad = 0.0;
};

namespace detail {

// Polynomial/trigonometric factor g with gradient, multiplied by the bump prod phi(x_l).
template <int D>
TestFunction<D> with_bump(std::string name, std::function<double(const Vec<D>&)> g,
                          std::function<Vec<D>(const Vec<D>&)> dg)
{
    TestFunction<D> tf;
    tf.name = std::move(name);
    tf.value = [g](const Vec<D>& x) {
        double b = 1.0;
        for (int l = 0; l < D; ++l)
            b *= plateau(x[l]).value;
        return b == 0.0 ? 0.0 : b * g(x);
    };
    tf.gradient = [g, dg](const Vec<D>& x) {
        std::array<Jet, D> ph;
        double b = 1.0;
        for (int l = 0; l < D; ++l) {
            ph[l] = plateau(x[l]);
            b *= ph[l].value;
        }
        Vec<D> out = dg(x);
        const double gv = g(x);
        for (int l = 0; l < D; ++l) {
            double db = ph[l].d1;
            for (int m = 0; m < D; ++m)
                if (m != l)
                    db *= ph[m].value;
            out[l] = b * out[l] + gv * db;
        }
        return out;
    };
    double s = 0.0;
    for_each_midpoint<D>(unit_cube<D>(), D == 2 ? 96 : 24, [&](const Vec<D>& x) {
        s = std::max(s, norm2<D>(tf.gradient(x)));
    });
    // sampled sup, padded a little
    tf.sup_grad = s * 1.05;
    return tf;
}

} // namespace detail

/**
 * Deterministic dictionary of n test functions (polynomials and trigonometric modes
 * times a bump equal to 1 on [-1,1]^d). Prefixes are stable, so a larger n only adds.
 */
template <int D>
std::vector<TestFunction<D>> test_dictionary(std::size_t n)
{
    constexpr double tau = 2.0 * std::numbers::pi;
    std::vector<TestFunction<D>> out;
    auto add = [&](std::string name, std::function<double(const Vec<D>&)> g,
                   std::function<Vec<D>(const Vec<D>&)> dg) {
        if (out.size() < n)
            out.push_back(detail::with_bump<D>(std::move(name), std::move(g), std::move(dg)));
    };
    add("x1*x2", [](const Vec<D>& x) { return x[0] * x[1]; },
        [](const Vec<D>& x) { Vec<D> g{}; g[0] = x[1]; g[1] = x[0]; return g; });
    add("x1", [](const Vec<D>& x) { return x[0]; },
        [](const Vec<D>&) { Vec<D> g{}; g[0] = 1.0; return g; });
    add("x2", [](const Vec<D>& x) { return x[1]; },
        [](const Vec<D>&) { Vec<D> g{}; g[1] = 1.0; return g; });
    add("x1^2-x2", [](const Vec<D>& x) { return x[0] * x[0] - x[1]; },
        [](const Vec<D>& x) { Vec<D> g{}; g[0] = 2.0 * x[0]; g[1] = -1.0; return g; });
    // trigonometric modes sin(2 pi m.x + phase) with a fixed list of wave vectors
    const std::vector<std::pair<std::array<int, 3>, double>> modes = {
        {{1, 0, 0}, 0.0}, {{0, 1, 0}, 0.5}, {{1, 1, 0}, 0.0},  {{2, 1, 1}, 1.0}, {{1, -2, 1}, 0.3},
        {{3, 0, 1}, 0.7}, {{0, 3, 2}, 0.2}, {{2, -3, 0}, 1.3}, {{4, 1, 1}, 0.4}, {{1, 4, -1}, 0.9},
        {{5, 2, 0}, 0.1}, {{2, 5, 1}, 1.7}, {{6, -1, 2}, 0.6}, {{3, 3, 3}, 0.8}, {{7, 2, 1}, 1.1},
    };
    for (const auto& [m, ph] : modes) {
        Vec<D> k{};
        for (int l = 0; l < D && l < 3; ++l)
            k[l] = tau * m[l];
        const double phase = ph;
        std::string name = "sin(" + std::to_string(m[0]) + "," + std::to_string(m[1]) + ")";
        add(name, [k, phase](const Vec<D>& x) { return std::sin(dot<D>(k, x) + phase); },
            [k, phase](const Vec<D>& x) { return std::cos(dot<D>(k, x) + phase) * k; });
    }
    // localized gaussians
    for (std::size_t j = 0; out.size() < n; ++j) {
        Vec<D> c;
        for (int l = 0; l < D; ++l)
            c[l] = 0.37 * std::sin(1.3 * static_cast<double>(j + 1) * (l + 1));
        const double w = 4.0 + 4.0 * static_cast<double>(j % 5);
        add("gauss" + std::to_string(j),
            [c, w](const Vec<D>& x) { const Vec<D> y = x - c; return std::exp(-w * dot<D>(y, y)); },
            [c, w](const Vec<D>& x) {
                const Vec<D> y = x - c;
                return (-2.0 * w * std::exp(-w * dot<D>(y, y))) * y;
            });
    }
    return out;
}

/// Integrals of value * g over an ensemble for several g at once; panel width 64/resolution.
template <int D, class G>
std::vector<double> integrate_on_ensemble(const CubeEnsemble<D>& ens, const std::vector<G>& fs, int resolution)
{
    std::vector<long double> acc(fs.size(), 0.0L);
    const double width = 64.0 / resolution;
    for (const auto& c : ens.cubes) {
        std::vector<long double> local(fs.size(), 0.0L);
        for_each_gauss_node<D>(c.cube(), panels_for(c.side, width), [&](const Vec<D>& x, double w) {
            for (std::size_t j = 0; j < fs.size(); ++j)
                local[j] += w * fs[j](x);
        });
        for (std::size_t j = 0; j < fs.size(); ++j)
            acc[j] += c.value * local[j];
    }
    return {acc.begin(), acc.end()};
}

/**
 * @brief A density/velocity pair to be checked against the continuity equation.
 *
 * velocity_at(t) returns a point evaluator for that time; speed(t) is the sup of |v|
 * on the density support over the whole phase containing t; same_phase(a, b) tells
 * whether [a, b] avoids every checkpoint of the recursion.
 */
template <int D>
struct TransportPair {
    std::function<CubeEnsemble<D>(double)> density;
    std::function<std::function<FieldSample<D>(const Vec<D>&)>(double)> velocity_at;
    std::function<double(double)> speed;
    std::function<bool(double, double)> same_phase;
};

struct WeakResidualOptions {
    double dt = 1e-4;
    int resolution = 1024;
    /// Sign S in d/dt int rho phi = S int rho v . grad phi; +1 follows from div(rho v).
    double sign = 1.0;
};

/**
 * Normalized residual |(I(t+dt) - I(t-dt)) / 2dt - S int rho v . grad phi| for each test,
 * divided by |rho|_1 * speed * sup|grad phi| (unnormalized when nothing moves).
 */
template <int D>
std::vector<double> weak_residuals(const TransportPair<D>& pair, const std::vector<TestFunction<D>>& tests,
                                   double t, const WeakResidualOptions& opt)
{
    if (!(t - opt.dt >= 0.0 && t + opt.dt <= 1.0))
        throw DomainError("time window leaves [0,1]");
    if (pair.same_phase && !pair.same_phase(t - opt.dt, t + opt.dt))
        throw DomainError("time window straddles a checkpoint");
    std::vector<std::function<double(const Vec<D>&)>> values;
    for (const auto& tf : tests)
        values.push_back(tf.value);
    const auto Im = integrate_on_ensemble<D>(pair.density(t - opt.dt), values, opt.resolution);
    const auto Ip = integrate_on_ensemble<D>(pair.density(t + opt.dt), values, opt.resolution);

    const CubeEnsemble<D> ens = pair.density(t);
    const auto vel = pair.velocity_at(t);
    std::vector<long double> flux(tests.size(), 0.0L);
    const double width = 64.0 / opt.resolution;
    for (const auto& c : ens.cubes) {
        for_each_gauss_node<D>(c.cube(), panels_for(c.side, width), [&](const Vec<D>& x, double w) {
            const FieldSample<D> f = vel(x);
            bool moving = false;
            for (int l = 0; l < D; ++l)
                moving = moving || f.v[l] != 0.0;
            if (!moving)
                return;
            for (std::size_t j = 0; j < tests.size(); ++j)
                flux[j] += static_cast<long double>(w * c.value) * dot<D>(f.v, tests[j].gradient(x));
        });
    }
    const double l1 = mass<D>(ens);
    const double speed = pair.speed ? pair.speed(t) : 0.0;
    std::vector<double> out(tests.size());
    for (std::size_t j = 0; j < tests.size(); ++j) {
        const double lhs = (Ip[j] - Im[j]) / (2.0 * opt.dt);
        const double raw = std::abs(lhs - opt.sign * static_cast<double>(flux[j]));
        const double scale = l1 * speed * tests[j].sup_grad;
        out[j] = scale > 0.0 ? raw / scale : raw;
    }
    return out;
}

/// int |grad phi|^{q'} over the support cube [-5/4, 5/4]^d, to the power 1/q'.
template <int D>
double gradient_lq_norm(const TestFunction<D>& tf, double qprime, int panels = 24)
{
    long double s = 0.0L;
    for_each_gauss_node<D>(Cube<D>(Vec<D>{}, 2.5), panels, [&](const Vec<D>& x, double w) {
        const double g = norm2<D>(tf.gradient(x));
        if (g != 0.0)
            s += w * std::pow(static_cast<long double>(g), static_cast<long double>(qprime));
    });
    return std::pow(static_cast<double>(s), 1.0 / qprime);
}

/**
 * Lower estimate of the Lip_t W^{-1,q} seminorm: max over test functions and consecutive
 * time pairs of |int rho(t_{j+1}) phi - int rho(t_j) phi| / (|t_{j+1} - t_j| |grad phi|_{q'}).
 */
template <int D, class DensityAt>
double wminus1q_lipschitz_estimate(DensityAt&& density_at, const std::vector<TestFunction<D>>& tests,
                                   const std::vector<double>& times, double q, int resolution = 512)
{
    if (!(q > 1.0))
        throw DomainError("q must exceed 1");
    const double qp = q / (q - 1.0);
    std::vector<std::function<double(const Vec<D>&)>> values;
    std::vector<double> gnorm;
    for (const auto& tf : tests) {
        values.push_back(tf.value);
        gnorm.push_back(gradient_lq_norm<D>(tf, qp));
    }
    double best = 0.0;
    std::vector<double> prev;
    for (std::size_t j = 0; j < times.size(); ++j) {
        auto cur = integrate_on_ensemble<D>(density_at(times[j]), values, resolution);
        if (j > 0) {
            const double dt = std::abs(times[j] - times[j - 1]);
            if (dt > 0.0)
                for (std::size_t k = 0; k < tests.size(); ++k)
                    best = std::max(best, std::abs(cur[k] - prev[k]) / (dt * gnorm[k]));
        }
        prev = std::move(cur);
    }
    return best;
}

} // namespace nutrans

#pragma once

#include <nutrans/geometry.hpp>
#include <nutrans/linalg.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <vector>

namespace nutrans {

/// Seven-point Gauss-Legendre rule on [-1/2, 1/2].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussRule& seven()
    {
        static const GaussRule rule = [] {
            using G = boost::math::quadrature::gauss<double, 7>;
            GaussRule g;
            const auto& x = G::abscissa();
            const auto& w = G::weights();
            for (std::size_t i = x.size(); i-- > 1;) {
                g.nodes.push_back(-0.5 * x[i]);
                g.weights.push_back(0.5 * w[i]);
            }
            g.nodes.push_back(0.0);
            g.weights.push_back(0.5 * w[0]);
            for (std::size_t i = 1; i < x.size(); ++i) {
                g.nodes.push_back(0.5 * x[i]);
                g.weights.push_back(0.5 * w[i]);
            }
            return g;
        }();
        return rule;
    }
};

/**
 * @brief Tensor Gauss quadrature over a cube split into panels^d sub-cubes.
 *
 * Calls f(x, weight) for every node; weights include the volume.
 */
template <int D, class F>
void for_each_gauss_node(const Cube<D>& cube, int panels, F&& f)
{
    const auto& g = GaussRule::seven();
    const int n = static_cast<int>(g.nodes.size());
    const double h = cube.side / panels;
    const double vol = std::pow(h, D);
    std::array<int, D> pan{};
    while (true) {
        Vec<D> corner;
        for (int l = 0; l < D; ++l)
            corner[l] = cube.center[l] - 0.5 * cube.side + (pan[l] + 0.5) * h;
        std::array<int, D> idx{};
        while (true) {
            Vec<D> x;
            double w = vol;
            for (int l = 0; l < D; ++l) {
                x[l] = corner[l] + h * g.nodes[idx[l]];
                w *= g.weights[idx[l]];
            }
            f(x, w);
            int l = 0;
            for (; l < D; ++l) {
                if (++idx[l] < n)
                    break;
                idx[l] = 0;
            }
            if (l == D)
                break;
        }
        int l = 0;
        for (; l < D; ++l) {
            if (++pan[l] < panels)
                break;
            pan[l] = 0;
        }
        if (l == D)
            break;
    }
}

/// Panels per axis for a cube of this side when the target panel width is `width`.
inline int panels_for(double side, double width)
{
    return std::max(1, static_cast<int>(std::ceil(side / width - 1e-12)));
}

/// Calls f(x) at every midpoint of a resolution^d grid over the cube; returns the cell volume.
template <int D, class F>
double for_each_midpoint(const Cube<D>& domain, int resolution, F&& f)
{
    if (resolution < 2)
        throw DomainError("grid resolution must be >= 2");
    const double h = domain.side / resolution;
    std::array<int, D> j{};
    while (true) {
        Vec<D> x;
        for (int l = 0; l < D; ++l)
            x[l] = domain.center[l] - 0.5 * domain.side + (j[l] + 0.5) * h;
        f(x);
        int l = 0;
        for (; l < D; ++l) {
            if (++j[l] < resolution)
                break;
            j[l] = 0;
        }
        if (l == D)
            break;
    }
    return std::pow(h, D);
}

} // namespace nutrans

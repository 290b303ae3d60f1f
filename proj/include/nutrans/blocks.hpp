#pragma once

#include <nutrans/cutoffs.hpp>
#include <nutrans/ensemble.hpp>
#include <nutrans/geometry.hpp>
#include <nutrans/linalg.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace nutrans {

/**
 * @brief Divergence-free field equal to xi on [-1,1]^d, supported in [-5/4,5/4]^d.
 *
 * Superposition over axes l of xi_l E_l, where E_l is the perpendicular gradient of
 * the stream function -x_m phi(x_l) phi(x_m) in the (l, m = l+1 mod d) plane,
 * multiplied by the cutoffs of the remaining coordinates. For d = 2 this is
 * -grad^perp[(xi^perp . x) phi(x_1) phi(x_2)].
 */
template <int D>
FieldSample<D> b_field(const Vec<D>& x, const Vec<D>& xi)
{
    static_assert(D >= 2, "b_field needs d >= 2");
    if (std::abs(norm2<D>(xi) - 1.0) > 1e-10)
        throw DomainError("direction must be a unit vector");

    std::array<Jet, D> ph;
    for (int l = 0; l < D; ++l) {
        ph[l] = plateau(x[l]);
        if (ph[l].value == 0.0 && ph[l].d1 == 0.0)
            return FieldSample<D>::zero();
    }

    FieldSample<D> out;
    for (int l = 0; l < D; ++l) {
        if (xi[l] == 0.0)
            continue;
        const int m = (l + 1) % D;
        const Jet& pl = ph[l];
        const Jet& pm = ph[m];
        // g(y) = d/dy [y phi(y)]
        const double g = pm.value + x[m] * pm.d1;
        const double g1 = 2.0 * pm.d1 + x[m] * pm.d2;

        // product of the cutoffs off the (l,m) plane and its partial derivatives
        double P = 1.0;
        std::array<double, D> dP{};
        for (int j = 0; j < D; ++j) {
            if (j == l || j == m)
                continue;
            P *= ph[j].value;
        }
        for (int j = 0; j < D; ++j) {
            if (j == l || j == m)
                continue;
            double q = ph[j].d1;
            for (int n = 0; n < D; ++n)
                if (n != l && n != m && n != j)
                    q *= ph[n].value;
            dP[j] = q;
        }

        const double c = xi[l];
        const double ul = pl.value * g;
        const double um = -x[m] * pl.d1 * pm.value;
        out.v[l] += c * ul * P;
        out.v[m] += c * um * P;

        const double diag = c * pl.d1 * g * P;
        out.J[l][l] += diag;
        out.J[m][m] -= diag;
        out.J[l][m] += c * pl.value * g1 * P;
        out.J[m][l] += c * (-x[m] * pl.d2 * pm.value) * P;
        for (int j = 0; j < D; ++j) {
            if (j == l || j == m)
                continue;
            out.J[l][j] += c * ul * dP[j];
            out.J[m][j] += c * um * dP[j];
        }
    }
    return out;
}

/// Rigid translation of the cube Q(A_0, lambda) to Q(A_1, lambda) during t in [1/3, 2/3].
template <int D>
struct TranslationSpec {
    Vec<D> A0{};
    Vec<D> A1{};
    double lambda = 1.0;

    TranslationSpec() = default;
    TranslationSpec(const Vec<D>& a0, const Vec<D>& a1, double lam) : A0(a0), A1(a1), lambda(lam)
    {
        if (!(lam > 0.0))
            throw DomainError("translation cube side must be positive");
    }

    Vec<D> center(double t) const
    {
        const double z = zeta(t).value;
        Vec<D> c;
        for (int l = 0; l < D; ++l)
            c[l] = A0[l] * (1.0 - z) + A1[l] * z;
        return c;
    }
};

/**
 * The field |A_1 - A_0| zeta'(t) b_d(2 (x - A_t) / lambda; xi). The factor 2 makes the
 * plateau cover Q(A_t, lambda) exactly; the support is Q(A_t, 5 lambda / 4).
 */
template <int D>
FieldSample<D> translation_velocity(double t, const Vec<D>& x, const TranslationSpec<D>& spec)
{
    const Jet z = zeta(t);
    if (z.d1 == 0.0)
        return FieldSample<D>::zero();
    const Vec<D> delta = spec.A1 - spec.A0;
    const double len = norm2<D>(delta);
    if (len == 0.0)
        return FieldSample<D>::zero();
    const Vec<D> xi = (1.0 / len) * delta;
    const Vec<D> at = spec.center(t);
    const double zoom = 2.0 / spec.lambda;
    Vec<D> y;
    for (int l = 0; l < D; ++l) {
        y[l] = zoom * (x[l] - at[l]);
        if (std::abs(y[l]) >= 1.25)
            return FieldSample<D>::zero();
    }
    FieldSample<D> f = b_field<D>(y, xi);
    const double amp = len * z.d1;
    return f.scale(amp, amp * zoom);
}

template <int D>
double translation_density(double t, const Vec<D>& x, const TranslationSpec<D>& spec)
{
    return cube_contains(Cube<D>(spec.center(t), spec.lambda), x) ? 1.0 : 0.0;
}

/// Spreading block parameters; requires 0 < 2s < a < 1.
struct BlockParams {
    int eta = 1;
    double a = 0.5;
    double s = 0.2;

    BlockParams() = default;
    BlockParams(int e, double a_, double s_) : eta(e), a(a_), s(s_) { validate(); }

    void validate() const
    {
        if (eta < 1)
            throw DomainError("block generation must be positive");
        if (!(s > 0.0 && 2.0 * s < a && a < 1.0))
            throw DomainError("block parameters must satisfy 0 < 2s < a < 1");
    }

    double cube_side() const { return std::ldexp(s, -eta); }
};

namespace detail {

template <int D>
struct BlockHit {
    Vec<D> cell_center;
    Vec<D> cube_center;
};

// Cube of the block nearest to x at time t: locate the cell of x / m with m = a + (1-a) zeta.
template <int D>
std::optional<BlockHit<D>> block_locate(double zeta_value, const Vec<D>& x, const BlockParams& p)
{
    const double m = p.a + (1.0 - p.a) * zeta_value;
    Vec<D> y;
    for (int l = 0; l < D; ++l)
        y[l] = x[l] / m;
    auto c = cell_center<D>(p.eta, y);
    if (!c)
        return std::nullopt;
    return BlockHit<D>{*c, m * *c};
}

} // namespace detail

/// v_b: sum of the 2^{eta d} translations a c_k -> c_k with cube side s / 2^eta.
template <int D>
FieldSample<D> block_velocity(double t, const Vec<D>& x, const BlockParams& p)
{
    p.validate();
    const Jet z = zeta(t);
    if (z.d1 == 0.0)
        return FieldSample<D>::zero();
    auto hit = detail::block_locate<D>(z.value, x, p);
    if (!hit)
        return FieldSample<D>::zero();
    const TranslationSpec<D> spec(p.a * hit->cell_center, hit->cell_center, p.cube_side());
    return translation_velocity<D>(t, x, spec);
}

template <int D>
double block_density(double t, const Vec<D>& x, const BlockParams& p)
{
    p.validate();
    auto hit = detail::block_locate<D>(zeta(t).value, x, p);
    if (!hit)
        return 0.0;
    return cube_contains(Cube<D>(hit->cube_center, p.cube_side()), x) ? 1.0 : 0.0;
}

/// Centers x_p^k(t) = (a + (1 - a) zeta(t)) c_k^eta of the moving cubes, in k order.
template <int D>
std::vector<Vec<D>> block_centers(double t, const BlockParams& p)
{
    p.validate();
    const double m = p.a + (1.0 - p.a) * zeta(t).value;
    const std::uint64_t n = cell_count<D>(p.eta);
    std::vector<Vec<D>> out;
    out.reserve(n);
    for (std::uint64_t k = 1; k <= n; ++k)
        out.push_back(m * center_of_index<D>(p.eta, k));
    return out;
}

/**
 * The moving cubes as an ensemble of value 1. The ensemble exponent is log2(s), so the
 * side s / 2^eta is the tag {-eta, 1}.
 */
template <int D>
CubeEnsemble<D> block_cubes(double t, const BlockParams& p)
{
    CubeEnsemble<D> e;
    e.nu = std::log2(p.s);
    for (const auto& c : block_centers<D>(t, p))
        e.cubes.push_back(make_valued_cube<D>(c, Pow2{-p.eta, 1}, Pow2{}, e.nu));
    for (auto& c : e.cubes)
        c.side = p.cube_side();
    return e;
}

/// Sup over (t,x) of |v_b| on the moving cubes: max_k |c_k - a c_k| max zeta'.
template <int D>
double block_speed(const BlockParams& p)
{
    double cmax = 0.5 - std::ldexp(0.5, -p.eta);
    return (1.0 - p.a) * cmax * std::sqrt(static_cast<double>(D)) * zeta_slope_max();
}

} // namespace nutrans

#pragma once

#include <nutrans/linalg.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace nutrans {

/// Threshold for the self-similarity exponent of the asynchronous construction: 1 + beta - log2(2^beta - 1).
inline double nu0_strict(double beta) { return 1.0 + beta - std::log2(std::exp2(beta) - 1.0); }

/// Threshold 1 - log2(2^beta - 1) that suffices for the synchronous construction.
inline double nu0_weak(double beta) { return 1.0 - std::log2(std::exp2(beta) - 1.0); }

inline double conjugate(double q) { return q / (q - 1.0); }

struct LrExponents {
    int d = 2;
    double beta = 0.8;
    double nu = 2.3;
    int eta = 2;
    double p = 1.2;
    double r = 1.5;
    double q = 1.05;
};

/// Closed-form contraction factors; each is < 1 exactly when its range condition holds.
struct ContractionConstants {
    double gamma1 = 0, gamma2 = 0, gamma3 = 0;
    double F = 0;            ///< 2^{gamma1 + eta d - eta d / p + beta}
    double G_Y = 0;          ///< 2^{-eta d / r + nu d (1 - 1/r)}
    double G_Z = 0;          ///< 2^{gamma3 - eta (1 + d/q) + beta + eta d}
    double nu_factor = 0;    ///< 2^{1 + beta - nu} / (2^beta - 1), < 1 iff nu > nu0_strict
    double i_supremum = 0;   ///< max{2^{1-nu} / (2^beta - 1), 1}
    double nu0 = 0;
};

inline ContractionConstants contraction_constants(const LrExponents& e)
{
    const double d = e.d;
    ContractionConstants c;
    c.gamma1 = e.nu * (1.0 - d / e.p);
    c.gamma2 = e.nu * d * (1.0 - 1.0 / e.r);
    c.gamma3 = e.nu * d * (1.0 - 1.0 / e.q);
    c.F = std::exp2(c.gamma1 + e.eta * d - e.eta * d / e.p + e.beta);
    c.G_Y = std::exp2(-e.eta * d / e.r + e.nu * d * (1.0 - 1.0 / e.r));
    c.G_Z = std::exp2(c.gamma3 - e.eta * (1.0 + d / e.q) + e.beta + e.eta * d);
    const double den = std::exp2(e.beta) - 1.0;
    c.nu_factor = std::exp2(1.0 + e.beta - e.nu) / den;
    c.i_supremum = std::max(std::exp2(1.0 - e.nu) / den, 1.0);
    c.nu0 = nu0_strict(e.beta);
    return c;
}

/// The range conditions exactly as stated (no constants involved).
struct RangeVerdicts {
    bool p_range = false;   ///< p < (eta + nu) d / (eta d + nu + beta)
    bool r_range = false;   ///< r < (eta + nu) / nu
    bool q_range = false;   ///< 1 < q < (eta + nu) d / ((eta + nu) d + beta - eta)
    bool nu_range = false;  ///< nu > nu0_strict(beta)

    bool all() const { return p_range && r_range && q_range && nu_range; }
};

inline double p_upper(const LrExponents& e) { return (e.eta + e.nu) * e.d / (e.eta * e.d + e.nu + e.beta); }
inline double r_upper(const LrExponents& e) { return (e.eta + e.nu) / e.nu; }

/// Upper end of the q range; infinite when the denominator is not positive.
inline double q_upper(const LrExponents& e)
{
    const double num = (e.eta + e.nu) * e.d;
    const double den = num + e.beta - e.eta;
    return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

inline RangeVerdicts range_verdicts(const LrExponents& e)
{
    RangeVerdicts v;
    v.p_range = e.p < p_upper(e);
    v.r_range = e.r < r_upper(e);
    v.q_range = e.q > 1.0 && e.q < q_upper(e);
    v.nu_range = e.nu > nu0_strict(e.beta);
    return v;
}

/// Verdicts read off the constants: F, G_Y, G_Z and the nu factor below 1.
inline RangeVerdicts constant_verdicts(const LrExponents& e)
{
    const auto c = contraction_constants(e);
    RangeVerdicts v;
    v.p_range = c.F < 1.0;
    v.r_range = c.G_Y < 1.0;
    v.q_range = e.q > 1.0 && c.G_Z < 1.0;
    v.nu_range = c.nu_factor < 1.0;
    return v;
}

struct L1Exponents {
    int d = 2;
    double beta = 0.8;
    double nu = 2.3;
    double alpha = 0.05;
    double p = 1.2;
    double s_time = 1.5;
    double q = 1.01;
};

struct L1ContractionConstants {
    double F = 0;       ///< sup_i 2^{i(beta - nu d/p)} * 2/(2^beta - 1), the W^{1,p} factor on E_i
    double G_lip = 0;   ///< sup_i 2^{i(beta - (1+nu)(1 - d/q'))} * 2/(2^beta - 1)
    double G_Ls = 0;    ///< 2^{-1/s}
    double nu0 = 0;     ///< 1 - log2(2^beta - 1)
};

inline L1ContractionConstants l1_contraction_constants(const L1Exponents& e)
{
    const double den = std::exp2(e.beta) - 1.0;
    auto sup_geometric = [&](double rate) {
        return rate > 0.0 ? std::numeric_limits<double>::infinity() : 2.0 / den * std::exp2(rate);
    };
    L1ContractionConstants c;
    c.F = sup_geometric(e.beta - e.nu * e.d / e.p);
    c.G_lip = sup_geometric(e.beta - (1.0 + e.nu) * (1.0 - e.d / conjugate(e.q)));
    c.G_Ls = std::exp2(-1.0 / e.s_time);
    c.nu0 = nu0_weak(e.beta);
    return c;
}

struct L1Verdicts {
    bool nu_range = false;     ///< nu > nu0 (stricter variant) and nu >= 2
    bool p_range = false;      ///< p < nu d / (nu + beta)
    bool alpha_range = false;  ///< alpha < (1 - beta) / (1 + nu)
    bool q_range = false;      ///< nu d / (1 - beta) < q'
    bool all() const { return nu_range && p_range && alpha_range && q_range; }
};

inline L1Verdicts l1_verdicts(const L1Exponents& e)
{
    L1Verdicts v;
    v.nu_range = e.nu > nu0_strict(e.beta) && e.nu >= 2.0;
    v.p_range = e.p < e.nu * e.d / (e.nu + e.beta);
    v.alpha_range = e.alpha < (1.0 - e.beta) / (1.0 + e.nu);
    v.q_range = e.q > 1.0 && e.nu * e.d / (1.0 - e.beta) < conjugate(e.q);
    return v;
}

/// Margin of the sharp range 1/p + (d-1)/(d r) - 1 (positive inside).
inline double sharp_margin(int d, double p, double r) { return 1.0 / p + (d - 1.0) / (d * r) - 1.0; }

struct FeasibilityReport {
    int d = 2;
    double p = 0, r = 0;
    double margin = 0;
    bool feasible = false;
    // derived
    double beta = 0.5;
    double lambda = 0;
    double p_bar = 0, r_bar = 0;
    double eta_tilde = 0, nu_tilde = 0;
    int eta = 0;
    double nu = 0, q = 0;
    double gamma1 = 0, gamma2 = 0, gamma3 = 0;
    double nu0 = 0;
    // verdicts
    bool sharp_range = false;
    bool extra_condition = false;
    bool nu_above_nu0 = false;
    bool p_range = false;
    bool r_range = false;
    bool q_range = false;
    std::string note;

    LrExponents exponents() const { return {d, beta, nu, eta, p, r, q}; }
};

/**
 * @brief Parameter selection for the sharp range.
 *
 * Moves (1/p, (d-1)/(d r)) toward the boundary of the range along the ray that keeps
 * their ratio, so the margin shrinks to (1 - lambda) times its value. Starting at
 * lambda = 1/2 it bisects toward 1 until 3 r_bar margin_bar < beta / d, then solves
 * r_bar = (eta + nu)/nu and p_bar = (eta + nu) d / (eta d + nu + beta) for (eta, nu),
 * rounds eta up and takes q at the middle of its range.
 */
inline FeasibilityReport feasibility(int d, double p, double r)
{
    if (d < 2)
        throw DomainError("dimension must be >= 2");
    if (!(p >= 1.0 && r >= 1.0))
        throw DomainError("exponents must be >= 1");
    FeasibilityReport rep;
    rep.d = d;
    rep.p = p;
    rep.r = r;
    rep.margin = sharp_margin(d, p, r);
    rep.beta = 0.5;
    rep.nu0 = nu0_strict(rep.beta);
    rep.sharp_range = rep.margin > 0.0;
    if (!rep.sharp_range) {
        rep.note = "outside the sharp range 1/p + (d-1)/(d r) > 1";
        return rep;
    }
    const double u = 1.0 / p;
    const double v = (d - 1.0) / (d * r);
    double lambda = 0.5;
    double ub = 0, vb = 0, mb = 0;
    for (int it = 0; it < 200; ++it) {
        ub = u - lambda * rep.margin * u / (u + v);
        vb = v - lambda * rep.margin * v / (u + v);
        mb = (1.0 - lambda) * rep.margin;
        const double rb = (d - 1.0) / (d * vb);
        if (3.0 * rb * mb < rep.beta / d)
            break;
        lambda = 0.5 * (1.0 + lambda);
    }
    rep.lambda = lambda;
    rep.p_bar = 1.0 / ub;
    rep.r_bar = (d - 1.0) / (d * vb);
    rep.extra_condition = 3.0 * rep.r_bar * sharp_margin(d, rep.p_bar, rep.r_bar) < rep.beta / d
                          && rep.p_bar > p && rep.r_bar > r && sharp_margin(d, rep.p_bar, rep.r_bar) > 0.0;
    // r_bar = 1 + eta/nu and 1/p_bar = (eta d + nu + beta)/((eta + nu) d) give
    // nu = beta / (d r_bar margin_bar), eta = nu (r_bar - 1).
    const double mbar = sharp_margin(d, rep.p_bar, rep.r_bar);
    rep.nu_tilde = rep.beta / (d * rep.r_bar * mbar);
    rep.eta_tilde = rep.nu_tilde * (rep.r_bar - 1.0);
    rep.eta = static_cast<int>(std::ceil(rep.eta_tilde - 1e-12));
    rep.nu = rep.eta / (rep.r_bar - 1.0);
    LrExponents e{d, rep.beta, rep.nu, rep.eta, p, r, 1.0};
    const double qu = q_upper(e);
    rep.q = std::isfinite(qu) ? 0.5 * (1.0 + qu) : 2.0;
    e.q = rep.q;
    rep.gamma1 = rep.nu * (1.0 - d / p);
    rep.gamma2 = rep.nu * d * (1.0 - 1.0 / r);
    rep.gamma3 = rep.nu * d * (1.0 - 1.0 / rep.q);
    const auto rv = range_verdicts(e);
    rep.nu_above_nu0 = rv.nu_range;
    rep.p_range = rv.p_range;
    rep.r_range = rv.r_range;
    rep.q_range = rv.q_range;
    rep.feasible = rep.sharp_range && rep.extra_condition && rep.nu_above_nu0 && rep.p_range && rep.r_range
                   && rep.q_range;
    return rep;
}

/// Ratio x = 2^{nu d - (eta + nu) d / r} of the geometric density series.
inline double density_series_ratio(int d, int eta, double nu, double r)
{
    return std::exp2(nu * d - (eta + nu) * d / r);
}

/// 2^{eta d} sum_{i >= 1} x^i = 2^{eta d} x / (1 - x); infinite when x >= 1.
inline double density_series_bound(int d, int eta, double nu, double r)
{
    const double x = density_series_ratio(d, eta, nu, r);
    if (x >= 1.0)
        return std::numeric_limits<double>::infinity();
    return std::exp2(eta * d) * x / (1.0 - x);
}

/// Per-index velocity size 2^{i beta} 2^{i (eta d + nu)} 2^{-i (eta + nu) d / p}.
inline double velocity_heuristic(int d, int eta, double nu, double beta, double p, int i)
{
    return std::exp2(i * (beta + eta * d + nu - (eta + nu) * d / p));
}

} // namespace nutrans

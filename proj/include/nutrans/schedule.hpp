#pragma once

#include <nutrans/geometry.hpp>

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace nutrans {

enum class Phase { E, O, T1, T2, T3, Terminal };

inline std::string_view phase_name(Phase p)
{
    switch (p) {
    case Phase::E: return "E";
    case Phase::O: return "O";
    case Phase::T1: return "T1";
    case Phase::T2: return "T2";
    case Phase::T3: return "T3";
    case Phase::Terminal: return "terminal";
    }
    return "?";
}

/**
 * @brief Location of a time in a dyadic partition.
 *
 * The phase interval is [start, end]; scale = 1/(end - start).
 * Forward phases use s = (t - start) * scale, reversed phases s = (end - t) * scale.
 */
struct SchedulePoint {
    std::int64_t index = 0;
    Phase phase = Phase::Terminal;
    double local = 0.0;
    double scale = 0.0;
    bool reversed = false;
    double start = 1.0;
    double end = 1.0;

    bool terminal() const { return phase == Phase::Terminal; }

    double time_of(double s) const
    {
        return reversed ? end - s / scale : start + s / scale;
    }
};

namespace detail {

inline void check_time(double t)
{
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("time must lie in [0,1]");
}

inline void check_beta(double beta)
{
    if (!(beta > 0.0 && beta < 1.0))
        throw DomainError("beta must lie in (0,1)");
}

// Closed-form checkpoints stay meaningful up to beta = 1.
inline void check_checkpoint_beta(double beta)
{
    if (!(beta > 0.0 && beta <= 1.0))
        throw DomainError("beta must lie in (0,1]");
}

inline SchedulePoint make_point(std::int64_t index, Phase phase, double start, double end,
                                bool reversed, double t)
{
    SchedulePoint p;
    p.index = index;
    p.phase = phase;
    p.start = start;
    p.end = end;
    p.reversed = reversed;
    p.scale = 1.0 / (end - start);
    p.local = reversed ? (end - t) * p.scale : (t - start) * p.scale;
    p.local = std::clamp(p.local, 0.0, 1.0);
    return p;
}

} // namespace detail

struct L1Checkpoints {
    double tau;  ///< tau_i
    double mid;  ///< tau_i^mid
    double next; ///< tau_{i+1}
};

/// 1 - 2^{-x}, accurate for small x.
inline double one_minus_pow2(double x) { return -std::expm1(-x * std::log(2.0)); }

inline L1Checkpoints l1_checkpoints(double beta, std::int64_t i)
{
    detail::check_checkpoint_beta(beta);
    if (i < 1)
        throw DomainError("L1 interval index must be >= 1");
    const double tau = one_minus_pow2(beta * static_cast<double>(i - 1));
    const double next = one_minus_pow2(beta * static_cast<double>(i));
    return {tau, 0.5 * (tau + next), next};
}

/// Beyond this interval index the L1 schedule is treated as having reached t = 1.
inline constexpr std::int64_t l1_max_interval = 60;

inline SchedulePoint l1_locate(double beta, double t)
{
    detail::check_beta(beta);
    detail::check_time(t);
    if (t == 1.0)
        return SchedulePoint{};
    auto i = static_cast<std::int64_t>(std::floor(-std::log2(1.0 - t) / beta)) + 1;
    i = std::max<std::int64_t>(i, 1);
    while (i > 1 && t < l1_checkpoints(beta, i).tau)
        --i;
    while (t >= l1_checkpoints(beta, i).next)
        ++i;
    if (i > l1_max_interval)
        return SchedulePoint{};
    const auto c = l1_checkpoints(beta, i);
    if (t < c.mid)
        return detail::make_point(i, Phase::E, c.tau, c.mid, true, t);
    return detail::make_point(i, Phase::O, c.mid, c.next, false, t);
}

struct LrCheckpoints {
    double t1;
    double mid;
    double t2;
    double end;
};

/// Asynchronous schedule: slot k of 2^{eta d} runs T1 (reversed), T2, T3.
class LrPartition {
public:
    LrPartition(double beta, int eta, int d) : beta_(beta), eta_(eta), d_(d)
    {
        detail::check_beta(beta);
        if (d < 1)
            throw DomainError("dimension must be positive");
        if (eta < 1 || eta * d > 24)
            throw DomainError("eta*d must lie in [1,24] for the slot table");
        const std::uint64_t n = std::uint64_t{1} << (eta * d);
        const double inv = 1.0 / static_cast<double>(n);
        const double shrink = std::exp2(-beta);
        table_.resize(n);
        for (std::uint64_t k = 1; k <= n; ++k) {
            LrCheckpoints c;
            c.t1 = static_cast<double>(k - 1) * inv;
            c.t2 = (static_cast<double>(k) - shrink) * inv;
            c.mid = 0.5 * (c.t1 + c.t2);
            c.end = static_cast<double>(k) * inv;
            table_[k - 1] = c;
        }
    }

    double beta() const { return beta_; }
    int eta() const { return eta_; }
    int dim() const { return d_; }
    std::uint64_t slots() const { return table_.size(); }

    const LrCheckpoints& checkpoints(std::uint64_t k) const
    {
        if (k < 1 || k > table_.size())
            throw DomainError("slot index k out of range");
        return table_[k - 1];
    }

    /// Boundary ties go to the later phase: T1 = [t1, mid), T2 = [mid, t2), T3 = [t2, end).
    SchedulePoint locate(double t) const
    {
        detail::check_time(t);
        if (t == 1.0)
            return SchedulePoint{};
        const auto n = static_cast<std::int64_t>(table_.size());
        auto k = static_cast<std::int64_t>(std::floor(t * static_cast<double>(n))) + 1;
        k = std::clamp<std::int64_t>(k, 1, n);
        while (k > 1 && t < table_[k - 1].t1)
            --k;
        while (k < n && t >= table_[k - 1].end)
            ++k;
        const auto& c = table_[k - 1];
        if (t < c.mid)
            return detail::make_point(k, Phase::T1, c.t1, c.mid, true, t);
        if (t < c.t2)
            return detail::make_point(k, Phase::T2, c.mid, c.t2, false, t);
        return detail::make_point(k, Phase::T3, c.t2, c.end, false, t);
    }

private:
    double beta_;
    int eta_;
    int d_;
    std::vector<LrCheckpoints> table_;
};

inline LrCheckpoints lr_checkpoints(double beta, int eta, int d, std::uint64_t k)
{
    detail::check_checkpoint_beta(beta);
    if (eta < 1 || d < 1 || eta * d > 62)
        throw DomainError("eta and d must be positive with eta*d <= 62");
    const double n = std::ldexp(1.0, eta * d);
    if (k < 1 || static_cast<double>(k) > n)
        throw DomainError("slot index k out of range");
    LrCheckpoints c;
    c.t1 = static_cast<double>(k - 1) / n;
    c.t2 = (static_cast<double>(k) - std::exp2(-beta)) / n;
    c.mid = 0.5 * (c.t1 + c.t2);
    c.end = static_cast<double>(k) / n;
    return c;
}

inline SchedulePoint lr_locate(double beta, int eta, int d, double t)
{
    return LrPartition(beta, eta, d).locate(t);
}

} // namespace nutrans

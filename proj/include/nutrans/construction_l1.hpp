#pragma once

#include <nutrans/blocks.hpp>
#include <nutrans/construction_lr.hpp>
#include <nutrans/ensemble.hpp>
#include <nutrans/geometry.hpp>
#include <nutrans/schedule.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace nutrans {

struct L1Params {
    double beta = 0.8;
    double nu = 2.3;
    double alpha = 0.05;
    double p = 1.2;
    double s_time = 1.5;
    double q = 1.01;
    int depth = 8;
    DensityBase base = DensityBase::Freeze;

    void validate() const
    {
        if (!(beta > 0.0 && beta < 1.0))
            throw DomainError("beta must lie in (0,1)");
        if (!(nu > 1.0))
            throw DomainError("nu must exceed 1 so that every block satisfies 2s < a");
        if (depth < 0)
            throw DomainError("depth must be nonnegative");
    }
};

/// One reversed descent on E_i: child frame y' = 2^{(1+nu) i} (y - c), c the generation-i cell of y.
struct L1Level {
    int generation = 1;
    SchedulePoint at;
    Pow2 zoom{};
    Pow2 density_factor{};
    double velocity_factor = 1.0;
};

/// Refuse to materialize ensembles beyond this many cubes.
inline constexpr double max_ensemble_cubes = 3.0e7;

template <int D>
class L1Slice {
public:
    L1Slice(const L1Params& p, double t) : params_(p)
    {
        p.validate();
        detail::check_time(t);
        int budget = p.depth;
        double s = t;
        while (true) {
            if (budget == 0) {
                leaf_ = LeafKind::Exhausted;
                break;
            }
            const SchedulePoint sp = s >= 1.0 ? SchedulePoint{} : l1_locate(p.beta, s);
            if (sp.terminal()) {
                leaf_ = LeafKind::Terminal;
                break;
            }
            const int i = static_cast<int>(sp.index);
            if (sp.phase == Phase::O) {
                leaf_ = LeafKind::Block;
                leaf_at_ = sp;
                break;
            }
            L1Level lv;
            lv.generation = i;
            lv.at = sp;
            lv.zoom = {i, i};
            lv.density_factor = {0, static_cast<std::int64_t>(D) * i};
            lv.velocity_factor = -sp.scale / lv.zoom.value(p.nu);
            levels_.push_back(lv);
            s = sp.local;
            --budget;
        }
        if (leaf_ != LeafKind::Block)
            leaf_at_.local = s;
    }

    const std::vector<L1Level>& levels() const { return levels_; }
    LeafKind leaf() const { return leaf_; }
    const SchedulePoint& leaf_point() const { return leaf_at_; }
    int leaf_generation() const { return static_cast<int>(leaf_at_.index); }

    BlockParams leaf_block() const
    {
        const int i = leaf_generation();
        return BlockParams(1, std::exp2(-params_.nu * i), std::exp2(-params_.nu * (i + 1)));
    }

    FieldSample<D> velocity(const Vec<D>& x) const
    {
        if (leaf_ != LeafKind::Block)
            return FieldSample<D>::zero();
        Vec<D> y = x;
        double amp = 1.0;
        double zoom = 1.0;
        for (const auto& lv : levels_) {
            auto c = cell_center<D>(lv.generation, y);
            if (!c)
                return FieldSample<D>::zero();
            const double z = lv.zoom.value(params_.nu);
            for (int l = 0; l < D; ++l)
                y[l] = z * (y[l] - (*c)[l]);
            amp *= lv.velocity_factor;
            zoom *= z;
        }
        const int i = leaf_generation();
        auto c = cell_center<D>(i, y);
        if (!c)
            return FieldSample<D>::zero();
        const double z = std::ldexp(1.0, i);
        for (int l = 0; l < D; ++l)
            y[l] = z * (y[l] - (*c)[l]);
        FieldSample<D> f = block_velocity<D>(leaf_at_.local, y, leaf_block());
        const double a = amp * leaf_at_.scale / z;
        return f.scale(a, a * zoom * z);
    }

    double density(const Vec<D>& x) const
    {
        Vec<D> y = x;
        Pow2 amp{};
        for (const auto& lv : levels_) {
            auto c = cell_center<D>(lv.generation, y);
            if (!c)
                return 0.0;
            const double z = lv.zoom.value(params_.nu);
            for (int l = 0; l < D; ++l)
                y[l] = z * (y[l] - (*c)[l]);
            amp = amp * lv.density_factor;
        }
        switch (leaf_) {
        case LeafKind::Terminal:
            return in_unit_cube<D>(y) ? amp.value(params_.nu) : 0.0;
        case LeafKind::Exhausted:
            return params_.base == DensityBase::Freeze && in_unit_cube<D>(y) ? amp.value(params_.nu) : 0.0;
        case LeafKind::Block: {
            const int i = leaf_generation();
            auto c = cell_center<D>(i, y);
            if (!c)
                return 0.0;
            const double z = std::ldexp(1.0, i);
            for (int l = 0; l < D; ++l)
                y[l] = z * (y[l] - (*c)[l]);
            if (block_density<D>(leaf_at_.local, y, leaf_block()) == 0.0)
                return 0.0;
            return (amp * Pow2{0, static_cast<std::int64_t>(D) * (i + 1)}).value(params_.nu);
        }
        }
        return 0.0;
    }

    /// Counts only; never materializes geometry.
    VolumeProfile<D> profile() const
    {
        VolumeProfile<D> cur;
        cur.nu = params_.nu;
        switch (leaf_) {
        case LeafKind::Terminal:
            cur.add(Pow2{}, Pow2{}, 1.0);
            break;
        case LeafKind::Exhausted:
            if (params_.base == DensityBase::Freeze)
                cur.add(Pow2{}, Pow2{}, 1.0);
            break;
        case LeafKind::Block: {
            const int i = leaf_generation();
            cur.add(Pow2{0, static_cast<std::int64_t>(D) * (i + 1)}, Pow2{-1 - i, -(i + 1)},
                    std::ldexp(1.0, D * (i + 1)));
            break;
        }
        }
        for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
            VolumeProfile<D> up;
            up.nu = params_.nu;
            up.merge_scaled(cur, it->density_factor, Pow2{-it->zoom.base2, -it->zoom.nu_mult},
                            std::ldexp(1.0, D * it->generation));
            cur = std::move(up);
        }
        return cur;
    }

    double cube_count() const { return profile().cube_count(); }

    /// Number of congruent copies of the leaf block (1 when nothing moves).
    double copy_count() const
    {
        if (leaf_ != LeafKind::Block)
            return 1.0;
        double n = std::ldexp(1.0, D * leaf_generation());
        for (const auto& lv : levels_)
            n *= std::ldexp(1.0, D * lv.generation);
        return n;
    }

    CubeEnsemble<D> cubes() const
    {
        if (cube_count() > max_ensemble_cubes)
            throw DomainError("ensemble too large to materialize; use profile()");
        CubeEnsemble<D> cur;
        cur.nu = params_.nu;
        switch (leaf_) {
        case LeafKind::Terminal:
            cur.add(Vec<D>{}, Pow2{}, Pow2{});
            break;
        case LeafKind::Exhausted:
            if (params_.base == DensityBase::Freeze)
                cur.add(Vec<D>{}, Pow2{}, Pow2{});
            break;
        case LeafKind::Block: {
            const int i = leaf_generation();
            const double inv = std::ldexp(1.0, -i);
            const Pow2 side{-1 - i, -(i + 1)};
            const Pow2 value{0, static_cast<std::int64_t>(D) * (i + 1)};
            const auto centers = block_centers<D>(leaf_at_.local, leaf_block());
            for_each_cell(i, [&](const Vec<D>& c) {
                for (const auto& bc : centers)
                    cur.add(c + inv * bc, side, value);
            });
            break;
        }
        }
        for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
            CubeEnsemble<D> up;
            up.nu = params_.nu;
            for_each_cell(it->generation, [&](const Vec<D>& c) {
                up.append_scaled(cur, c, it->zoom, it->density_factor);
            });
            cur = std::move(up);
        }
        return cur;
    }

    /**
     * Supports of the moving translations in global coordinates. With first_copy set, only
     * the copy reached through cell 1 at every level; all copies are translates of it.
     */
    std::vector<Cube<D>> velocity_support(bool first_copy = false) const
    {
        std::vector<Cube<D>> out;
        if (leaf_ != LeafKind::Block || zeta(leaf_at_.local).d1 == 0.0)
            return out;
        if (!first_copy && cube_count() > max_ensemble_cubes)
            throw DomainError("support too large to materialize");
        auto each_cell = [first_copy](int generation, auto&& f) {
            const std::uint64_t n = first_copy ? 1 : cell_count<D>(generation);
            for (std::uint64_t k = 1; k <= n; ++k)
                f(center_of_index<D>(generation, k));
        };
        const int i = leaf_generation();
        const BlockParams bp = leaf_block();
        const double inv = std::ldexp(1.0, -i);
        const auto centers = block_centers<D>(leaf_at_.local, bp);
        std::vector<Cube<D>> cur;
        each_cell(i, [&](const Vec<D>& c) {
            for (const auto& bc : centers)
                cur.emplace_back(c + inv * bc, inv * 1.25 * bp.cube_side());
        });
        for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
            std::vector<Cube<D>> up;
            const double sh = 1.0 / it->zoom.value(params_.nu);
            each_cell(it->generation, [&](const Vec<D>& c) {
                for (const auto& q : cur)
                    up.emplace_back(c + sh * q.center, sh * q.side);
            });
            cur = std::move(up);
        }
        return cur;
    }

    double speed() const
    {
        if (leaf_ != LeafKind::Block)
            return 0.0;
        double amp = 1.0;
        for (const auto& lv : levels_)
            amp *= lv.velocity_factor;
        const int i = leaf_generation();
        return std::abs(amp * leaf_at_.scale * std::ldexp(1.0, -i)) * block_speed<D>(leaf_block());
    }

private:
    template <class F>
    static void for_each_cell(int generation, F&& f)
    {
        const std::uint64_t n = cell_count<D>(generation);
        for (std::uint64_t k = 1; k <= n; ++k)
            f(center_of_index<D>(generation, k));
    }

    L1Params params_;
    std::vector<L1Level> levels_;
    LeafKind leaf_ = LeafKind::Exhausted;
    SchedulePoint leaf_at_;
};

template <int D>
FieldSample<D> l1_velocity(double t, const Vec<D>& x, const L1Params& p)
{
    return L1Slice<D>(p, t).velocity(x);
}

template <int D>
double l1_density(double t, const Vec<D>& x, const L1Params& p)
{
    return L1Slice<D>(p, t).density(x);
}

template <int D>
CubeEnsemble<D> l1_density_cubes(double t, const L1Params& p)
{
    return L1Slice<D>(p, t).cubes();
}

/// rho^in: 2^d cubes of side 2^{-(1+nu)} at the generation-1 centers with value 2^{nu d}.
template <int D>
CubeEnsemble<D> l1_initial_density(const L1Params& p)
{
    CubeEnsemble<D> e;
    e.nu = p.nu;
    for (std::uint64_t k = 1; k <= cell_count<D>(1); ++k)
        e.add(center_of_index<D>(1, k), Pow2{-1, -1}, Pow2{0, D});
    return e;
}

template <int D>
CubeEnsemble<D> l1_final_density(const L1Params& p)
{
    CubeEnsemble<D> e;
    e.nu = p.nu;
    e.add(Vec<D>{}, Pow2{}, Pow2{});
    return e;
}

template <int D>
FieldSample<D> lr_velocity(int component, double t, const Vec<D>& x, const LrParams& p)
{
    return LrConstruction<D>(p).velocity(component, t, x);
}

template <int D>
double lr_density(int component, double t, const Vec<D>& x, const LrParams& p)
{
    return LrConstruction<D>(p).density(component, t, x);
}

template <int D>
CubeEnsemble<D> lr_density_cubes(int component, double t, const LrParams& p)
{
    return LrConstruction<D>(p).density_cubes(component, t);
}

} // namespace nutrans

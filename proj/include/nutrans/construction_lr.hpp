#pragma once

#include <nutrans/blocks.hpp>
#include <nutrans/ensemble.hpp>
#include <nutrans/geometry.hpp>
#include <nutrans/schedule.hpp>

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace nutrans {

/// What the density recursion returns once the depth budget runs out.
enum class DensityBase { Drop, Freeze };

struct LrParams {
    double beta = 0.8;
    double nu = 2.3;
    int eta = 2;
    double p = 1.2;
    double r = 1.5;
    double q = 1.05;
    int depth = 8;
    DensityBase base = DensityBase::Freeze;
    /// Sign of the velocity on the reversed phase T1; -1 transports the reversed density.
    double t1_sign = -1.0;

    double gamma1(int d) const { return nu * (1.0 - d / p); }
    double gamma2(int d) const { return nu * d * (1.0 - 1.0 / r); }
    double gamma3(int d) const { return nu * d * (1.0 - 1.0 / q); }

    void validate(int d) const
    {
        if (!(beta > 0.0 && beta < 1.0))
            throw DomainError("beta must lie in (0,1)");
        if (!(nu > 1.0))
            throw DomainError("nu must exceed 1 so that every block satisfies 2s < a");
        if (eta < 1 || eta * d > 24)
            throw DomainError("eta must be positive with eta*d <= 24");
        if (depth < 0)
            throw DomainError("depth must be nonnegative");
        if (!(t1_sign == 1.0 || t1_sign == -1.0))
            throw DomainError("T1 sign must be +1 or -1");
    }
};

/// One descent of the L^r recursion; the child frame is y' = 2^{zoom} (y - cell).
struct LrLevel {
    int component = 1;
    SchedulePoint at;
    std::uint64_t slot = 1;
    Pow2 zoom{};
    Pow2 density_factor{};
    double velocity_factor = 1.0;
};

enum class LeafKind { Block, Terminal, Exhausted };

template <int D>
class LrConstruction;

/**
 * @brief Component i of the L^r construction frozen at one time.
 *
 * The chain of slots and phases depends on t only, so it is computed once and
 * shared by every point query.
 */
template <int D>
class LrSlice {
public:
    LrSlice(const LrConstruction<D>& owner, int component, double t);

    const std::vector<LrLevel>& levels() const { return levels_; }
    LeafKind leaf() const { return leaf_; }
    int leaf_component() const { return leaf_component_; }
    const SchedulePoint& leaf_point() const { return leaf_at_; }

    FieldSample<D> velocity(const Vec<D>& x) const;
    double density(const Vec<D>& x) const;
    CubeEnsemble<D> cubes() const;
    VolumeProfile<D> profile() const;

    /// Supports Q(x_p, 5 lambda / 4) of the moving translations, in global coordinates.
    std::vector<Cube<D>> velocity_support() const;
    /// Sup of |v| on the moving cubes over the whole leaf phase (0 when nothing moves).
    double speed() const;

private:
    struct Frame {
        Vec<D> origin{};
        Pow2 scale{}; // global = origin + 2^{-scale} * local
    };

    BlockParams leaf_block() const;
    double leaf_velocity_factor() const;
    Frame leaf_frame() const;

    const LrConstruction<D>* owner_;
    std::vector<LrLevel> levels_;
    LeafKind leaf_ = LeafKind::Exhausted;
    int leaf_component_ = 1;
    SchedulePoint leaf_at_;
    std::uint64_t leaf_slot_ = 1;
};

template <int D>
class LrConstruction {
public:
    explicit LrConstruction(const LrParams& p)
        : params_(p), partition_((p.validate(D), p.beta), p.eta, D)
    {
    }

    const LrParams& params() const { return params_; }
    const LrPartition& partition() const { return partition_; }

    LrSlice<D> slice(int component, double t) const { return LrSlice<D>(*this, component, t); }

    FieldSample<D> velocity(int component, double t, const Vec<D>& x) const
    {
        return slice(component, t).velocity(x);
    }
    double density(int component, double t, const Vec<D>& x) const
    {
        return slice(component, t).density(x);
    }
    CubeEnsemble<D> density_cubes(int component, double t) const
    {
        return slice(component, t).cubes();
    }

    /// rho_i^in: 2^{eta d} cubes of side 2^{-(eta + nu i)} and value 2^{nu d i} at the centers c_k.
    CubeEnsemble<D> initial_density(int component) const
    {
        CubeEnsemble<D> e;
        e.nu = params_.nu;
        const std::uint64_t n = cell_count<D>(params_.eta);
        for (std::uint64_t k = 1; k <= n; ++k)
            e.add(center_of_index<D>(params_.eta, k), concentrated_side(component), concentrated_value(component));
        return e;
    }

    CubeEnsemble<D> final_density() const
    {
        CubeEnsemble<D> e;
        e.nu = params_.nu;
        e.add(Vec<D>{}, Pow2{}, Pow2{});
        return e;
    }

    Pow2 concentrated_side(int component) const { return {-params_.eta, -component}; }
    Pow2 concentrated_value(int component) const { return {0, static_cast<std::int64_t>(D) * component}; }

    static void check_component(int component)
    {
        if (component < 1 || component > 200)
            throw DomainError("component index must lie in [1,200]");
    }

private:
    LrParams params_;
    LrPartition partition_;
};

template <int D>
LrSlice<D>::LrSlice(const LrConstruction<D>& owner, int component, double t) : owner_(&owner)
{
    LrConstruction<D>::check_component(component);
    detail::check_time(t);
    const auto& p = owner.params();
    const auto& part = owner.partition();
    int budget = p.depth;
    int i = component;
    double s = t;
    while (true) {
        if (budget == 0) {
            leaf_ = LeafKind::Exhausted;
            break;
        }
        if (s >= 1.0) {
            leaf_ = LeafKind::Terminal;
            break;
        }
        const SchedulePoint sp = part.locate(s);
        if (sp.phase == Phase::T2) {
            leaf_ = LeafKind::Block;
            leaf_at_ = sp;
            leaf_slot_ = static_cast<std::uint64_t>(sp.index);
            break;
        }
        LrLevel lv;
        lv.component = i;
        lv.at = sp;
        lv.slot = static_cast<std::uint64_t>(sp.index);
        if (sp.phase == Phase::T1) {
            lv.zoom = {p.eta, i};
            lv.density_factor = {0, static_cast<std::int64_t>(D) * i};
            lv.velocity_factor = p.t1_sign * sp.scale / lv.zoom.value(p.nu);
            i = 1;
        } else {
            lv.zoom = {p.eta, 0};
            lv.density_factor = {};
            lv.velocity_factor = sp.scale / lv.zoom.value(p.nu);
            i = i + 1;
            LrConstruction<D>::check_component(i);
        }
        levels_.push_back(lv);
        s = sp.local;
        --budget;
    }
    leaf_component_ = i;
    if (leaf_ != LeafKind::Block)
        leaf_at_.local = s;
}

template <int D>
BlockParams LrSlice<D>::leaf_block() const
{
    const double nu = owner_->params().nu;
    return BlockParams(owner_->params().eta, std::exp2(-nu * leaf_component_),
                       std::exp2(-nu * (leaf_component_ + 1)));
}

template <int D>
double LrSlice<D>::leaf_velocity_factor() const
{
    double f = 1.0;
    for (const auto& lv : levels_)
        f *= lv.velocity_factor;
    return f * leaf_at_.scale * std::ldexp(1.0, -owner_->params().eta);
}

template <int D>
FieldSample<D> LrSlice<D>::velocity(const Vec<D>& x) const
{
    if (leaf_ != LeafKind::Block)
        return FieldSample<D>::zero();
    const auto& p = owner_->params();
    const double cell = std::ldexp(1.0, -p.eta);
    Vec<D> y = x;
    double amp = 1.0;
    double zoom = 1.0;
    for (const auto& lv : levels_) {
        if (!in_unit_cube<D>(y))
            return FieldSample<D>::zero();
        const Vec<D> c = center_of_index<D>(p.eta, lv.slot);
        if (!cube_contains(Cube<D>(c, cell), y))
            return FieldSample<D>::zero();
        const double z = lv.zoom.value(p.nu);
        for (int l = 0; l < D; ++l)
            y[l] = z * (y[l] - c[l]);
        amp *= lv.velocity_factor;
        zoom *= z;
    }
    if (!in_unit_cube<D>(y))
        return FieldSample<D>::zero();
    const Vec<D> c = center_of_index<D>(p.eta, leaf_slot_);
    if (!cube_contains(Cube<D>(c, cell), y))
        return FieldSample<D>::zero();
    const double z = std::ldexp(1.0, p.eta);
    for (int l = 0; l < D; ++l)
        y[l] = z * (y[l] - c[l]);
    FieldSample<D> f = block_velocity<D>(leaf_at_.local, y, leaf_block());
    const double a = leaf_velocity_factor();
    return f.scale(a, a * zoom * z);
}

template <int D>
double LrSlice<D>::density(const Vec<D>& x) const
{
    const auto& p = owner_->params();
    const double cell = std::ldexp(1.0, -p.eta);
    Vec<D> y = x;
    Pow2 amp{};
    for (const auto& lv : levels_) {
        if (!in_unit_cube<D>(y))
            return 0.0;
        const Vec<D> c = center_of_index<D>(p.eta, lv.slot);
        if (!cube_contains(Cube<D>(c, cell), y)) {
            const auto other = index_of_point<D>(p.eta, y);
            if (!other)
                return 0.0;
            if (*other < lv.slot)
                return amp.value(p.nu);
            const Cube<D> conc(center_of_index<D>(p.eta, *other), owner_->concentrated_side(lv.component).value(p.nu));
            return cube_contains(conc, y) ? (amp * owner_->concentrated_value(lv.component)).value(p.nu) : 0.0;
        }
        const double z = lv.zoom.value(p.nu);
        for (int l = 0; l < D; ++l)
            y[l] = z * (y[l] - c[l]);
        amp = amp * lv.density_factor;
    }
    if (!in_unit_cube<D>(y))
        return 0.0;
    switch (leaf_) {
    case LeafKind::Terminal:
        return amp.value(p.nu);
    case LeafKind::Exhausted:
        return p.base == DensityBase::Freeze ? amp.value(p.nu) : 0.0;
    case LeafKind::Block: {
        const Vec<D> c = center_of_index<D>(p.eta, leaf_slot_);
        if (!cube_contains(Cube<D>(c, cell), y)) {
            const auto other = index_of_point<D>(p.eta, y);
            if (!other)
                return 0.0;
            if (*other < leaf_slot_)
                return amp.value(p.nu);
            const Cube<D> conc(center_of_index<D>(p.eta, *other), owner_->concentrated_side(leaf_component_).value(p.nu));
            return cube_contains(conc, y) ? (amp * owner_->concentrated_value(leaf_component_)).value(p.nu) : 0.0;
        }
        const double z = std::ldexp(1.0, p.eta);
        for (int l = 0; l < D; ++l)
            y[l] = z * (y[l] - c[l]);
        if (block_density<D>(leaf_at_.local, y, leaf_block()) == 0.0)
            return 0.0;
        return (amp * owner_->concentrated_value(leaf_component_ + 1)).value(p.nu);
    }
    }
    return 0.0;
}

namespace detail {

// Background of a component-i level in slot k: finished cells before k, concentrated cubes after.
template <int D>
void lr_background(CubeEnsemble<D>& e, const LrConstruction<D>& owner, int component, std::uint64_t slot)
{
    const int eta = owner.params().eta;
    const std::uint64_t n = cell_count<D>(eta);
    for (std::uint64_t k = 1; k <= n; ++k) {
        if (k == slot)
            continue;
        const Vec<D> c = center_of_index<D>(eta, k);
        if (k < slot)
            e.add(c, Pow2{-eta, 0}, Pow2{});
        else
            e.add(c, owner.concentrated_side(component), owner.concentrated_value(component));
    }
}

template <int D>
void lr_background_profile(VolumeProfile<D>& prof, const LrConstruction<D>& owner, int component, std::uint64_t slot)
{
    const int eta = owner.params().eta;
    const std::uint64_t n = cell_count<D>(eta);
    if (slot > 1)
        prof.add(Pow2{}, Pow2{-eta, 0}, static_cast<double>(slot - 1));
    if (slot < n)
        prof.add(owner.concentrated_value(component), owner.concentrated_side(component), static_cast<double>(n - slot));
}

} // namespace detail

template <int D>
CubeEnsemble<D> LrSlice<D>::cubes() const
{
    const auto& p = owner_->params();
    CubeEnsemble<D> cur;
    cur.nu = p.nu;
    switch (leaf_) {
    case LeafKind::Terminal:
        cur.add(Vec<D>{}, Pow2{}, Pow2{});
        break;
    case LeafKind::Exhausted:
        if (p.base == DensityBase::Freeze)
            cur.add(Vec<D>{}, Pow2{}, Pow2{});
        break;
    case LeafKind::Block: {
        detail::lr_background<D>(cur, *owner_, leaf_component_, leaf_slot_);
        const Vec<D> c = center_of_index<D>(p.eta, leaf_slot_);
        const double inv = std::ldexp(1.0, -p.eta);
        const Pow2 side{-2 * p.eta, -(leaf_component_ + 1)};
        const Pow2 value = owner_->concentrated_value(leaf_component_ + 1);
        for (const auto& bc : block_centers<D>(leaf_at_.local, leaf_block()))
            cur.add(c + inv * bc, side, value);
        break;
    }
    }
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
        CubeEnsemble<D> up;
        up.nu = p.nu;
        detail::lr_background<D>(up, *owner_, it->component, it->slot);
        up.append_scaled(cur, center_of_index<D>(p.eta, it->slot), it->zoom, it->density_factor);
        cur = std::move(up);
    }
    return cur;
}

template <int D>
VolumeProfile<D> LrSlice<D>::profile() const
{
    const auto& p = owner_->params();
    VolumeProfile<D> cur;
    cur.nu = p.nu;
    switch (leaf_) {
    case LeafKind::Terminal:
        cur.add(Pow2{}, Pow2{}, 1.0);
        break;
    case LeafKind::Exhausted:
        if (p.base == DensityBase::Freeze)
            cur.add(Pow2{}, Pow2{}, 1.0);
        break;
    case LeafKind::Block:
        detail::lr_background_profile<D>(cur, *owner_, leaf_component_, leaf_slot_);
        cur.add(owner_->concentrated_value(leaf_component_ + 1), Pow2{-2 * p.eta, -(leaf_component_ + 1)},
                static_cast<double>(cell_count<D>(p.eta)));
        break;
    }
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
        VolumeProfile<D> up;
        up.nu = p.nu;
        detail::lr_background_profile<D>(up, *owner_, it->component, it->slot);
        up.merge_scaled(cur, it->density_factor, Pow2{-it->zoom.base2, -it->zoom.nu_mult}, 1.0);
        cur = std::move(up);
    }
    return cur;
}

template <int D>
typename LrSlice<D>::Frame LrSlice<D>::leaf_frame() const
{
    const auto& p = owner_->params();
    Frame f;
    for (const auto& lv : levels_) {
        const Vec<D> c = center_of_index<D>(p.eta, lv.slot);
        const double sc = Pow2{-f.scale.base2, -f.scale.nu_mult}.value(p.nu);
        for (int l = 0; l < D; ++l)
            f.origin[l] += sc * c[l];
        f.scale = f.scale * lv.zoom;
    }
    return f;
}

template <int D>
std::vector<Cube<D>> LrSlice<D>::velocity_support() const
{
    std::vector<Cube<D>> out;
    if (leaf_ != LeafKind::Block || zeta(leaf_at_.local).d1 == 0.0)
        return out;
    const auto& p = owner_->params();
    const Frame f = leaf_frame();
    const double sc = Pow2{-f.scale.base2, -f.scale.nu_mult}.value(p.nu);
    const Vec<D> c = center_of_index<D>(p.eta, leaf_slot_);
    const double inv = std::ldexp(1.0, -p.eta);
    const BlockParams bp = leaf_block();
    for (const auto& bc : block_centers<D>(leaf_at_.local, bp)) {
        Vec<D> g;
        for (int l = 0; l < D; ++l)
            g[l] = f.origin[l] + sc * (c[l] + inv * bc[l]);
        out.emplace_back(g, sc * inv * 1.25 * bp.cube_side());
    }
    return out;
}

template <int D>
double LrSlice<D>::speed() const
{
    if (leaf_ != LeafKind::Block)
        return 0.0;
    return std::abs(leaf_velocity_factor()) * block_speed<D>(leaf_block());
}

} // namespace nutrans

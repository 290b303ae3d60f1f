#pragma once

#include <nutrans/blocks.hpp>
#include <nutrans/construction_l1.hpp>
#include <nutrans/construction_lr.hpp>
#include <nutrans/weak_form.hpp>

#include <memory>

namespace nutrans {

namespace detail {

template <class Slice>
bool same_chain(const Slice& a, const Slice& b)
{
    if (a.leaf() != b.leaf() || a.levels().size() != b.levels().size())
        return false;
    for (std::size_t j = 0; j < a.levels().size(); ++j) {
        const auto& x = a.levels()[j].at;
        const auto& y = b.levels()[j].at;
        if (x.index != y.index || x.phase != y.phase)
            return false;
    }
    return a.leaf_point().index == b.leaf_point().index && a.leaf_point().phase == b.leaf_point().phase;
}

} // namespace detail

/// The spreading block with its indicator density.
template <int D>
TransportPair<D> block_pair(const BlockParams& p)
{
    TransportPair<D> pair;
    pair.density = [p](double t) { return block_cubes<D>(t, p); };
    pair.velocity_at = [p](double t) {
        return std::function<FieldSample<D>(const Vec<D>&)>(
            [p, t](const Vec<D>& x) { return block_velocity<D>(t, x, p); });
    };
    pair.speed = [p](double) { return block_speed<D>(p); };
    return pair;
}

template <int D>
TransportPair<D> l1_pair(const L1Params& p)
{
    TransportPair<D> pair;
    pair.density = [p](double t) { return L1Slice<D>(p, t).cubes(); };
    pair.velocity_at = [p](double t) {
        auto sl = std::make_shared<L1Slice<D>>(p, t);
        return std::function<FieldSample<D>(const Vec<D>&)>([sl](const Vec<D>& x) { return sl->velocity(x); });
    };
    pair.speed = [p](double t) { return L1Slice<D>(p, t).speed(); };
    pair.same_phase = [p](double a, double b) {
        return detail::same_chain(L1Slice<D>(p, a), L1Slice<D>(p, b));
    };
    return pair;
}

template <int D>
TransportPair<D> lr_pair(const LrParams& p, int component)
{
    auto c = std::make_shared<LrConstruction<D>>(p);
    TransportPair<D> pair;
    pair.density = [c, component](double t) { return c->density_cubes(component, t); };
    pair.velocity_at = [c, component](double t) {
        auto sl = std::make_shared<LrSlice<D>>(c->slice(component, t));
        return std::function<FieldSample<D>(const Vec<D>&)>([sl, c](const Vec<D>& x) { return sl->velocity(x); });
    };
    pair.speed = [c, component](double t) { return c->slice(component, t).speed(); };
    pair.same_phase = [c, component](double a, double b) {
        return detail::same_chain(c->slice(component, a), c->slice(component, b));
    };
    return pair;
}

/// u(t, x) = -w(1 - t, x) with density rho(1 - t, x).
template <int D>
TransportPair<D> reversed_pair(const TransportPair<D>& fwd)
{
    TransportPair<D> pair;
    pair.density = [fwd](double t) { return fwd.density(1.0 - t); };
    pair.velocity_at = [fwd](double t) {
        auto w = fwd.velocity_at(1.0 - t);
        return std::function<FieldSample<D>(const Vec<D>&)>([w](const Vec<D>& x) {
            FieldSample<D> f = w(x);
            return f.scale(-1.0, -1.0);
        });
    };
    pair.speed = [fwd](double t) { return fwd.speed(1.0 - t); };
    if (fwd.same_phase)
        pair.same_phase = [fwd](double a, double b) { return fwd.same_phase(1.0 - b, 1.0 - a); };
    return pair;
}

/// Constant density with zero velocity.
template <int D>
TransportPair<D> frozen_pair(const CubeEnsemble<D>& rho)
{
    TransportPair<D> pair;
    pair.density = [rho](double) { return rho; };
    pair.velocity_at = [](double) {
        return std::function<FieldSample<D>(const Vec<D>&)>([](const Vec<D>&) { return FieldSample<D>::zero(); });
    };
    pair.speed = [](double) { return 0.0; };
    return pair;
}

} // namespace nutrans

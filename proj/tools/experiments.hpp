#pragma once

#include <nutrans/nutrans.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace nutrans::lab {

enum class Mode { L1, Lr, Block };

/// Parameters shared by every experiment; the three constructions read what they need.
struct RunParams {
    int d = 2;
    double beta = 0.8;
    double nu = 2.3;
    int eta = 2;
    double p = 1.2;
    double r = 1.5;
    double q = 1.05;
    int depth = 8;
    DensityBase base = DensityBase::Freeze;
    double t1_sign = -1.0;
    int component = 1;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int workers = 1;

    LrParams lr() const
    {
        LrParams o;
        o.beta = beta;
        o.nu = nu;
        o.eta = eta;
        o.p = p;
        o.r = r;
        o.q = q;
        o.depth = depth;
        o.base = base;
        o.t1_sign = t1_sign;
        return o;
    }

    L1Params l1() const
    {
        L1Params o;
        o.beta = beta;
        o.nu = nu;
        o.alpha = alpha;
        o.p = p;
        o.q = q;
        o.depth = depth;
        o.base = base;
        return o;
    }

    /// The generation-1 spreading block of the L^r recursion: a = 2^-nu, s = 2^-2nu.
    BlockParams block() const { return BlockParams(eta, std::exp2(-nu), std::exp2(-2.0 * nu)); }

    void validate() const
    {
        if (d != 2 && d != 3)
            throw DomainError("dimension must be 2 or 3");
        if (!(p >= 1.0 && r >= 1.0))
            throw DomainError("exponents p and r must be >= 1");
        if (!(q > 1.0))
            throw DomainError("q must exceed 1");
        if (component < 1)
            throw DomainError("component must be positive");
        lr().validate(d);
        l1().validate();
    }
};

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool upper = true; ///< pass when value <= limit, otherwise when value >= limit

    bool passed() const { return upper ? value <= limit : value >= limit; }
    double margin() const { return upper ? limit - value : value - limit; }
};

/// Runs f(0..n-1) on `workers` threads; results keep index order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, int workers, F&& f)
{
    std::vector<R> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto work = [&] {
        for (;;) {
            const std::size_t j = next++;
            if (j >= n)
                return;
            try {
                out[j] = f(j);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (w <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < w; ++k)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

/// Top-level phase interval containing t.
using IntervalFn = std::function<std::pair<double, double>(double)>;

inline IntervalFn top_intervals(Mode mode, const RunParams& rp)
{
    switch (mode) {
    case Mode::L1: {
        const double beta = rp.beta;
        return [beta](double t) {
            const auto sp = t >= 1.0 ? SchedulePoint{} : l1_locate(beta, t);
            return std::make_pair(sp.start, sp.end);
        };
    }
    case Mode::Lr: {
        auto part = std::make_shared<LrPartition>(rp.beta, rp.eta, rp.d);
        return [part](double t) {
            const auto sp = part->locate(t);
            return std::make_pair(sp.start, sp.end);
        };
    }
    case Mode::Block:
        break;
    }
    return [](double t) {
        if (t < 1.0 / 3.0)
            return std::make_pair(0.0, 1.0 / 3.0);
        if (t < 2.0 / 3.0)
            return std::make_pair(1.0 / 3.0, 2.0 / 3.0);
        return std::make_pair(2.0 / 3.0, 1.0);
    };
}

/**
 * n equispaced times on [0,1], each pushed at least offset * (interval length) inside
 * its top-level phase interval. Duplicates after the push are dropped.
 */
inline std::vector<double> sample_times(std::size_t n, const IntervalFn& interval, double offset)
{
    std::vector<double> out;
    for (std::size_t j = 0; j < n; ++j) {
        double t = n == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(n - 1);
        const auto [a, b] = interval(t);
        if (b > a) {
            const double gap = offset * (b - a);
            t = std::clamp(t, a + gap, b - gap);
        }
        if (out.empty() || t > out.back())
            out.push_back(t);
    }
    return out;
}

/// (j + 1/2) / n for j < n.
inline std::vector<double> midpoint_times(std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j)
        out[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    return out;
}

/// A construction frozen at one time.
template <int D>
struct View {
    std::function<double(const Vec<D>&)> density;
    std::function<FieldSample<D>(const Vec<D>&)> velocity;
    std::function<VolumeProfile<D>()> profile;
    /// Exact-quadrature W^{1,p} seminorm of the velocity.
    std::function<double(double p)> w1p;
    int levels = 0;
    /// (k, phase, i) of every unrolled level followed by the leaf.
    struct Step {
        std::int64_t k;
        std::string phase;
        int i;
    };
    std::vector<Step> trace;
};

template <int D>
View<D> make_view(Mode mode, const RunParams& rp, double t)
{
    View<D> v;
    switch (mode) {
    case Mode::Block: {
        const BlockParams bp = rp.block();
        v.density = [bp, t](const Vec<D>& x) { return block_density<D>(t, x, bp); };
        v.velocity = [bp, t](const Vec<D>& x) { return block_velocity<D>(t, x, bp); };
        v.profile = [bp, t] { return profile_of<D>(block_cubes<D>(t, bp)); };
        v.w1p = [bp, t](double p) {
            if (zeta(t).d1 == 0.0)
                return 0.0;
            std::vector<Cube<D>> supp;
            for (const auto& c : block_centers<D>(t, bp))
                supp.emplace_back(c, 1.25 * bp.cube_side());
            return w1p_seminorm_on_cubes<D>([&](const Vec<D>& x) { return block_velocity<D>(t, x, bp); }, p, supp,
                                            D == 2 ? 8 : 4);
        };
        v.trace.push_back({0, zeta(t).d1 == 0.0 ? "static" : "moving", 0});
        return v;
    }
    case Mode::L1: {
        auto sl = std::make_shared<L1Slice<D>>(rp.l1(), t);
        v.density = [sl](const Vec<D>& x) { return sl->density(x); };
        v.velocity = [sl](const Vec<D>& x) { return sl->velocity(x); };
        v.profile = [sl] { return sl->profile(); };
        v.w1p = [sl](double p) {
            const auto supp = sl->velocity_support(true);
            if (supp.empty())
                return 0.0;
            // every copy of the leaf block carries the same field up to translation
            const double one = w1p_seminorm_on_cubes<D>([&](const Vec<D>& x) { return sl->velocity(x); }, p, supp,
                                                        D == 2 ? 8 : 4);
            return one * std::pow(sl->copy_count(), 1.0 / p);
        };
        v.levels = static_cast<int>(sl->levels().size());
        for (const auto& lv : sl->levels())
            v.trace.push_back({lv.at.index, std::string(phase_name(lv.at.phase)), lv.generation});
        if (sl->leaf() == LeafKind::Block)
            v.trace.push_back({sl->leaf_point().index, "O", sl->leaf_generation()});
        else
            v.trace.push_back({0, sl->leaf() == LeafKind::Terminal ? "terminal" : "exhausted", 0});
        return v;
    }
    case Mode::Lr: {
        auto c = std::make_shared<LrConstruction<D>>(rp.lr());
        auto sl = std::make_shared<LrSlice<D>>(c->slice(rp.component, t));
        v.density = [sl, c](const Vec<D>& x) { return sl->density(x); };
        v.velocity = [sl, c](const Vec<D>& x) { return sl->velocity(x); };
        v.profile = [sl, c] { return sl->profile(); };
        v.w1p = [sl, c](double p) {
            const auto supp = sl->velocity_support();
            if (supp.empty())
                return 0.0;
            return w1p_seminorm_on_cubes<D>([&](const Vec<D>& x) { return sl->velocity(x); }, p, supp,
                                            D == 2 ? 8 : 4);
        };
        v.levels = static_cast<int>(sl->levels().size());
        for (const auto& lv : sl->levels())
            v.trace.push_back({lv.at.index, std::string(phase_name(lv.at.phase)), lv.component});
        if (sl->leaf() == LeafKind::Block)
            v.trace.push_back({sl->leaf_point().index, "T2", sl->leaf_component()});
        else
            v.trace.push_back({0, sl->leaf() == LeafKind::Terminal ? "terminal" : "exhausted", sl->leaf_component()});
        return v;
    }
    }
    return v;
}

struct SeriesRecord {
    double t = 0.0;
    double norm_exact = 0.0;
    double norm_grid = std::numeric_limits<double>::quiet_NaN();
    double mass = 0.0;
    double w1p = 0.0;
    int depth = 0;
};

/// grid <= 0 skips the midpoint norm.
template <int D>
SeriesRecord series_record(Mode mode, const RunParams& rp, double t, int grid)
{
    const View<D> v = make_view<D>(mode, rp, t);
    SeriesRecord rec;
    rec.t = t;
    const auto prof = v.profile();
    rec.norm_exact = lr_norm_exact<D>(prof, rp.r);
    rec.mass = mass<D>(prof);
    if (grid > 0)
        rec.norm_grid = lr_norm_grid<D>(v.density, rp.r, grid);
    rec.w1p = v.w1p(rp.p);
    rec.depth = v.levels;
    return rec;
}

namespace detail {

template <int D>
Vec<D> uniform_point(std::mt19937_64& g, double half)
{
    std::uniform_real_distribution<double> u(-half, half);
    Vec<D> x;
    for (auto& c : x)
        c = u(g);
    return x;
}

template <int D>
Vec<D> point_near(std::mt19937_64& g, const std::vector<Cube<D>>& supp)
{
    if (supp.empty() || g() % 2 == 0)
        return uniform_point<D>(g, 0.5);
    const auto& q = supp[g() % supp.size()];
    return q.center + uniform_point<D>(g, 0.5 * q.side);
}

template <int D>
const Cube<D>* containing(const std::vector<Cube<D>>& supp, const Vec<D>& x)
{
    for (const auto& q : supp)
        if (cube_contains(q, x))
            return &q;
    return nullptr;
}

/**
 * Divergence probes. The central difference uses h = 1e-5 times the side of the
 * support cube around x and is compared with the local gradient magnitude
 * max(|J(x)|, |v(center)| / side); points whose step is below the resolution of
 * doubles at x are counted but not differenced.
 */
struct DivergenceTally {
    double trace = 0.0;
    double fd = 0.0;
    std::size_t moving = 0;
    std::size_t total = 0;
    std::size_t differenced = 0;
    std::size_t unresolved = 0;

    template <int D, class F>
    void probe(F&& field, const Vec<D>& x, const Cube<D>* piece)
    {
        const FieldSample<D> f = field(x);
        trace = std::max(trace, std::abs(f.trace()));
        moving += f.is_zero() ? 0 : 1;
        ++total;
        if (!piece)
            return;
        const double h = 1e-5 * piece->side;
        const double ulp = std::nextafter(norm_inf<D>(x), 1.0) - norm_inf<D>(x);
        if (h < 1e5 * ulp) {
            ++unresolved;
            return;
        }
        const double g = std::max(f.jacobian_norm(), norm2<D>(field(piece->center).v) / piece->side);
        if (g == 0.0)
            return;
        fd = std::max(fd, std::abs(fd_divergence_at<D>(field, x, h)) / g);
        ++differenced;
    }
};

inline void push_divergence(std::vector<Check>& out, const std::string& name, const DivergenceTally& t,
                            double trace_tol, double fd_tol)
{
    out.push_back({"divergence " + name + " max|trace J|", t.trace, trace_tol, true});
    out.push_back({"divergence " + name + " central difference / local gradient", t.fd, fd_tol, true});
    // a field that is zero at every sample proves nothing
    out.push_back({"divergence " + name + " nonzero sample fraction",
                   t.total ? static_cast<double>(t.moving) / static_cast<double>(t.total) : 0.0, 0.05, false});
    out.push_back({"divergence " + name + " differenced sample fraction",
                   t.total ? static_cast<double>(t.differenced) / static_cast<double>(t.total) : 0.0, 0.05, false});
}

} // namespace detail

/// Trace of the analytic Jacobian and central-difference divergence at random (t, x).
template <int D>
std::vector<Check> divergence_suite(const RunParams& rp, std::size_t samples, double trace_tol = 1e-10,
                                    double fd_tol = 1e-4)
{
    std::vector<Check> out;
    std::mt19937_64 g(rp.seed);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    std::normal_distribution<double> nd;

    detail::DivergenceTally tb;
    for (std::size_t j = 0; j < samples; ++j) {
        Vec<D> xi;
        for (auto& c : xi)
            c = nd(g);
        xi = (1.0 / norm2<D>(xi)) * xi;
        const Cube<D> whole(Vec<D>{}, 2.5);
        const Vec<D> x = detail::uniform_point<D>(g, 1.5);
        tb.probe<D>([&](const Vec<D>& y) { return b_field<D>(y, xi); }, x, cube_contains(whole, x) ? &whole : nullptr);
    }
    detail::push_divergence(out, "b_field", tb, trace_tol, fd_tol);

    const BlockParams bp = rp.block();
    detail::DivergenceTally tk;
    for (std::size_t j = 0; j < samples; ++j) {
        const double t = ut(g);
        std::vector<Cube<D>> supp;
        for (const auto& c : block_centers<D>(t, bp))
            supp.emplace_back(c, 1.25 * bp.cube_side());
        const Vec<D> x = detail::point_near<D>(g, supp);
        tk.probe<D>([&](const Vec<D>& y) { return block_velocity<D>(t, y, bp); }, x, detail::containing<D>(supp, x));
    }
    detail::push_divergence(out, "block", tk, trace_tol, fd_tol);

    const L1Params lp = rp.l1();
    detail::DivergenceTally tl;
    for (std::size_t j = 0; j < samples; ++j) {
        const L1Slice<D> sl(lp, ut(g));
        const auto supp = sl.velocity_support(true);
        const Vec<D> x = detail::point_near<D>(g, supp);
        tl.probe<D>([&](const Vec<D>& y) { return sl.velocity(y); }, x, detail::containing<D>(supp, x));
    }
    detail::push_divergence(out, "l1 depth " + std::to_string(rp.depth), tl, trace_tol, fd_tol);

    const LrConstruction<D> c(rp.lr());
    for (int i = 1; i <= 3; ++i) {
        detail::DivergenceTally tr;
        for (std::size_t j = 0; j < samples / 3 + 1; ++j) {
            const auto sl = c.slice(i, ut(g));
            const auto supp = sl.velocity_support();
            const Vec<D> x = detail::point_near<D>(g, supp);
            tr.probe<D>([&](const Vec<D>& y) { return sl.velocity(y); }, x, detail::containing<D>(supp, x));
        }
        detail::push_divergence(out, "lr i=" + std::to_string(i) + " depth " + std::to_string(rp.depth), tr,
                                trace_tol, fd_tol);
    }
    return out;
}

/// Freeze mode conserves mass exactly; drop mode loses less as the depth grows.
template <int D>
std::vector<Check> mass_suite(const RunParams& rp, std::size_t ntimes)
{
    std::vector<Check> out;
    std::mt19937_64 g(rp.seed);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    std::vector<double> times{0.0, 1.0};
    while (times.size() < ntimes)
        times.push_back(ut(g));

    RunParams fr = rp;
    fr.base = DensityBase::Freeze;
    RunParams dr = rp;
    dr.base = DensityBase::Drop;

    double dev = 0.0;
    std::size_t violations = 0;
    for (double t : times) {
        dev = std::max(dev, std::abs(mass<D>(L1Slice<D>(fr.l1(), t).profile()) - 1.0));
        double last = 2.0;
        for (int k = 0; k <= rp.depth; ++k) {
            dr.depth = k;
            const double deficit = 1.0 - mass<D>(L1Slice<D>(dr.l1(), t).profile());
            violations += deficit > last ? 1 : 0;
            last = deficit;
        }
    }
    out.push_back({"mass l1 freeze max|mass-1|", dev, 0.0, true});
    out.push_back({"mass l1 drop deficit increases with depth (count)", static_cast<double>(violations), 0.0, true});

    for (int i = 1; i <= 3; ++i) {
        const LrConstruction<D> cf(fr.lr());
        double devr = 0.0;
        std::size_t vr = 0;
        for (double t : times) {
            devr = std::max(devr, std::abs(mass<D>(cf.slice(i, t).profile()) - 1.0));
            double last = 2.0;
            for (int k = 0; k <= rp.depth; ++k) {
                dr.depth = k;
                const LrConstruction<D> cd(dr.lr());
                const double deficit = 1.0 - mass<D>(cd.slice(i, t).profile());
                vr += deficit > last ? 1 : 0;
                last = deficit;
            }
        }
        out.push_back({"mass lr i=" + std::to_string(i) + " freeze max|mass-1|", devr, 0.0, true});
        out.push_back({"mass lr i=" + std::to_string(i) + " drop deficit increases with depth (count)",
                       static_cast<double>(vr), 0.0, true});
    }
    return out;
}

struct WeakFormSettings {
    std::size_t times = 20;
    std::size_t tests = 10;
    double dt = 1e-4;
    int resolution = 1024;
    double tolerance = 0.05;
    double refinement_ratio = 0.5;
    double max_cubes = 2.0e5;
};

namespace detail {

template <int D>
void weak_pair_checks(std::vector<Check>& out, const std::string& name, const TransportPair<D>& pair,
                      const WeakFormSettings& s, std::uint64_t seed, int workers)
{
    const auto tests = test_dictionary<D>(s.tests);
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> ut(4.0 * s.dt, 1.0 - 4.0 * s.dt);
    std::vector<double> times;
    for (std::size_t attempt = 0; times.size() < s.times && attempt < 100000; ++attempt) {
        const double t = ut(g);
        if (pair.same_phase && !pair.same_phase(t - s.dt, t + s.dt))
            continue;
        if (static_cast<double>(pair.density(t).size()) > s.max_cubes)
            continue;
        times.push_back(t);
    }
    WeakResidualOptions base;
    base.dt = s.dt;
    base.resolution = s.resolution;
    WeakResidualOptions fine = base;
    fine.dt *= 0.5;
    fine.resolution *= 2;
    const auto res = parallel_map<std::pair<double, double>>(times.size(), workers, [&](std::size_t j) {
        const auto a = weak_residuals<D>(pair, tests, times[j], base);
        const auto b = weak_residuals<D>(pair, tests, times[j], fine);
        return std::make_pair(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
    });
    double worst = 0.0, worst_fine = 0.0;
    for (const auto& [a, b] : res) {
        worst = std::max(worst, a);
        worst_fine = std::max(worst_fine, b);
    }
    out.push_back({"weakform " + name + " times found", static_cast<double>(times.size()),
                   static_cast<double>(s.times), false});
    out.push_back({"weakform " + name + " max residual", worst, s.tolerance, true});
    out.push_back({"weakform " + name + " residual ratio under (dt,h)/2", worst > 0.0 ? worst_fine / worst : 0.0,
                   s.refinement_ratio, true});
}

} // namespace detail

/// Weak continuity residual of the selected pair, its time reversal and the frozen final state.
template <int D>
std::vector<Check> weakform_suite(const RunParams& rp, Mode mode, const WeakFormSettings& s)
{
    std::vector<Check> out;
    TransportPair<D> fwd;
    std::string name;
    switch (mode) {
    case Mode::Block:
        fwd = block_pair<D>(rp.block());
        name = "block";
        break;
    case Mode::L1:
        fwd = l1_pair<D>(rp.l1());
        name = "l1";
        break;
    case Mode::Lr:
        fwd = lr_pair<D>(rp.lr(), rp.component);
        name = "lr i=" + std::to_string(rp.component);
        break;
    }
    detail::weak_pair_checks<D>(out, name, fwd, s, rp.seed, rp.workers);
    detail::weak_pair_checks<D>(out, "reversed " + name, reversed_pair<D>(fwd), s, rp.seed + 1, rp.workers);
    CubeEnsemble<D> unit;
    unit.add(Vec<D>{}, Pow2{}, Pow2{});
    detail::weak_pair_checks<D>(out, "frozen final state", frozen_pair<D>(unit), s, rp.seed + 2, rp.workers);
    return out;
}

namespace detail {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Time of the middle of T2 in slot 1 reached through i-1 descents along T3 of slot 1.
inline double lr_chain_time(const LrPartition& part, int i)
{
    const auto& cp = part.checkpoints(1);
    double t = cp.mid + 0.5 * (cp.t2 - cp.mid);
    for (int j = 1; j < i; ++j)
        t = cp.t2 + t * (cp.end - cp.t2);
    return t;
}

} // namespace detail

/**
 * W^{1,p} rescaling law of the block field, and level-to-level ratios of the moving
 * velocity and of the concentrated density against the closed-form heuristics.
 * velocity_nu is the exponent used for the velocity ratios.
 */
template <int D>
std::vector<Check> scaling_suite(const RunParams& rp, double law_tol = 0.02, double ratio_tol = 0.10,
                                 double velocity_nu = 4.0)
{
    std::vector<Check> out;
    const BlockParams bp = rp.block();
    const double t = 0.5;
    const int panels = D == 2 ? 16 : 6;
    std::vector<Cube<D>> supp;
    for (const auto& c : block_centers<D>(t, bp))
        supp.emplace_back(c, 1.25 * bp.cube_side());
    auto base = [&](const Vec<D>& x) { return block_velocity<D>(t, x, bp); };
    const double ref = w1p_seminorm_on_cubes<D>(base, rp.p, supp, panels);
    for (int m = 1; m <= 3; ++m) {
        const double z = std::ldexp(1.0, m);
        auto g = [&](const Vec<D>& x) {
            FieldSample<D> f = base(z * x);
            return f.scale(1.0, z);
        };
        std::vector<Cube<D>> s2;
        for (const auto& q : supp)
            s2.emplace_back((1.0 / z) * q.center, q.side / z);
        const double want = std::pow(z, 1.0 - D / rp.p);
        out.push_back({"scaling W1p law m=" + std::to_string(m) + " relative error",
                       detail::rel_err(w1p_seminorm_on_cubes<D>(g, rp.p, s2, panels) / ref, want), law_tol, true});
    }

    RunParams vp = rp;
    vp.nu = velocity_nu;
    vp.depth = std::max(rp.depth, 4);
    const LrConstruction<D> cv(vp.lr());
    std::vector<double> w(5);
    for (int i = 1; i <= 4; ++i) {
        const auto sl = cv.slice(1, detail::lr_chain_time(cv.partition(), i));
        w[i] = w1p_seminorm_on_cubes<D>([&](const Vec<D>& x) { return sl.velocity(x); }, rp.p, sl.velocity_support(),
                                        panels);
    }
    const double vh = velocity_heuristic(D, rp.eta, velocity_nu, rp.beta, rp.p, 2)
                      / velocity_heuristic(D, rp.eta, velocity_nu, rp.beta, rp.p, 1);
    for (int i = 1; i <= 3; ++i) {
        out.push_back({"scaling velocity W1p ratio i=" + std::to_string(i) + "->" + std::to_string(i + 1)
                           + " vs heuristic",
                       detail::rel_err(w[i + 1] / w[i], vh), ratio_tol, true});
        // the displacement (1 - a) of the level-i block is the only factor the heuristic drops
        const double corr = vh * (1.0 - std::exp2(-velocity_nu * (i + 1))) / (1.0 - std::exp2(-velocity_nu * i));
        out.push_back({"scaling velocity W1p ratio i=" + std::to_string(i) + "->" + std::to_string(i + 1)
                           + " vs heuristic with displacement factor",
                       detail::rel_err(w[i + 1] / w[i], corr), 1e-3, true});
    }

    RunParams dp = rp;
    dp.depth = std::max(rp.depth, 4);
    const LrConstruction<D> cd(dp.lr());
    std::vector<double> dn(5);
    for (int i = 1; i <= 4; ++i) {
        const auto prof = cd.slice(1, detail::lr_chain_time(cd.partition(), i)).profile();
        // the 2^{eta d} moving cubes carry the value 2^{nu d (i+1)}
        VolumeProfile<D> moving;
        moving.nu = prof.nu;
        for (const auto& [key, n] : prof.counts)
            if (key.first.base2 == 0 && key.first.nu_mult == static_cast<std::int64_t>(D) * (i + 1))
                moving.add(key.first, key.second, n);
        dn[i] = lr_norm_exact<D>(moving, rp.r);
    }
    const double x = density_series_ratio(D, rp.eta, rp.nu, rp.r);
    for (int i = 1; i <= 3; ++i)
        out.push_back({"scaling density L^r ratio i=" + std::to_string(i) + "->" + std::to_string(i + 1)
                           + " vs heuristic",
                       detail::rel_err(dn[i + 1] / dn[i], x), ratio_tol, true});
    return out;
}

/// One unrolled level equals the rescaled construction one level shallower.
template <int D>
std::vector<Check> selfsimilar_suite(const RunParams& rp, std::size_t samples)
{
    std::vector<Check> out;
    std::mt19937_64 g(rp.seed);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    RunParams deep = rp;
    deep.depth = std::max(rp.depth, 1);
    RunParams shallow = rp;
    shallow.depth = deep.depth - 1;

    const L1Params p8 = deep.l1(), p7 = shallow.l1();
    double dv = 0.0, dd = 0.0;
    for (std::size_t n = 0; n < samples;) {
        const double t = ut(g);
        const auto sp = l1_locate(rp.beta, t);
        if (sp.phase != Phase::E)
            continue;
        const L1Slice<D> outer(p8, t), inner(p7, sp.local);
        const Vec<D> x = detail::point_near<D>(g, outer.velocity_support(true));
        const int i = static_cast<int>(sp.index);
        const auto c = cell_center<D>(i, x);
        if (!c)
            continue;
        const double z = std::exp2((1.0 + rp.nu) * i);
        const Vec<D> y = z * (x - *c);
        const auto a = outer.velocity(x);
        const auto b = inner.velocity(y);
        const double f = -sp.scale / z;
        for (int l = 0; l < D; ++l)
            dv = std::max(dv, std::abs(a.v[l] - f * b.v[l]) / std::max(1.0, std::abs(a.v[l])));
        const double ra = outer.density(x);
        const double rb = std::exp2(rp.nu * D * i) * inner.density(y);
        dd = std::max(dd, std::abs(ra - rb) / std::max(1.0, ra));
        ++n;
    }
    out.push_back({"selfsimilar l1 velocity on E relative deviation", dv, 1e-12, true});
    out.push_back({"selfsimilar l1 density on E relative deviation", dd, 1e-12, true});

    const LrConstruction<D> c8(deep.lr()), c7(shallow.lr());
    double lv = 0.0, ld = 0.0;
    const double zoom = std::ldexp(1.0, rp.eta);
    for (std::size_t n = 0; n < samples;) {
        const double t = ut(g);
        const auto sp = c8.partition().locate(t);
        if (sp.phase != Phase::T3)
            continue;
        const Vec<D> ck = center_of_index<D>(rp.eta, static_cast<std::uint64_t>(sp.index));
        const Vec<D> x = ck + detail::uniform_point<D>(g, 0.5 / zoom);
        const int i = 1 + static_cast<int>(n % 3);
        const Vec<D> y = zoom * (x - ck);
        const auto a = c8.velocity(i, t, x);
        const auto b = c7.velocity(i + 1, sp.local, y);
        const double f = sp.scale / zoom;
        for (int l = 0; l < D; ++l)
            lv = std::max(lv, std::abs(a.v[l] - f * b.v[l]) / std::max(1.0, std::abs(a.v[l])));
        const double ra = c8.density(i, t, x);
        ld = std::max(ld, std::abs(ra - c7.density(i + 1, sp.local, y)) / std::max(1.0, ra));
        ++n;
    }
    out.push_back({"selfsimilar lr velocity on T3 relative deviation", lv, 1e-12, true});
    out.push_back({"selfsimilar lr density on T3 relative deviation", ld, 1e-12, true});
    return out;
}

/// Closed-form constants of the run parameters, verdict coherence and the feasibility recipe.
inline std::vector<Check> contraction_suite(const RunParams& rp, std::size_t tuples)
{
    std::vector<Check> out;
    const LrExponents e{rp.d, rp.beta, rp.nu, rp.eta, rp.p, rp.r, rp.q};
    const auto c = contraction_constants(e);
    const double below_one = std::nextafter(1.0, 0.0);
    out.push_back({"contraction F", c.F, below_one, true});
    out.push_back({"contraction G_Y", c.G_Y, below_one, true});
    out.push_back({"contraction G_Z", c.G_Z, below_one, true});
    out.push_back({"contraction nu factor", c.nu_factor, below_one, true});

    std::mt19937_64 g(rp.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t mismatches = 0, feasible = 0;
    for (std::size_t j = 0; j < tuples; ++j) {
        LrExponents x;
        x.d = 2 + static_cast<int>(u(g) * 3);
        x.beta = 0.05 + 0.9 * u(g);
        x.eta = 1 + static_cast<int>(u(g) * 4);
        x.nu = 1.0 + 6.0 * u(g);
        x.p = 1.0 + 0.6 * u(g);
        x.r = 1.0 + 1.5 * u(g);
        x.q = 1.0 + 0.4 * u(g);
        const auto a = range_verdicts(x);
        const auto b = constant_verdicts(x);
        mismatches += (a.p_range != b.p_range) + (a.r_range != b.r_range) + (a.q_range != b.q_range)
                      + (a.nu_range != b.nu_range);
        feasible += a.all() ? 1 : 0;
    }
    out.push_back({"contraction verdict mismatches over " + std::to_string(tuples) + " tuples",
                   static_cast<double>(mismatches), 0.0, true});
    out.push_back({"contraction tuples inside every range", static_cast<double>(feasible), 1.0, false});

    const auto f = feasibility(2, 1.2, 1.5);
    out.push_back({"feasibility(2,1.2,1.5) margin - 1/6", std::abs(f.margin - 1.0 / 6.0), 1e-12, true});
    const bool gates = f.feasible && f.sharp_range && f.extra_condition && f.nu_above_nu0 && f.p_range && f.r_range
                       && f.q_range && range_verdicts(f.exponents()).all() && constant_verdicts(f.exponents()).all();
    out.push_back({"feasibility(2,1.2,1.5) passes every gate", gates ? 1.0 : 0.0, 1.0, false});
    out.push_back({"feasibility(2,2,2) infeasible", feasibility(2, 2.0, 2.0).feasible ? 0.0 : 1.0, 1.0, false});
    return out;
}

/// Exact L^r norms over sampled times: bounded for the asynchronous construction, blowing up for L^1.
template <int D>
std::vector<Check> bounds_suite(const RunParams& rp, std::size_t ntimes, double offset = 1e-6,
                                double stability_tol = 0.05, double blowup_factor = 2.0)
{
    std::vector<Check> out;
    auto series_max = [&](Mode mode, int depth, double* mass_dev) {
        RunParams q = rp;
        q.depth = depth;
        // the L1 density is singular at t = 0 for every depth, so that series uses cell midpoints
        const auto times = mode == Mode::L1 ? midpoint_times(ntimes) : sample_times(ntimes, top_intervals(mode, q), offset);
        const auto recs = parallel_map<SeriesRecord>(times.size(), rp.workers, [&](std::size_t j) {
            return series_record<D>(mode, q, times[j], 0);
        });
        double m = 0.0;
        for (const auto& r : recs) {
            m = std::max(m, r.norm_exact);
            if (mass_dev)
                *mass_dev = std::max(*mass_dev, std::abs(r.mass - 1.0));
        }
        return m;
    };
    const double bound = density_series_bound(D, rp.eta, rp.nu, rp.r);
    const double lr_deep = series_max(Mode::Lr, rp.depth, nullptr);
    const double lr_shallow = series_max(Mode::Lr, 4, nullptr);
    out.push_back({"bounds lr max L^r vs closed-form bound", lr_deep, bound, true});
    out.push_back({"bounds lr depth-4 vs depth-" + std::to_string(rp.depth) + " max relative difference",
                   detail::rel_err(lr_shallow, lr_deep), stability_tol, true});
    double dev = 0.0;
    const double l1_deep = series_max(Mode::L1, rp.depth, &dev);
    const double l1_shallow = series_max(Mode::L1, 4, &dev);
    out.push_back({"bounds l1 max L^r depth-" + std::to_string(rp.depth) + " / depth-4", l1_deep / l1_shallow,
                   blowup_factor, false});
    out.push_back({"bounds l1 max|mass-1|", dev, 0.0, true});
    return out;
}

} // namespace nutrans::lab

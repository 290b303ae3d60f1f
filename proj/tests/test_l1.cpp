#include <nutrans/construction_l1.hpp>

#include "naive.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace nutrans;

namespace {

L1Params params(int depth, DensityBase base = DensityBase::Freeze)
{
    L1Params p;
    p.depth = depth;
    p.base = base;
    return p;
}

Vec<2> random_point(std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    return {u(gen), u(gen)};
}

} // namespace

TEST(L1, VelocityVanishesAtEndsAndOutside)
{
    const auto p = params(8);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int j = 0; j < 500; ++j) {
        const auto x = random_point(gen);
        EXPECT_TRUE(l1_velocity<2>(0.0, x, p).is_zero());
        EXPECT_TRUE(l1_velocity<2>(1.0, x, p).is_zero());
        Vec<2> far = x;
        far[0] += x[0] < 0 ? -0.6 : 0.6;
        EXPECT_TRUE(l1_velocity<2>(ut(gen), far, p).is_zero());
        EXPECT_EQ(l1_density<2>(ut(gen), far, p), 0.0);
    }
}

TEST(L1, BoundaryDensities)
{
    const auto p = params(3);
    const double top = std::exp2(p.nu * 2);
    EXPECT_DOUBLE_EQ(l1_density<2>(0.0, Vec<2>{-0.25, -0.25}, p), top);
    EXPECT_EQ(l1_density<2>(1.0, Vec<2>{}, p), 1.0);
    const auto in = l1_initial_density<2>(p);
    EXPECT_EQ(in.size(), 4u);
    EXPECT_EQ(mass<2>(in), 1.0);
    EXPECT_EQ(mass<2>(l1_final_density<2>(p)), 1.0);
    const auto e0 = l1_density_cubes<2>(0.0, p);
    ASSERT_EQ(e0.size(), 4u);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(e0.cubes[j].side_exp, in.cubes[j].side_exp);
        EXPECT_EQ(e0.cubes[j].value_exp, in.cubes[j].value_exp);
        EXPECT_NEAR(norm_inf<2>(e0.cubes[j].center - in.cubes[j].center), 0.0, 1e-16);
    }
}

TEST(L1, MatchesNaiveRecursion)
{
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int depth : {1, 3, 6, 8}) {
        const auto p = params(depth);
        for (int j = 0; j < 3000; ++j) {
            const double t = ut(gen);
            const auto x = random_point(gen);
            const auto a = l1_velocity<2>(t, x, p);
            const auto b = naive::l1_velocity<2>(t, x, p, depth);
            const double sc = std::max(1.0, norm2<2>(a.v));
            for (int l = 0; l < 2; ++l)
                ASSERT_NEAR(a.v[l], b.v[l], 1e-12 * sc);
            ASSERT_NEAR(a.jacobian_norm(), b.jacobian_norm(), 1e-10 * std::max(1.0, a.jacobian_norm()));
            const double ra = l1_density<2>(t, x, p);
            const double rb = naive::l1_density<2>(t, x, p, depth);
            ASSERT_NEAR(ra, rb, 1e-12 * std::max(1.0, ra));
        }
    }
}

TEST(L1, SelfSimilarityOnE)
{
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    const L1Params p8 = params(8), p7 = params(7);
    int checked = 0;
    while (checked < 500) {
        const double t = ut(gen);
        const auto sp = l1_locate(p8.beta, t);
        if (sp.phase != Phase::E)
            continue;
        const auto x = random_point(gen);
        const int i = static_cast<int>(sp.index);
        const auto c = *cell_center<2>(i, x);
        const double z = std::exp2((1 + p8.nu) * i);
        const auto inner = l1_velocity<2>(sp.local, naive::zoom<2>(x, c, z), p7);
        const double factor = -1.0 / (z * (1.0 / sp.scale));
        const auto outer = l1_velocity<2>(t, x, p8);
        for (int l = 0; l < 2; ++l)
            ASSERT_NEAR(outer.v[l], factor * inner.v[l], 1e-12 * std::max(1.0, std::abs(outer.v[l])));
        ++checked;
    }
}

TEST(L1, TraceFree)
{
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    const auto p = params(8);
    double worst = 0.0;
    int moving = 0;
    for (int j = 0; j < 20000; ++j) {
        const L1Slice<2> sl(p, ut(gen));
        const auto supp = sl.cube_count() < 1e5 ? sl.velocity_support() : std::vector<Cube<2>>{};
        Vec<2> x = random_point(gen);
        if (!supp.empty()) {
            // aim at a moving cube half the time
            const auto& q = supp[j % supp.size()];
            std::uniform_real_distribution<double> u(-0.5, 0.5);
            if (j % 2 == 0)
                x = Vec<2>{q.center[0] + q.side * u(gen), q.center[1] + q.side * u(gen)};
        }
        const auto f = sl.velocity(x);
        if (!f.is_zero())
            ++moving;
        worst = std::max(worst, std::abs(f.trace()) / std::max(1.0, f.jacobian_norm()));
    }
    EXPECT_GT(moving, 1000);
    EXPECT_LE(worst, 1e-14);
}

TEST(L1, DensityValueLattice)
{
    const int depth = 5;
    const auto p = params(depth);
    std::set<double> allowed{0.0, 1.0};
    for (int i = 1; i <= depth + 1; ++i)
        allowed.insert(Pow2{0, 2 * i}.value(p.nu));
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int j = 0; j < 50; ++j) {
        const L1Slice<2> sl(p, ut(gen));
        for (int a = 0; a < 256; ++a)
            for (int b = 0; b < 256; ++b) {
                const Vec<2> x{-0.5 + (a + 0.5) / 256, -0.5 + (b + 0.5) / 256};
                ASSERT_TRUE(allowed.count(sl.density(x))) << sl.density(x);
            }
    }
}

TEST(L1, FreezeMassExactAndDropDeficitShrinks)
{
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int j = 0; j < 50; ++j) {
        const double t = ut(gen);
        double last_deficit = 2.0;
        for (int depth = 0; depth <= 8; ++depth) {
            EXPECT_EQ(mass<2>(L1Slice<2>(params(depth), t).profile()), 1.0);
            const double def = 1.0 - mass<2>(L1Slice<2>(params(depth, DensityBase::Drop), t).profile());
            EXPECT_LE(def, last_deficit);
            last_deficit = def;
        }
    }
}

TEST(L1, CubesMatchPointwise)
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    const auto p = params(6);
    int done = 0;
    while (done < 30) {
        const L1Slice<2> sl(p, ut(gen));
        if (sl.cube_count() > 2e5)
            continue;
        const auto e = sl.cubes();
        const EnsembleIndex<2> idx(e);
        for (int j = 0; j < 300; ++j) {
            const auto x = random_point(gen);
            ASSERT_EQ(idx.value_at(x), sl.density(x));
        }
        EXPECT_EQ(mass<2>(e), 1.0);
        EXPECT_DOUBLE_EQ(lr_norm_exact<2>(e, 1.5), lr_norm_exact<2>(sl.profile(), 1.5));
        ++done;
    }
}

TEST(L1, DepthChangesShrink)
{
    // fraction of sampled times where depth N and N+1 differ, for N = 2, 4, 6
    std::vector<double> frac;
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    std::vector<double> ts(4000);
    for (auto& t : ts)
        t = ut(gen);
    for (int n : {2, 4, 6}) {
        int diff = 0;
        for (double t : ts) {
            const L1Slice<2> a(params(n), t), b(params(n + 1), t);
            if (a.leaf() != b.leaf() || a.levels().size() != b.levels().size())
                ++diff;
        }
        frac.push_back(static_cast<double>(diff) / ts.size());
    }
    EXPECT_LE(frac[1], 0.6 * frac[0]);
    EXPECT_LE(frac[2], 0.6 * frac[1]);
}

TEST(L1, RejectsBadParams)
{
    L1Params p;
    p.beta = 1.0;
    EXPECT_THROW(l1_velocity<2>(0.5, Vec<2>{}, p), DomainError);
    p = L1Params{};
    p.nu = 0.9;
    EXPECT_THROW(l1_density<2>(0.5, Vec<2>{}, p), DomainError);
    EXPECT_THROW(l1_density<2>(1.5, Vec<2>{}, L1Params{}), DomainError);
}

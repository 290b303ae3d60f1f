#include <nutrans/construction_lr.hpp>

#include "frozen_values.hpp"
#include "naive.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace nutrans;

namespace {

LrParams params(int depth, DensityBase base = DensityBase::Freeze)
{
    LrParams p;
    p.depth = depth;
    p.base = base;
    return p;
}

Vec<2> random_point(std::mt19937_64& gen, double half = 0.5)
{
    std::uniform_real_distribution<double> u(-half, half);
    return {u(gen), u(gen)};
}

} // namespace

TEST(Lr, VelocityZeroAtOneAndOutside)
{
    const LrConstruction<2> c(params(8));
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int j = 0; j < 500; ++j) {
        const auto x = random_point(gen);
        for (int i = 1; i <= 3; ++i)
            EXPECT_TRUE(c.velocity(i, 1.0, x).is_zero());
        Vec<2> far = x;
        far[1] += x[1] < 0 ? -0.6 : 0.6;
        EXPECT_TRUE(c.velocity(1, ut(gen), far).is_zero());
        EXPECT_EQ(c.density(2, ut(gen), far), 0.0);
    }
}

TEST(Lr, BoundaryDensities)
{
    for (int i = 1; i <= 3; ++i) {
        const LrConstruction<2> c(params(1));
        const double v = std::exp2(c.params().nu * 2 * i);
        const double half = 0.5 * std::exp2(-(c.params().eta + c.params().nu * i));
        for (std::uint64_t k = 1; k <= 16; ++k) {
            const Vec<2> ck = center_of_index<2>(2, k);
            EXPECT_DOUBLE_EQ(c.density(i, 0.0, ck + Vec<2>{0.3 * half, -0.7 * half}), v);
            EXPECT_EQ(c.density(i, 0.0, ck + Vec<2>{1.5 * half, 0.0}), 0.0);
        }
        EXPECT_EQ(c.density(i, 1.0, Vec<2>{0.4, -0.2}), 1.0);
        EXPECT_EQ(mass<2>(c.initial_density(i)), 1.0);
    }
}

TEST(Lr, InitialNorms)
{
    const LrConstruction<2> c(params(4));
    const auto in = c.initial_density(1);
    EXPECT_NEAR(lr_norm_exact<2>(in, 1.5), frozen::rho_in_norm_i1, 1e-14);
    EXPECT_NEAR(lr_norm_exact<2>(in, 1.5), std::exp2(2.3 * 2 * 0.5 / 1.5), 1e-14);
    CubeEnsemble<2> single;
    single.nu = c.params().nu;
    single.add(Vec<2>{}, c.concentrated_side(1), c.concentrated_value(1));
    EXPECT_NEAR(lr_norm_exact<2>(single, 1.5), frozen::rho_c_norm_i1, 1e-14);
    // one cube carries an extra 2^{-eta d / r}
    EXPECT_NEAR(lr_norm_exact<2>(single, 1.5) / lr_norm_exact<2>(in, 1.5), std::exp2(-4.0 / 1.5), 1e-14);
    const auto e0 = c.density_cubes(1, 0.0);
    EXPECT_EQ(e0.size(), 16u);
    EXPECT_EQ(mass<2>(e0), 1.0);
}

TEST(Lr, MatchesNaiveRecursion)
{
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int depth : {1, 2, 5, 8}) {
        for (double sign : {-1.0, 1.0}) {
            auto p = params(depth);
            p.t1_sign = sign;
            const LrConstruction<2> c(p);
            for (int j = 0; j < 1500; ++j) {
                const int i = 1 + j % 3;
                const double t = ut(gen);
                const auto x = random_point(gen);
                const auto a = c.velocity(i, t, x);
                const auto b = naive::lr_velocity<2>(i, t, x, p, depth);
                for (int l = 0; l < 2; ++l)
                    ASSERT_NEAR(a.v[l], b.v[l], 1e-12 * std::max(1.0, std::abs(a.v[l])));
                ASSERT_NEAR(a.jacobian_norm(), b.jacobian_norm(), 1e-10 * std::max(1.0, a.jacobian_norm()));
                const double ra = c.density(i, t, x);
                const double rb = naive::lr_density<2>(i, t, x, p, depth);
                ASSERT_NEAR(ra, rb, 1e-12 * std::max(1.0, ra));
            }
        }
    }
}

TEST(Lr, T2IsDepthIndependent)
{
    const LrConstruction<2> c1(params(1)), c8(params(8));
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    int n = 0;
    while (n < 500) {
        const double t = ut(gen);
        const auto sp = c1.partition().locate(t);
        if (sp.phase != Phase::T2)
            continue;
        const Vec<2> ck = center_of_index<2>(2, static_cast<std::uint64_t>(sp.index));
        const Vec<2> x = ck + random_point(gen, 0.125);
        const auto a = c1.velocity(2, t, x), b = c8.velocity(2, t, x);
        ASSERT_EQ(a.v, b.v);
        ASSERT_EQ(c1.density(2, t, x), c8.density(2, t, x));
        ++n;
    }
}

TEST(Lr, SelfSimilarityOnT3)
{
    const LrConstruction<2> c8(params(8)), c7(params(7));
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    int n = 0;
    while (n < 500) {
        const double t = ut(gen);
        const auto sp = c8.partition().locate(t);
        if (sp.phase != Phase::T3)
            continue;
        const Vec<2> ck = center_of_index<2>(2, static_cast<std::uint64_t>(sp.index));
        const Vec<2> x = ck + random_point(gen, 0.125);
        const int i = 1 + n % 3;
        const auto inner = c7.velocity(i + 1, sp.local, naive::zoom<2>(x, ck, 4.0));
        const auto outer = c8.velocity(i, t, x);
        const double factor = sp.scale / 4.0;
        for (int l = 0; l < 2; ++l)
            ASSERT_NEAR(outer.v[l], factor * inner.v[l], 1e-12 * std::max(1.0, std::abs(outer.v[l])));
        ASSERT_EQ(c8.density(i, t, x), c7.density(i + 1, sp.local, naive::zoom<2>(x, ck, 4.0)));
        ++n;
    }
}

TEST(Lr, InterfaceAtMid)
{
    // 2^{nu d i} rho_1(0, 2^{nu i} y) = 2^{nu d (i+1)} rho_b(0, y; 2^{-nu i}, 2^{-nu(i+1)}) in the zoomed cell
    const LrConstruction<2> c(params(6));
    const double nu = c.params().nu;
    for (int i = 1; i <= 3; ++i) {
        const BlockParams bp(2, std::exp2(-nu * i), std::exp2(-nu * (i + 1)));
        const int n = 256;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                // the block cubes sit within 2^{-nu i} / 2 of the origin
                const double w = std::exp2(-nu * i);
                const Vec<2> y{w * (-0.5 + (a + 0.5) / n), w * (-0.5 + (b + 0.5) / n)};
                const double lhs = std::exp2(nu * 2 * i) * c.density(1, 0.0, std::exp2(nu * i) * y);
                const double rhs = std::exp2(nu * 2 * (i + 1)) * block_density<2>(0.0, y, bp);
                ASSERT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, lhs));
            }
    }
}

TEST(Lr, TraceFree)
{
    const LrConstruction<2> c(params(8));
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    double worst = 0.0;
    int moving = 0;
    for (int j = 0; j < 20000; ++j) {
        const int i = 1 + j % 3;
        const auto sl = c.slice(i, ut(gen));
        const auto supp = sl.velocity_support();
        Vec<2> x = random_point(gen);
        if (!supp.empty() && j % 2 == 0) {
            const auto& q = supp[j % supp.size()];
            std::uniform_real_distribution<double> u(-0.5, 0.5);
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

TEST(Lr, DensityValueLattice)
{
    const int depth = 5;
    const LrConstruction<2> c(params(depth));
    std::set<double> allowed{0.0, 1.0};
    for (int i = 1; i <= depth + 4; ++i)
        allowed.insert(Pow2{0, 2 * i}.value(c.params().nu));
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int j = 0; j < 30; ++j) {
        const auto sl = c.slice(1 + j % 3, ut(gen));
        for (int a = 0; a < 256; ++a)
            for (int b = 0; b < 256; ++b) {
                const Vec<2> x{-0.5 + (a + 0.5) / 256, -0.5 + (b + 0.5) / 256};
                ASSERT_TRUE(allowed.count(sl.density(x))) << sl.density(x);
            }
    }
}

TEST(Lr, MassAndCubesMatchPointwise)
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int depth : {0, 2, 6, 8}) {
        const LrConstruction<2> c(params(depth));
        for (int j = 0; j < 20; ++j) {
            const int i = 1 + j % 3;
            const auto sl = c.slice(i, ut(gen));
            const auto e = sl.cubes();
            EXPECT_EQ(mass<2>(e), 1.0);
            EXPECT_EQ(mass<2>(sl.profile()), 1.0);
            const EnsembleIndex<2> idx(e);
            for (int k = 0; k < 300; ++k) {
                const auto x = random_point(gen);
                ASSERT_EQ(idx.value_at(x), sl.density(x));
            }
        }
    }
}

TEST(Lr, DropDeficitShrinksWithDepth)
{
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int j = 0; j < 50; ++j) {
        const double t = ut(gen);
        double last = 2.0;
        for (int depth = 0; depth <= 8; ++depth) {
            const LrConstruction<2> c(params(depth, DensityBase::Drop));
            const double def = 1.0 - mass<2>(c.slice(1, t).profile());
            EXPECT_LE(def, last);
            last = def;
        }
    }
}

TEST(Lr, AsynchronousMotion)
{
    const LrConstruction<2> c(params(8));
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    int n = 0;
    while (n < 200) {
        const double t = ut(gen);
        const auto sp = c.partition().locate(t);
        if (sp.phase != Phase::T2)
            continue;
        const auto supp = c.slice(1, t).velocity_support();
        const Cube<2> cell(center_of_index<2>(2, static_cast<std::uint64_t>(sp.index)), 0.25);
        for (const auto& q : supp) {
            for (int l = 0; l < 2; ++l) {
                ASSERT_GE(q.center[l] - q.side / 2, cell.center[l] - 0.125 - 1e-15);
                ASSERT_LE(q.center[l] + q.side / 2, cell.center[l] + 0.125 + 1e-15);
            }
        }
        ++n;
    }
}

TEST(Lr, RejectsBadInput)
{
    LrParams p;
    p.eta = 13;
    EXPECT_THROW(LrConstruction<2>{p}, DomainError);
    p = LrParams{};
    p.t1_sign = 0.5;
    EXPECT_THROW(LrConstruction<2>{p}, DomainError);
    const LrConstruction<2> c(LrParams{});
    EXPECT_THROW(c.velocity(0, 0.5, Vec<2>{}), DomainError);
    EXPECT_THROW(c.density(1, -0.5, Vec<2>{}), DomainError);
}

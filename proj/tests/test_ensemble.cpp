#include <nutrans/ensemble.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace nutrans;

TEST(Pow2, ExponentArithmetic)
{
    const Pow2 a{3, 1}, b{-1, 2};
    EXPECT_EQ(a * b, (Pow2{2, 3}));
    EXPECT_EQ(a.pow(3), (Pow2{9, 3}));
    EXPECT_DOUBLE_EQ(a.value(0.5), std::exp2(3.5));
}

TEST(Mass, ExactDyadicSums)
{
    // 3 * 2^-60 + 1 - 3 * 2^-60 cannot be written with the doubles, but counts can
    VolumeProfile<2> prof;
    prof.nu = 2.3;
    prof.add(Pow2{0, 2}, Pow2{-1, -1}, 4.0);  // 4 cubes of side 2^{-1-nu}, value 2^{2 nu}: mass 1
    EXPECT_EQ(mass<2>(prof), 1.0);
    VolumeProfile<3> many;
    many.nu = 1.7;
    many.add(Pow2{}, Pow2{-20, 0}, std::ldexp(1.0, 60));
    EXPECT_EQ(mass<3>(many), 1.0);
    EXPECT_EQ(mass<2>(CubeEnsemble<2>{}), 0.0);
}

TEST(Ensemble, AppendScaledAndProfile)
{
    CubeEnsemble<2> inner;
    inner.nu = 2.3;
    inner.add(Vec<2>{0.25, 0.25}, Pow2{-1, 0}, Pow2{0, 1});
    CubeEnsemble<2> outer;
    outer.nu = 2.3;
    outer.append_scaled(inner, Vec<2>{-0.25, 0.25}, Pow2{1, 1}, Pow2{0, 2});
    ASSERT_EQ(outer.size(), 1u);
    const auto& c = outer.cubes[0];
    const double z = std::exp2(1 + 2.3);
    EXPECT_NEAR(c.center[0], -0.25 + 0.25 / z, 1e-16);
    EXPECT_EQ(c.side_exp, (Pow2{-2, -1}));
    EXPECT_EQ(c.value_exp, (Pow2{0, 3}));
    const auto prof = profile_of(outer);
    EXPECT_NEAR(lr_norm_exact<2>(prof, 1.5), lr_norm_exact<2>(outer, 1.5), 0.0);
    EXPECT_NEAR(lr_norm_exact<2>(outer, 2.0), std::sqrt(std::exp2(6 * 2.3) * std::exp2(-4 - 2 * 2.3)), 1e-12);
    EXPECT_DOUBLE_EQ(max_value<2>(prof), std::exp2(3 * 2.3));
}

TEST(Ensemble, NormErrors) { EXPECT_THROW(lr_norm_exact<2>(CubeEnsemble<2>{}, 0.5), DomainError); }

TEST(Ensemble, IndexMatchesLinearScan)
{
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    CubeEnsemble<2> e;
    e.nu = 1.0;
    // disjoint cubes on a jittered lattice
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b)
            e.add(Vec<2>{-0.5 + (a + 0.5) / 16 + 0.01 * u(gen), -0.5 + (b + 0.5) / 16 + 0.01 * u(gen)},
                  Pow2{-6, 0}, Pow2{a % 3, 0});
    const EnsembleIndex<2> idx(e);
    for (int j = 0; j < 20000; ++j) {
        const Vec<2> x{u(gen), u(gen)};
        ASSERT_EQ(idx.value_at(x), e.value_at(x));
    }
}

// Prints t, exact L^{3/2} norm and mass of both constructions at a few times.
#include <nutrans/nutrans.hpp>

#include <cstdio>

int main()
{
    using namespace nutrans;

    LrParams lp; // d=2, beta=0.8, nu=2.3, eta=2
    lp.depth = 8;
    const LrConstruction<2> lr(lp);

    L1Params l1p;
    l1p.depth = 8;

    std::printf("t,lr_norm,lr_mass,l1_norm,l1_mass\n");
    for (int j = 0; j < 20; ++j) {
        const double t = (j + 0.5) / 20.0;
        const auto a = lr.slice(1, t).profile();
        const auto b = L1Slice<2>(l1p, t).profile();
        std::printf("%.4f,%.6g,%.17g,%.6g,%.17g\n", t, lr_norm_exact<2>(a, 1.5), mass<2>(a), lr_norm_exact<2>(b, 1.5),
                    mass<2>(b));
    }
}

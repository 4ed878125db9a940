// Benchmark comparing the serial reference kernels against the OpenMP lanes:
// bi-series products, prime sweeps, and family monodromy fan-out.  Results
// are checked for exact agreement before timings are reported.

#include <cstdio>
#include <random>
#include <string>

#include <omp.h>

#include "pcurv/monodromy.hpp"
#include "pcurv/pcurvature.hpp"

using namespace pcurv;

namespace {

BiQ random_biseries(std::mt19937& rng, int t_terms, long trunc) {
    std::uniform_int_distribution<long> texp(-t_terms, t_terms);
    std::uniform_int_distribution<long> qexp(0, trunc - 1);
    std::uniform_int_distribution<long> coef(-9, 9);
    BiQ f = bs_zero<Rat>(trunc);
    for (int i = 0; i < t_terms; ++i) {
        long cval = coef(rng);
        if (cval == 0) cval = 1;
        f = f + bs_monomial(Rat(cval), texp(rng), qexp(rng), trunc);
    }
    return f;
}

struct Timing {
    double serial = 0.0, parallel = 0.0;
};

void report(const std::string& name, const Timing& t) {
    std::printf("%-28s serial %8.3fs   omp %8.3fs   speedup %.2fx (%d threads)\n", name.c_str(),
                t.serial, t.parallel, t.serial / t.parallel, omp_get_max_threads());
}

}  // namespace

int main(int argc, char** argv) {
    int scale = argc > 1 ? std::atoi(argv[1]) : 1;
    std::mt19937 rng(20240615);

    // --- bi-series product ---------------------------------------------------
    {
        const int terms = 160 * scale;
        const long trunc = 32;
        BiQ a = random_biseries(rng, terms, trunc);
        BiQ b = random_biseries(rng, terms, trunc);
        Timing t;
        double t0 = omp_get_wtime();
        BiQ ref = mul_serial(a, b);
        t.serial = omp_get_wtime() - t0;
        t0 = omp_get_wtime();
        BiQ par = mul(a, b);
        t.parallel = omp_get_wtime() - t0;
        if (!(ref == par)) {
            std::fprintf(stderr, "bi-series product mismatch between lanes\n");
            return 1;
        }
        report("biseries product", t);
    }

    // --- prime sweep -----------------------------------------------------------
    {
        auto f0 = lp_monomial(rat(2), 1) + lp_const(rat(1));
        auto f1 = lp_monomial(rat(1), -1) + lp_monomial(rat(3), 1);
        auto conn = companion_from_operator<LaurentQ>({f0, f1}, Derivation::t_ddt);
        long long pmax = 260 * scale;
        Timing t;
        double t0 = omp_get_wtime();
        auto ref = sweep_primes_serial(conn, pmax);
        t.serial = omp_get_wtime() - t0;
        t0 = omp_get_wtime();
        auto par = sweep_primes(conn, pmax);
        t.parallel = omp_get_wtime() - t0;
        bool same = ref.reports.size() == par.reports.size();
        for (size_t i = 0; same && i < ref.reports.size(); ++i)
            same = ref.reports[i].p == par.reports[i].p &&
                   ref.reports[i].status == par.reports[i].status;
        if (!same) {
            std::fprintf(stderr, "prime sweep mismatch between lanes\n");
            return 1;
        }
        report("p-curvature sweep", t);
    }

    // --- family monodromy fan-out ----------------------------------------------
    {
        Connection<BiQ> fam;
        fam.n = 1;
        fam.der = Derivation::t_ddt;
        fam.trunc = 8;
        fam.a = Matrix<BiQ>(1, 1, bs_const(rat(1, 2), 8) + bs_monomial(rat(1), 1, 2, 8) +
                                      bs_monomial(rat(1), -1, 3, 8));
        std::vector<double> samples;
        for (int i = 0; i < 8 * scale; ++i) samples.push_back(0.02 + 0.01 * i / scale);
        LoopSpec loop;
        loop.samples = 48;
        Timing t;
        double t0 = omp_get_wtime();
        auto ref = family_monodromies_serial(fam, samples, loop, 24, 1e-6);
        t.serial = omp_get_wtime() - t0;
        t0 = omp_get_wtime();
        auto par = family_monodromies(fam, samples, loop, 24, 1e-6);
        t.parallel = omp_get_wtime() - t0;
        double worst = 0.0;
        for (size_t i = 0; i < ref.size(); ++i)
            worst = std::max(worst, max_abs_diff(ref[i].m, par[i].m));
        if (worst != 0.0) {
            std::fprintf(stderr, "family monodromy mismatch between lanes: %g\n", worst);
            return 1;
        }
        report("family monodromy", t);
    }
    return 0;
}

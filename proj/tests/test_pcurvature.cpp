#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcurv/pcurvature.hpp"
#include "test_support.hpp"

using namespace pcurv;
using namespace pcurv::testsupport;

namespace {

Connection<LaurentQ> rank1(const LaurentQ& f, Derivation der = Derivation::t_ddt) {
    return companion_from_operator<LaurentQ>({f}, der);
}

Connection<LaurentQ> random_connection(std::mt19937& rng, int max_rank = 3) {
    std::uniform_int_distribution<int> rank(1, max_rank);
    int n = rank(rng);
    Connection<LaurentQ> c;
    c.n = n;
    c.der = Derivation::t_ddt;
    c.a = Matrix<LaurentQ>(n, n, lp_zero<Rat>());
    for (auto& e : c.a.d) e = random_laurent(rng);
    return c;
}

bool psi_zero(const Matrix<LaurentP>& m) {
    for (const auto& e : m.d)
        if (!e.is_zero()) return false;
    return true;
}

}  // namespace

TEST_CASE("powers of the derivation in characteristic p") {
    // t d/dt: applying D p times equals applying D once, on every monomial
    for (long long p : {3, 5}) {
        for (long n = -4; n <= 4; ++n) {
            auto tn = lp_monomial(ModP(1, p), n);
            auto once = derivation_D(tn);
            auto many = tn;
            for (long long i = 0; i < p; ++i) many = derivation_D(many);
            CHECK(many == once);
            // d/dt: the p-th power annihilates everything
            auto ddt_many = tn;
            for (long long i = 0; i < p; ++i) ddt_many = derivation_ddt(ddt_many);
            CHECK(ddt_many.is_zero());
        }
    }
}

TEST_CASE("multiplication side of the recursion is fixed by the oracle") {
    // noncommuting rank-2 input: only the A * A_k order matches the literal
    // operator evaluation
    auto conn = companion_from_operator<LaurentQ>(
        {lp_monomial(rat(2), 1) + lp_const(rat(1)), lp_monomial(rat(1), -1)}, Derivation::t_ddt);
    for (long long p : {3, 5, 7}) {
        auto cp = reduce_connection_mod_p(conn, p);
        auto oracle = p_curvature_bruteforce_oracle(cp, p);
        CHECK(p_curvature_matrix(cp, p) == oracle);
        Matrix<LaurentP> ak = cp.a;
        for (long long k = 1; k < p; ++k) {
            auto dk = mat_map(ak, [&](const LaurentP& x) { return derive(x, cp.der); });
            ak = dk + ak * cp.a;  // opposite order
        }
        CHECK(!(ak - cp.a == oracle));
    }
}

TEST_CASE("trivial and constant connections") {
    Connection<LaurentQ> zero;
    zero.n = 2;
    zero.der = Derivation::t_ddt;
    zero.a = Matrix<LaurentQ>(2, 2, lp_zero<Rat>());
    for (long long p : {3, 7}) {
        auto cp = reduce_connection_mod_p(zero, p);
        CHECK(psi_zero(p_curvature_matrix(cp, p)));
    }
    // Fermat: c^p = c in F_p
    for (long long p : {3, 5, 7, 11}) {
        auto cp = reduce_connection_mod_p(rank1(lp_const(rat(3))), p);
        CHECK(psi_zero(p_curvature_matrix(cp, p)));
        CHECK(psi_zero(p_curvature_bruteforce_oracle(cp, p)));
    }
}

TEST_CASE("rank 1 with matrix [t]") {
    auto c5 = reduce_connection_mod_p(rank1(lp_monomial(rat(1), 1)), 5);
    auto psi = p_curvature_matrix(c5, 5);
    CHECK(psi.at(0, 0).terms.size() == 1);
    CHECK(psi.at(0, 0).coef(5).r == 1);
    CHECK(psi == p_curvature_bruteforce_oracle(c5, 5));
}

TEST_CASE("rank-1 closed form a^p + D^(p-1)(a) - a") {
    std::mt19937 rng(5150);
    std::uniform_int_distribution<long> exp(-3, 3);
    for (int trial = 0; trial < 12; ++trial) {
        LaurentQ a = lp_monomial(random_rat(rng), exp(rng));
        if (trial % 2) a = a + lp_monomial(random_rat(rng), exp(rng));
        for (long long p : {3, 5, 7}) {
            Connection<LaurentQ> c = rank1(a);
            Connection<LaurentP> cp;
            try {
                cp = reduce_connection_mod_p(c, p);
            } catch (const bad_prime&) {
                continue;
            }
            auto ap = cp.a.at(0, 0);
            // a^p
            LaurentP apow = ap;
            for (long long k = 1; k < p; ++k) apow = apow * ap;
            // D^(p-1)(a)
            LaurentP dpa = ap;
            for (long long k = 1; k < p; ++k) dpa = derivation_D(dpa);
            auto closed = apow + dpa - ap;
            auto psi = p_curvature_matrix(cp, p);
            CHECK(psi.at(0, 0) == closed);
            CHECK(psi == p_curvature_bruteforce_oracle(cp, p));
        }
    }
}

TEST_CASE("oracle equivalence on random connections") {
    std::mt19937 rng(8086);
    for (int trial = 0; trial < 10; ++trial) {
        auto c = random_connection(rng);
        for (long long p : {3, 5, 7, 11}) {
            Connection<LaurentP> cp;
            try {
                cp = reduce_connection_mod_p(c, p);
            } catch (const bad_prime&) {
                continue;
            }
            CHECK(p_curvature_matrix(cp, p) == p_curvature_bruteforce_oracle(cp, p));
        }
    }
}

TEST_CASE("gauge covariance of the p-curvature") {
    std::mt19937 rng(4004);
    std::uniform_int_distribution<long> mono(-2, 2);
    for (int trial = 0; trial < 8; ++trial) {
        auto c = random_connection(rng, 2);
        for (long long p : {5, 7}) {
            Connection<LaurentP> cp;
            try {
                cp = reduce_connection_mod_p(c, p);
            } catch (const bad_prime&) {
                continue;
            }
            // unit gauge over F_p[t, t^-1]: diag monomials times a unipotent
            int n = cp.n;
            Matrix<LaurentP> t(n, n, lp_zero<ModP>());
            for (int i = 0; i < n; ++i) t.at(i, i) = lp_monomial(ModP(1, p), mono(rng));
            if (n == 2) t.at(0, 1) = lp_monomial(ModP(2, p), mono(rng));
            auto g = make_gauge(t, GaugeTag::generic);
            auto moved = gauge_transform(cp, g);
            auto psi_moved = p_curvature_matrix(moved, p);
            auto psi = p_curvature_matrix(cp, p);
            auto conj = g.inv * psi * g.mat;
            CHECK(psi_moved == conj);
        }
    }
}

TEST_CASE("trivializable connections have vanishing p-curvature") {
    // A = -D(g) g^{-1} over F_p[t, t^-1]
    std::mt19937 rng(606);
    std::uniform_int_distribution<long> mono(-2, 2);
    std::uniform_int_distribution<long> coef(1, 4);
    for (int trial = 0; trial < 10; ++trial) {
        for (long long p : {5, 7, 11}) {
            int n = 2;
            // invertible g: unipotent * diagonal of monomials * opposite unipotent
            Matrix<LaurentP> uni(n, n, lp_zero<ModP>());
            for (int i = 0; i < n; ++i) uni.at(i, i) = lp_const(ModP(1, p));
            uni.at(0, 1) = lp_monomial(ModP(coef(rng), p), mono(rng));
            Matrix<LaurentP> diag(n, n, lp_zero<ModP>());
            for (int i = 0; i < n; ++i) diag.at(i, i) = lp_monomial(ModP(coef(rng), p), mono(rng));
            Matrix<LaurentP> lower(n, n, lp_zero<ModP>());
            for (int i = 0; i < n; ++i) lower.at(i, i) = lp_const(ModP(1, p));
            lower.at(1, 0) = lp_monomial(ModP(coef(rng), p), mono(rng));
            Matrix<LaurentP> g = uni * diag * lower;
            auto gg = make_gauge(g, GaugeTag::generic);
            Matrix<LaurentP> dg = mat_map(g, [](const LaurentP& x) { return derivation_D(x); });
            Connection<LaurentP> c;
            c.n = n;
            c.der = Derivation::t_ddt;
            c.char_p = p;
            c.a = -(dg * gg.inv);
            CHECK(psi_zero(p_curvature_matrix(c, p)));
        }
    }
}

TEST_CASE("prime sweeps") {
    // constant 1/2: vanishes at every odd prime, 2 is flagged
    auto half = rank1(lp_const(rat(1, 2)));
    auto s = sweep_primes(half, 50);
    CHECK(s.nonzero == 0);
    CHECK(s.bad == 1);
    CHECK(s.exceptional_primes == std::vector<long long>{2});
    for (const auto& r : s.reports)
        if (r.p != 2) CHECK(r.status == PCurvatureStatus::vanishes);

    // [t]: nonzero for every good prime
    auto st = sweep_primes(rank1(lp_monomial(rat(1), 1)), 20);
    CHECK(st.bad == 0);
    CHECK(st.vanishing == 0);
    CHECK(st.nonzero == static_cast<long>(st.reports.size()));

    // zero connection: vanishes everywhere
    Connection<LaurentQ> zero;
    zero.n = 1;
    zero.der = Derivation::t_ddt;
    zero.a = Matrix<LaurentQ>(1, 1, lp_zero<Rat>());
    auto sz = sweep_primes(zero, 30);
    CHECK(sz.nonzero == 0);
    CHECK(sz.bad == 0);
}

TEST_CASE("characteristic must match the reduction") {
    auto c5 = reduce_connection_mod_p(rank1(lp_const(rat(1))), 5);
    CHECK_THROWS_AS(p_curvature_matrix(c5, 7), char_mismatch);
}

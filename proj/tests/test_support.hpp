#ifndef PCURV_TEST_SUPPORT_HPP
#define PCURV_TEST_SUPPORT_HPP

#include <random>

#include "pcurv/connection.hpp"
#include "pcurv/qlinalg.hpp"

namespace pcurv::testsupport {

inline Rat random_rat(std::mt19937& rng, long num_bound = 4, long den_bound = 3) {
    std::uniform_int_distribution<long> num(-num_bound, num_bound);
    std::uniform_int_distribution<long> den(1, den_bound);
    return rat(num(rng), den(rng));
}

inline BiQ random_biseries(std::mt19937& rng, long trunc, int max_terms = 4, long t_span = 3,
                           long q_min = 0) {
    std::uniform_int_distribution<long> texp(-t_span, t_span);
    std::uniform_int_distribution<long> qexp(q_min, trunc - 1);
    std::uniform_int_distribution<int> count(1, max_terms);
    BiQ f = bs_zero<Rat>(trunc);
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        Rat c = random_rat(rng);
        if (is_zero(c)) c = Rat(1);
        f = f + bs_monomial(c, texp(rng), qexp(rng), trunc);
    }
    return f;
}

inline LaurentQ random_laurent(std::mt19937& rng, int max_terms = 3, long t_span = 3) {
    std::uniform_int_distribution<long> texp(-t_span, t_span);
    std::uniform_int_distribution<int> count(1, max_terms);
    LaurentQ f = lp_zero<Rat>();
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        Rat c = random_rat(rng);
        if (is_zero(c)) c = Rat(1);
        f = f + lp_monomial(c, texp(rng));
    }
    return f;
}

inline Matrix<BiQ> biseries_identity(int n, long trunc, long ram_q = 1, long ram_t = 1) {
    Matrix<BiQ> m(n, n, bs_zero<Rat>(trunc, ram_q, ram_t));
    for (int i = 0; i < n; ++i) m.at(i, i) = bs_const(Rat(1), trunc, ram_q, ram_t);
    return m;
}

// random invertible constant integer matrix (determinant checked over Q)
inline MatQ random_invertible_constant(std::mt19937& rng, int n) {
    std::uniform_int_distribution<long> entry(-3, 3);
    for (;;) {
        MatQ m(n, n, Rat(0));
        for (auto& x : m.d) x = Rat(entry(rng));
        if (matq_inverse(m)) return m;
    }
}

// random gauge: constant invertible * diag monomial twist * unipotent step
inline GaugeMatrix<BiQ> random_gauge(std::mt19937& rng, int n, long trunc) {
    MatQ c = random_invertible_constant(rng, n);
    Matrix<BiQ> g(n, n, bs_zero<Rat>(trunc));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!is_zero(c.at(i, j))) g.at(i, j) = bs_const(c.at(i, j), trunc);
    std::uniform_int_distribution<long> mono(-2, 2);
    Matrix<BiQ> tw(n, n, bs_zero<Rat>(trunc));
    for (int i = 0; i < n; ++i) tw.at(i, i) = bs_monomial(Rat(1), mono(rng), 0, trunc);
    Matrix<BiQ> uni = biseries_identity(n, trunc);
    std::uniform_int_distribution<long> texp(-2, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            long e = texp(rng);
            uni.at(i, j) = uni.at(i, j) + bs_monomial(random_rat(rng), e, 1, trunc);
        }
    return make_gauge(g * tw * uni, GaugeTag::generic, trunc);
}

inline bool matrix_zero(const Matrix<BiQ>& m) {
    for (const auto& x : m.d)
        if (!x.is_zero()) return false;
    return true;
}

}  // namespace pcurv::testsupport

#endif

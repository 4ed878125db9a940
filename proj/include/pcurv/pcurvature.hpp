#ifndef PCURV_PCURVATURE_HPP
#define PCURV_PCURVATURE_HPP

#include <string>
#include <vector>

#include "pcurv/connection.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pcurv {

struct not_multiplication_operator : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// psi_p = nabla(D)^p - nabla(D^p) as a multiplication operator.  The
// operator part of nabla(D)^p on columns satisfies A_1 = A,
// A_{k+1} = D(A_k) + A * A_k; the left-multiplication order is pinned by the
// brute-force oracle below (tests derive it on noncommuting rank-2 input).
// D^p = D for t d/dt and D^p = 0 for d/dt, per the action on powers of t.
template <class R>
Matrix<R> p_curvature_matrix(const Connection<R>& c, long long p) {
    static_assert(is_modp_ring<R>);
    if (c.char_p != p) throw char_mismatch("connection not reduced at this prime");
    Matrix<R> ak = c.a;
    for (long long k = 1; k < p; ++k) {
        Matrix<R> dk = mat_map(ak, [&](const R& x) { return derive(x, c.der); });
        ak = dk + c.a * ak;
    }
    if (c.der == Derivation::t_ddt) return ak - c.a;
    return ak;
}

namespace detail {

template <class R>
std::vector<R> basis_vector(const Connection<R>& c, int i) {
    std::vector<R> v(static_cast<size_t>(c.n), connection_zero(c));
    v[i] = connection_scalar(c, 1);
    return v;
}

template <class R>
R t_power(const Connection<R>& c, long j) {
    if constexpr (is_biseries_ring<R>)
        return bs_monomial(connection_scalar_one(c), j * c.ram_t, 0, c.trunc, c.ram_q, c.ram_t);
    else
        return lp_monomial(connection_scalar_one(c), j * c.ram_t, c.ram_t);
}

}  // namespace detail

// Literal evaluation of nabla(D)^p - nabla(D^p) on coordinate vectors.  The
// residual must act as multiplication by a single matrix; this is probed on
// t^j e_i for j in {0,1,2} and certifies the closed-form recursion above.
template <class R>
Matrix<R> p_curvature_bruteforce_oracle(const Connection<R>& c, long long p) {
    static_assert(is_modp_ring<R>);
    if (c.char_p != p) throw char_mismatch("connection not reduced at this prime");
    auto psi_on = [&](const std::vector<R>& v) {
        std::vector<R> w = v;
        for (long long k = 0; k < p; ++k) w = apply_nabla(c, w);
        std::vector<R> dp = apply_nabla_dp(c, v);
        for (int i = 0; i < c.n; ++i) w[i] = w[i] - dp[i];
        return w;
    };
    Matrix<R> m(c.n, c.n, connection_zero(c));
    for (int i = 0; i < c.n; ++i) {
        auto col = psi_on(detail::basis_vector(c, i));
        for (int r = 0; r < c.n; ++r) m.at(r, i) = col[r];
    }
    // consistency probe: psi(t^j e_i) must equal t^j * psi(e_i)
    for (long j = 1; j <= 2; ++j) {
        R tj = detail::t_power(c, j);
        for (int i = 0; i < c.n; ++i) {
            auto v = detail::basis_vector(c, i);
            for (auto& x : v) x = x * tj;
            auto w = psi_on(v);
            for (int r = 0; r < c.n; ++r) {
                if (!((m.at(r, i) * tj) == w[r]))
                    throw not_multiplication_operator(
                        "residual operator is not multiplication by a matrix (probe t^" +
                        std::to_string(j) + " e_" + std::to_string(i) + ")");
            }
        }
    }
    return m;
}

// ---- sweeps over primes ----------------------------------------------------

enum class PCurvatureStatus { vanishes, nonzero, bad };

struct PCurvatureReport {
    long long p = 0;
    PCurvatureStatus status = PCurvatureStatus::vanishes;
    std::string witness;     // nonzero entry, when status == nonzero
    std::string bad_reason;  // when status == bad
    long trunc = kExactOrder;  // q-order the verdict holds at (bi-series input)
};

struct SweepSummary {
    long long p_max = 0;
    long vanishing = 0, nonzero = 0, bad = 0;
    std::vector<PCurvatureReport> reports;           // sorted by p
    std::vector<long long> exceptional_primes;       // the bad ones
};

inline std::vector<long long> primes_up_to(long long n) {
    std::vector<long long> out;
    if (n < 2) return out;
    std::vector<bool> sieve(static_cast<size_t>(n) + 1, true);
    for (long long i = 2; i <= n; ++i) {
        if (!sieve[i]) continue;
        out.push_back(i);
        for (long long j = i * i; j <= n; j += i) sieve[j] = false;
    }
    return out;
}

namespace detail {

template <class M>
bool matrix_is_zero(const M& m) {
    for (const auto& x : m.d)
        if (!x.is_zero()) return false;
    return true;
}

template <class R>
std::string first_nonzero_entry(const Matrix<R>& m) {
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j)
            if (!m.at(i, j).is_zero()) {
                std::string body;
                if constexpr (is_biseries_ring<R>)
                    body = "bi-series";
                else
                    body = laurent_str(m.at(i, j));
                return "entry(" + std::to_string(i) + "," + std::to_string(j) + ") = " + body;
            }
    return "";
}

template <class RQ>
PCurvatureReport report_for_prime(const Connection<RQ>& c, long long p) {
    PCurvatureReport rep;
    rep.p = p;
    try {
        auto cp = reduce_connection_mod_p(c, p);
        auto psi = p_curvature_matrix(cp, p);
        rep.trunc = cp.trunc;
        if (matrix_is_zero(psi)) {
            rep.status = PCurvatureStatus::vanishes;
        } else {
            rep.status = PCurvatureStatus::nonzero;
            rep.witness = first_nonzero_entry(psi);
        }
    } catch (const bad_prime& e) {
        rep.status = PCurvatureStatus::bad;
        rep.bad_reason = e.what();
    }
    return rep;
}

inline SweepSummary summarize(long long p_max, std::vector<PCurvatureReport> reports) {
    SweepSummary s;
    s.p_max = p_max;
    s.reports = std::move(reports);
    for (const auto& r : s.reports) {
        switch (r.status) {
            case PCurvatureStatus::vanishes: ++s.vanishing; break;
            case PCurvatureStatus::nonzero: ++s.nonzero; break;
            case PCurvatureStatus::bad:
                ++s.bad;
                s.exceptional_primes.push_back(r.p);
                break;
        }
    }
    return s;
}

}  // namespace detail

// Serial reference sweep.
template <class RQ>
SweepSummary sweep_primes_serial(const Connection<RQ>& c, long long p_max) {
    auto ps = primes_up_to(p_max);
    std::vector<PCurvatureReport> reports(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) reports[i] = detail::report_for_prime(c, ps[i]);
    return detail::summarize(p_max, std::move(reports));
}

// Per-prime computations are independent; reports land in their slot, so the
// result is deterministic and identical to the serial reference.
template <class RQ>
SweepSummary sweep_primes(const Connection<RQ>& c, long long p_max) {
    auto ps = primes_up_to(p_max);
    std::vector<PCurvatureReport> reports(ps.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t i = 0; i < ps.size(); ++i) reports[i] = detail::report_for_prime(c, ps[i]);
    return detail::summarize(p_max, std::move(reports));
}

}  // namespace pcurv

#endif

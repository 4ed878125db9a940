#ifndef PCURV_CONNECTION_HPP
#define PCURV_CONNECTION_HPP

#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "pcurv/biseries.hpp"
#include "pcurv/laurent.hpp"
#include "pcurv/matrix.hpp"

namespace pcurv {

enum class Derivation { t_ddt, ddt };
enum class BasisTag { cyclic, general };

struct singular_gauge : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct char_mismatch : std::logic_error {
    using std::logic_error::logic_error;
};

using LaurentQ = LaurentPoly<Rat>;
using LaurentP = LaurentPoly<ModP>;
using BiQ = BiSeries<Rat>;
using BiP = BiSeries<ModP>;

template <class R>
inline constexpr bool is_biseries_ring =
    std::is_same_v<R, BiQ> || std::is_same_v<R, BiP>;

template <class R>
inline constexpr bool is_modp_ring =
    std::is_same_v<R, LaurentP> || std::is_same_v<R, BiP>;

template <class R>
R derive(const R& f, Derivation d) {
    return d == Derivation::t_ddt ? derivation_D(f) : derivation_ddt(f);
}

// Connection relative to the base, written in a chosen basis: the action of
// the tagged derivation on coordinate columns is v -> D(v) + A v.
template <class R>
struct Connection {
    int n = 0;
    Matrix<R> a;
    Derivation der = Derivation::t_ddt;
    BasisTag basis = BasisTag::general;
    long long char_p = 0;   // 0 in characteristic zero
    long ram_t = 1;
    long ram_q = 1;         // 1 for plain Laurent rings
    long trunc = kExactOrder;
};

namespace detail {
template <class R>
struct ring_scalar;
template <>
struct ring_scalar<LaurentQ> {
    using type = Rat;
};
template <>
struct ring_scalar<LaurentP> {
    using type = ModP;
};
template <>
struct ring_scalar<BiQ> {
    using type = Rat;
};
template <>
struct ring_scalar<BiP> {
    using type = ModP;
};
}  // namespace detail

template <class R>
using ring_scalar_t = typename detail::ring_scalar<R>::type;

template <class R>
ring_scalar_t<R> connection_scalar_one(const Connection<R>& c) {
    if constexpr (is_modp_ring<R>) {
        if (c.char_p == 0) throw char_mismatch("connection has no modulus");
        return ModP(1, c.char_p);
    } else {
        return Rat(1);
    }
}

template <class R>
R connection_zero(const Connection<R>& c) {
    if constexpr (is_biseries_ring<R>)
        return bs_zero<ring_scalar_t<R>>(c.trunc, c.ram_q, c.ram_t);
    else
        return lp_zero<ring_scalar_t<R>>(c.ram_t);
}

template <class R>
R connection_scalar(const Connection<R>& c, long num, long den = 1) {
    auto one = connection_scalar_one(c);
    auto v = scalar_frac(one, num, den);
    if constexpr (is_biseries_ring<R>)
        return bs_const(v, c.trunc, c.ram_q, c.ram_t);
    else
        return lp_const(v, c.ram_t);
}

template <class R>
Matrix<R> connection_identity(const Connection<R>& c) {
    Matrix<R> m(c.n, c.n, connection_zero(c));
    for (int i = 0; i < c.n; ++i) m.at(i, i) = connection_scalar(c, 1);
    return m;
}

// Companion matrix of a scalar operator: ones on the subdiagonal, the given
// series down the last column.
template <class R>
Connection<R> companion_from_operator(const std::vector<R>& coeffs, Derivation der,
                                      long long char_p = 0) {
    if (coeffs.empty()) throw std::invalid_argument("companion of empty coefficient list");
    Connection<R> c;
    c.n = static_cast<int>(coeffs.size());
    c.der = der;
    c.basis = BasisTag::cyclic;
    c.char_p = char_p;
    if constexpr (is_biseries_ring<R>) {
        c.trunc = kExactOrder;
        for (const auto& f : coeffs) {
            c.trunc = trunc_min(c.trunc, f.trunc);
            c.ram_q = std::lcm(c.ram_q, f.ram_q);
            c.ram_t = std::lcm(c.ram_t, f.ram_t);
        }
    } else {
        for (const auto& f : coeffs) c.ram_t = std::lcm(c.ram_t, f.ram_t);
    }
    c.a = Matrix<R>(c.n, c.n, connection_zero(c));
    for (int i = 0; i + 1 < c.n; ++i) c.a.at(i + 1, i) = connection_scalar(c, 1);
    for (int i = 0; i < c.n; ++i) c.a.at(i, c.n - 1) = c.a.at(i, c.n - 1) + coeffs[i];
    return c;
}

// nabla(D) on a coordinate column: D(v) + A v
template <class R>
std::vector<R> apply_nabla(const Connection<R>& c, const std::vector<R>& v) {
    if (static_cast<int>(v.size()) != c.n) throw std::invalid_argument("vector length != rank");
    std::vector<R> r = c.a * v;
    for (int i = 0; i < c.n; ++i) r[i] = r[i] + derive(v[i], c.der);
    return r;
}

// nabla(D^p): D^p = D for t d/dt, and D^p = 0 (so nabla(D^p) = 0) for d/dt,
// both read off the action on powers of t in characteristic p
template <class R>
std::vector<R> apply_nabla_dp(const Connection<R>& c, const std::vector<R>& v) {
    if (c.der == Derivation::t_ddt) return apply_nabla(c, v);
    return std::vector<R>(v.size(), connection_zero(c));
}

// ---- gauge machinery -------------------------------------------------------

enum class GaugeTag { constant, diagonal_twist, shear, unipotent_step, generic };

template <class R>
struct GaugeMatrix {
    Matrix<R> mat;
    Matrix<R> inv;
    GaugeTag tag = GaugeTag::generic;
};

namespace detail {

template <class S>
S scalar_inv(const S& c) {
    if constexpr (std::is_same_v<S, Rat>) {
        if (is_zero(c)) throw singular_gauge("scalar not invertible");
        return Rat(1) / c;
    } else {
        if (c.r == 0) throw singular_gauge("scalar not invertible");
        return inverse(c);
    }
}

// inverse of a unit c * t^e in the Laurent ring
template <class C>
LaurentPoly<C> invert_unit_laurent(const LaurentPoly<C>& u) {
    if (u.terms.size() != 1)
        throw singular_gauge("determinant is not a unit of the Laurent ring");
    auto [e, c] = *u.terms.begin();
    return lp_monomial(scalar_inv(c), -e, u.ram_t);
}

template <class C>
Matrix<LaurentPoly<C>> invert_matrix(const Matrix<LaurentPoly<C>>& m, long /*order*/) {
    if (m.rows == 1) {
        Matrix<LaurentPoly<C>> r(1, 1);
        r.at(0, 0) = invert_unit_laurent(m.at(0, 0));
        return r;
    }
    auto det = mat_det(m);
    auto det_inv = invert_unit_laurent(det);
    auto adj = mat_adjugate(m);
    return mat_map(adj, [&](const LaurentPoly<C>& x) { return x * det_inv; });
}

// q-adic lift: invert mod q, then expand the geometric series of the
// correction.  Needs a finite working order.
template <class S>
Matrix<BiSeries<S>> invert_matrix(const Matrix<BiSeries<S>>& m, long order) {
    long work = order;
    for (const auto& x : m.d) work = trunc_min(work, x.trunc);
    if (work >= kExactOrder)
        throw singular_gauge("inverting an exact bi-series matrix needs a working order");
    long ram_q = 1, ram_t = 1;
    for (const auto& x : m.d) {
        ram_q = std::lcm(ram_q, x.ram_q);
        ram_t = std::lcm(ram_t, x.ram_t);
    }
    Matrix<LaurentPoly<S>> m0(m.rows, m.cols);
    Matrix<BiSeries<S>> mm(m.rows, m.cols);
    for (size_t i = 0; i < m.d.size(); ++i) {
        auto x = rescale_ram_t(rescale_ram_q(m.d[i], ram_q / m.d[i].ram_q), ram_t / m.d[i].ram_t);
        if (min_q_valuation(x) < 0) throw singular_gauge("negative q-valuation in gauge matrix");
        mm.d[i] = clamp_trunc(x, work);
        m0.d[i] = mod_q(x);
    }
    auto m0_inv = invert_matrix(m0, work);
    Matrix<BiSeries<S>> x0(m.rows, m.cols);
    for (size_t i = 0; i < m.d.size(); ++i) x0.d[i] = from_laurent(m0_inv.d[i], work, ram_q);
    S one{};
    for (const auto& x : m0.d)
        if (!x.is_zero()) {
            one = scalar_one(x.terms.begin()->second);
            break;
        }
    // r = I - x0 * m  (vanishes mod q), inverse = (sum r^k) * x0
    Matrix<BiSeries<S>> prod = x0 * mm;
    Matrix<BiSeries<S>> ident(m.rows, m.cols, bs_zero<S>(work, ram_q, ram_t));
    for (int i = 0; i < m.rows; ++i) ident.at(i, i) = bs_const(one, work, ram_q, ram_t);
    Matrix<BiSeries<S>> rmat = ident - prod;
    Matrix<BiSeries<S>> acc = ident;
    Matrix<BiSeries<S>> pw = ident;
    for (long k = 1; k < work; ++k) {
        pw = pw * rmat;
        bool all_zero = true;
        for (const auto& x : pw.d)
            if (!x.is_zero()) all_zero = false;
        if (all_zero) break;
        acc = acc + pw;
    }
    return acc * x0;
}

}  // namespace detail

template <class R>
GaugeMatrix<R> make_gauge(Matrix<R> m, GaugeTag tag = GaugeTag::generic,
                          long order = kExactOrder) {
    GaugeMatrix<R> g;
    g.inv = detail::invert_matrix(m, order);
    g.mat = std::move(m);
    g.tag = tag;
    return g;
}

// Change of basis: new matrix A' = T^{-1} A T + T^{-1} D(T).  A coordinate
// solution x of D(x) + A x = 0 maps to x' = T^{-1} x of the new system.
template <class R>
Connection<R> gauge_transform(const Connection<R>& c, const GaugeMatrix<R>& g) {
    Connection<R> r = c;
    Matrix<R> dt = mat_map(g.mat, [&](const R& x) { return derive(x, c.der); });
    r.a = g.inv * c.a * g.mat + g.inv * dt;
    if constexpr (is_biseries_ring<R>) {
        long tr = c.trunc;
        long rq = c.ram_q, rt = c.ram_t;
        for (const auto& x : r.a.d) {
            tr = trunc_min(tr, x.trunc);
            rq = std::lcm(rq, x.ram_q);
            rt = std::lcm(rt, x.ram_t);
        }
        r.trunc = tr;
        r.ram_q = rq;
        r.ram_t = rt;
    } else {
        long rt = c.ram_t;
        for (const auto& x : r.a.d) rt = std::lcm(rt, x.ram_t);
        r.ram_t = rt;
    }
    r.basis = BasisTag::general;
    return r;
}

// g2 after g1 acts like the single gauge with matrix g1.mat * g2.mat
template <class R>
GaugeMatrix<R> compose_gauges(const GaugeMatrix<R>& first, const GaugeMatrix<R>& second) {
    GaugeMatrix<R> g;
    g.mat = first.mat * second.mat;
    g.inv = second.inv * first.inv;
    g.tag = GaugeTag::generic;
    return g;
}

template <class R>
struct GaugeLogEntry {
    GaugeMatrix<R> gauge;
    std::string label;
};

// Append-only record of applied gauges; replaying it on the original
// connection must reproduce the final matrix exactly.
template <class R>
struct GaugeLog {
    std::vector<GaugeLogEntry<R>> entries;
    std::pair<Rat, Rat> alpha_interval{Rat(0), Rat(0)};

    void push(GaugeMatrix<R> g, std::string label) {
        entries.push_back({std::move(g), std::move(label)});
    }

    // product of the gauge matrices in application order
    Matrix<R> composite(const Connection<R>& ctx) const {
        Matrix<R> acc = connection_identity(ctx);
        for (const auto& e : entries) acc = acc * e.gauge.mat;
        return acc;
    }

    Matrix<R> composite_inv(const Connection<R>& ctx) const {
        Matrix<R> acc = connection_identity(ctx);
        for (const auto& e : entries) acc = e.gauge.inv * acc;
        return acc;
    }

    Connection<R> replay(Connection<R> base) const {
        for (const auto& e : entries) base = gauge_transform(base, e.gauge);
        return base;
    }
};

// ---- reduction mod p -------------------------------------------------------

template <class RQ, class RP>
Connection<RP> reduce_connection_impl(const Connection<RQ>& c, long long p);

inline Connection<LaurentP> reduce_connection_mod_p(const Connection<LaurentQ>& c, long long p) {
    if (c.ram_t % p == 0)
        throw bad_prime(static_cast<long>(p), "t-ramification divisible by p");
    Connection<LaurentP> r;
    r.n = c.n;
    r.der = c.der;
    r.basis = c.basis;
    r.char_p = p;
    r.ram_t = c.ram_t;
    r.a = Matrix<LaurentP>(c.n, c.n);
    for (size_t i = 0; i < c.a.d.size(); ++i) r.a.d[i] = reduce_laurent_mod_p(c.a.d[i], p);
    return r;
}

inline Connection<BiP> reduce_connection_mod_p(const Connection<BiQ>& c, long long p) {
    if (c.ram_t % p == 0)
        throw bad_prime(static_cast<long>(p), "t-ramification divisible by p");
    Connection<BiP> r;
    r.n = c.n;
    r.der = c.der;
    r.basis = c.basis;
    r.char_p = p;
    r.ram_t = c.ram_t;
    r.ram_q = c.ram_q;
    r.trunc = c.trunc;
    r.a = Matrix<BiP>(c.n, c.n);
    for (size_t i = 0; i < c.a.d.size(); ++i) r.a.d[i] = reduce_biseries_mod_p(c.a.d[i], p);
    return r;
}

}  // namespace pcurv

#endif

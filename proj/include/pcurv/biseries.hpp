#ifndef PCURV_BISERIES_HPP
#define PCURV_BISERIES_HPP

#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pcurv/laurent.hpp"
#include "pcurv/qseries.hpp"

namespace pcurv {

struct not_a_unit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two-sided series in t with q-series coefficients: an element of
// K[|q|]<t^-1, t> (and its Laurent-in-q extensions) at finite precision.
// Stored t-exponent e means t^(e/ram_t); every coefficient shares trunc and
// ram_q.  t_band, when set, bounds the t-support of the modeled function.
template <class S>
struct BiSeries {
    std::map<long, QSeries<S>> terms;
    long trunc = kExactOrder;
    long ram_q = 1;
    long ram_t = 1;
    std::optional<std::pair<long, long>> t_band;

    bool is_zero() const { return terms.empty(); }

    QSeries<S> coef(long e) const {
        auto it = terms.find(e);
        if (it != terms.end()) return it->second;
        return qs_zero<S>(trunc, ram_q);
    }

    void set(long e, QSeries<S> v) {
        v.trunc = trunc_min(v.trunc, trunc);
        v.ram_q = ram_q;
        v.canonicalize();
        if (v.is_zero())
            terms.erase(e);
        else
            terms[e] = std::move(v);
    }

    // re-establish the shared-trunc invariant after arithmetic
    void normalize() {
        long t = trunc;
        for (const auto& [e, v] : terms) t = trunc_min(t, v.trunc);
        trunc = t;
        for (auto it = terms.begin(); it != terms.end();) {
            it->second = clamp_trunc(it->second, trunc);
            it->second.ram_q = ram_q;
            if (it->second.is_zero())
                it = terms.erase(it);
            else
                ++it;
        }
    }
};

template <class S>
BiSeries<S> bs_zero(long trunc = kExactOrder, long ram_q = 1, long ram_t = 1) {
    BiSeries<S> z;
    z.trunc = trunc;
    z.ram_q = ram_q;
    z.ram_t = ram_t;
    return z;
}

// coeff * t^(t_exp/ram_t) * q^(q_exp/ram_q)
template <class S>
BiSeries<S> bs_monomial(const S& coeff, long t_exp, long q_exp, long trunc = kExactOrder,
                        long ram_q = 1, long ram_t = 1) {
    BiSeries<S> r = bs_zero<S>(trunc, ram_q, ram_t);
    r.set(t_exp, qs_monomial(coeff, q_exp, trunc, ram_q));
    return r;
}

template <class S>
BiSeries<S> bs_const(const S& coeff, long trunc = kExactOrder, long ram_q = 1, long ram_t = 1) {
    return bs_monomial(coeff, 0, 0, trunc, ram_q, ram_t);
}

template <class S>
BiSeries<S> from_laurent(const LaurentPoly<S>& a, long trunc = kExactOrder, long ram_q = 1) {
    BiSeries<S> r = bs_zero<S>(trunc, ram_q, a.ram_t);
    for (const auto& [e, v] : a.terms) r.set(e, qs_const(v, trunc, ram_q));
    return r;
}

template <class S>
BiSeries<S> from_qseries(const QSeries<S>& a, long ram_t = 1) {
    BiSeries<S> r = bs_zero<S>(a.trunc, a.ram_q, ram_t);
    r.set(0, a);
    return r;
}

// coefficient of q^(e/ram_q) as a Laurent polynomial in t
template <class S>
LaurentPoly<S> q_layer(const BiSeries<S>& a, long e) {
    LaurentPoly<S> r;
    r.ram_t = a.ram_t;
    for (const auto& [te, qs] : a.terms) r.set(te, qs.coef(e));
    return r;
}

template <class S>
BiSeries<S> rescale_ram_q(const BiSeries<S>& a, long f) {
    if (f == 1) return a;
    BiSeries<S> r;
    r.ram_q = a.ram_q * f;
    r.ram_t = a.ram_t;
    r.trunc = a.trunc >= kExactOrder ? kExactOrder : a.trunc * f;
    r.t_band = a.t_band;
    for (const auto& [e, v] : a.terms) r.terms[e] = rescale_ram_q(v, f);
    return r;
}

template <class S>
BiSeries<S> rescale_ram_t(const BiSeries<S>& a, long f) {
    if (f == 1) return a;
    if (f <= 0) throw std::invalid_argument("ramification factor must be positive");
    BiSeries<S> r;
    r.ram_q = a.ram_q;
    r.ram_t = a.ram_t * f;
    r.trunc = a.trunc;
    if (a.t_band) r.t_band = {a.t_band->first * f, a.t_band->second * f};
    for (const auto& [e, v] : a.terms) r.terms[e * f] = v;
    return r;
}

namespace detail {
template <class S>
void match_rams(BiSeries<S>& a, BiSeries<S>& b) {
    if (a.ram_q != b.ram_q) {
        long l = std::lcm(a.ram_q, b.ram_q);
        a = rescale_ram_q(a, l / a.ram_q);
        b = rescale_ram_q(b, l / b.ram_q);
    }
    if (a.ram_t != b.ram_t) {
        long l = std::lcm(a.ram_t, b.ram_t);
        a = rescale_ram_t(a, l / a.ram_t);
        b = rescale_ram_t(b, l / b.ram_t);
    }
}

template <class S>
std::optional<std::pair<long, long>> band_sum(const BiSeries<S>& a, const BiSeries<S>& b) {
    if (a.t_band && b.t_band)
        return std::pair<long, long>{a.t_band->first + b.t_band->first,
                                     a.t_band->second + b.t_band->second};
    return std::nullopt;
}
}  // namespace detail

template <class S>
BiSeries<S> operator+(BiSeries<S> a, BiSeries<S> b) {
    detail::match_rams(a, b);
    BiSeries<S> r = a;
    r.trunc = trunc_min(a.trunc, b.trunc);
    r.t_band = std::nullopt;
    if (a.t_band && b.t_band)
        r.t_band = std::pair<long, long>{std::min(a.t_band->first, b.t_band->first),
                                         std::max(a.t_band->second, b.t_band->second)};
    for (const auto& [e, v] : b.terms) {
        auto it = r.terms.find(e);
        if (it == r.terms.end())
            r.terms[e] = v;
        else
            it->second = it->second + v;
    }
    r.normalize();
    return r;
}

template <class S>
BiSeries<S> operator-(const BiSeries<S>& a) {
    BiSeries<S> r = a;
    for (auto& [e, v] : r.terms) v = -v;
    return r;
}

template <class S>
BiSeries<S> operator-(const BiSeries<S>& a, const BiSeries<S>& b) {
    return a + (-b);
}

// Serial reference for the product; the parallel kernel in mul() must agree
// with this exactly.
template <class S>
BiSeries<S> mul_serial(BiSeries<S> a, BiSeries<S> b) {
    detail::match_rams(a, b);
    BiSeries<S> r = bs_zero<S>(kExactOrder, a.ram_q, a.ram_t);
    r.t_band = detail::band_sum(a, b);
    long tr = kExactOrder;
    {
        long va = kExactOrder, vb = kExactOrder;
        for (const auto& [e, v] : a.terms) va = trunc_min(va, v.valuation());
        for (const auto& [e, v] : b.terms) vb = trunc_min(vb, v.valuation());
        tr = trunc_min(trunc_add(a.trunc, vb), trunc_add(b.trunc, va));
    }
    for (const auto& [ea, va] : a.terms)
        for (const auto& [eb, vb] : b.terms) {
            auto prod = va * vb;
            auto it = r.terms.find(ea + eb);
            if (it == r.terms.end())
                r.terms[ea + eb] = prod;
            else
                it->second = it->second + prod;
        }
    r.trunc = tr;
    r.normalize();
    return r;
}

// Parallel product kernel; declared here, defined in biseries_mul.hpp to
// keep the OpenMP pragma in one place.
template <class S>
BiSeries<S> mul(const BiSeries<S>& a, const BiSeries<S>& b);

template <class S>
BiSeries<S> operator*(const BiSeries<S>& a, const BiSeries<S>& b) {
    return mul(a, b);
}

template <class S>
BiSeries<S> operator*(const BiSeries<S>& a, const S& s) {
    BiSeries<S> r = a;
    for (auto& [e, v] : r.terms) v = v * s;
    r.normalize();
    return r;
}

template <class S>
BiSeries<S> scale_frac(const BiSeries<S>& a, long num, long den) {
    BiSeries<S> r = a;
    for (auto& [e, v] : r.terms) v = scale_frac(v, num, den);
    r.normalize();
    return r;
}

// multiply by q^(e/ram_q)
template <class S>
BiSeries<S> shift_q(const BiSeries<S>& a, long e) {
    BiSeries<S> r = a;
    r.trunc = trunc_add(r.trunc, e);
    for (auto& [te, v] : r.terms) v = shift_q(v, e);
    return r;
}

// multiply by t^(e/ram_t)
template <class S>
BiSeries<S> shift_t(const BiSeries<S>& a, long e) {
    BiSeries<S> r = bs_zero<S>(a.trunc, a.ram_q, a.ram_t);
    if (a.t_band) r.t_band = {a.t_band->first + e, a.t_band->second + e};
    for (const auto& [te, v] : a.terms) r.terms[te + e] = v;
    return r;
}

template <class S>
BiSeries<S> clamp_trunc(const BiSeries<S>& a, long new_trunc) {
    BiSeries<S> r = a;
    r.trunc = trunc_min(r.trunc, new_trunc);
    r.normalize();
    return r;
}

template <class S>
bool operator==(BiSeries<S> a, BiSeries<S> b) {
    detail::match_rams(a, b);
    if (a.trunc != b.trunc) return false;
    return a.terms == b.terms;
}

// same stored coefficients, ignoring the knowledge bound
template <class S>
bool same_series(BiSeries<S> a, BiSeries<S> b) {
    detail::match_rams(a, b);
    if (a.terms.size() != b.terms.size()) return false;
    auto ia = a.terms.begin();
    auto ib = b.terms.begin();
    for (; ia != a.terms.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        if (!same_series(ia->second, ib->second)) return false;
    }
    return true;
}

// D = t d/dt, acting through the true exponent e/ram_t
template <class S>
BiSeries<S> derivation_D(const BiSeries<S>& a) {
    BiSeries<S> r = bs_zero<S>(a.trunc, a.ram_q, a.ram_t);
    r.t_band = a.t_band;
    for (const auto& [e, v] : a.terms) {
        if (e == 0) continue;
        r.set(e, scale_frac(v, e, a.ram_t));
    }
    return r;
}

template <class S>
BiSeries<S> derivation_ddt(const BiSeries<S>& a) {
    BiSeries<S> r = bs_zero<S>(a.trunc, a.ram_q, a.ram_t);
    for (const auto& [e, v] : a.terms) {
        if (e == 0) continue;
        r.set(e - a.ram_t, scale_frac(v, e, a.ram_t));
    }
    return r;
}

// modulo q: the t-Laurent polynomial of q-exponent-zero coefficients
template <class S>
LaurentPoly<S> mod_q(const BiSeries<S>& a) {
    return q_layer(a, 0);
}

// true iff every coefficient has q-valuation >= 1 (trivial modulo q)
template <class S>
bool is_zero_mod_q(const BiSeries<S>& a) {
    for (const auto& [e, v] : a.terms)
        if (!v.is_zero() && v.valuation() < a.ram_q) return false;
    return true;
}

// smallest q-valuation over all stored terms (stored exponent units)
template <class S>
long min_q_valuation(const BiSeries<S>& a) {
    long m = a.trunc;
    for (const auto& [e, v] : a.terms) m = trunc_min(m, v.valuation());
    return m;
}

// Inverse of a unit u = c + O(q) with c a nonzero t-constant scalar.  The
// geometric series in (1 - u/c) terminates at the q-truncation order.
// Exact inputs need an explicit working order.
template <class S>
BiSeries<S> geometric_inverse(const BiSeries<S>& u, long order_if_exact = -1) {
    if (min_q_valuation(u) < 0)
        throw not_a_unit("negative q-valuation");
    auto u0 = mod_q(u);
    if (u0.terms.size() != 1 || u0.terms.begin()->first != 0)
        throw not_a_unit("leading q-coefficient is not a nonzero t-constant");
    S c = u0.terms.begin()->second;
    long work = u.trunc;
    if (work >= kExactOrder) {
        if (order_if_exact <= 0)
            throw not_a_unit("exact series needs an explicit inversion order");
        work = order_if_exact * u.ram_q;
    }
    S cinv = scalar_one(c);
    {
        // 1/c via the ring's own division
        if constexpr (std::is_same_v<S, Rat>) {
            cinv = Rat(1) / c;
        } else {
            cinv = inverse(c);
        }
    }
    BiSeries<S> uc = clamp_trunc(u * cinv, work);
    BiSeries<S> one = bs_const(scalar_one(c), work, u.ram_q, u.ram_t);
    BiSeries<S> delta = one - uc;  // == 0 mod q
    BiSeries<S> acc = one;
    BiSeries<S> pw = one;
    // delta^k vanishes once k exceeds the truncation order
    for (long k = 1; k * 1 < work && !pw.is_zero(); ++k) {
        pw = mul_serial(pw, delta);
        if (pw.is_zero()) break;
        acc = acc + pw;
    }
    return acc * cinv;
}

// Per-term q-adic valuation data: entries (t-exponent over ram_t, valuation
// over ram_q), ordered by t-exponent.
struct ValProfile {
    std::vector<std::pair<long, long>> entries;
    long ram_t = 1;
    long ram_q = 1;
};

template <class S>
ValProfile q_valuation_profile(const BiSeries<S>& a) {
    ValProfile r;
    r.ram_t = a.ram_t;
    r.ram_q = a.ram_q;
    for (const auto& [e, v] : a.terms) r.entries.emplace_back(e, v.valuation());
    return r;
}

template <class S>
BiSeries<ModP> reduce_biseries_mod_p(const BiSeries<S>& a, long long p);

template <>
inline BiSeries<ModP> reduce_biseries_mod_p(const BiSeries<Rat>& a, long long p) {
    BiSeries<ModP> r;
    r.trunc = a.trunc;
    r.ram_q = a.ram_q;
    r.ram_t = a.ram_t;
    r.t_band = a.t_band;
    for (const auto& [e, v] : a.terms) {
        auto red = reduce_qseries_mod_p(v, p);
        if (!red.is_zero()) r.terms[e] = std::move(red);
    }
    return r;
}

inline std::string biseries_str(const BiSeries<Rat>& a) {
    if (a.is_zero()) return "0";
    std::string s;
    for (const auto& [e, v] : a.terms) {
        if (!s.empty()) s += " + ";
        s += "(" + qseries_str(v) + ")";
        if (e != 0) {
            s += "*t^" + std::to_string(e);
            if (a.ram_t != 1) s += "/" + std::to_string(a.ram_t);
        }
    }
    return s;
}

}  // namespace pcurv

#include "pcurv/biseries_mul.hpp"

#endif

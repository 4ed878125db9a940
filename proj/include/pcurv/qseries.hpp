#ifndef PCURV_QSERIES_HPP
#define PCURV_QSERIES_HPP

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pcurv/modp.hpp"
#include "pcurv/rational.hpp"

namespace pcurv {

// Exponent bound meaning "known exactly"; far above any order a computation
// reaches, and min()/+ treat it as absorbing.
inline constexpr long kExactOrder = 1L << 40;

inline long trunc_min(long a, long b) { return a < b ? a : b; }
inline long trunc_add(long a, long b) {
    if (a >= kExactOrder || b >= kExactOrder) return kExactOrder;
    return a + b;
}

// Series in q over a scalar ring S, Laurent at the low end, truncated at the
// high end.  Stored exponent e means q^(e/ram_q).  Coefficients live in the
// window [lo, lo + c.size()); exponents from there to trunc are known zero;
// exponents >= trunc are unknown.  Canonical form: window trimmed so that
// c.front() and c.back() are nonzero, zero series has empty c and lo = 0.
template <class S>
struct QSeries {
    long lo = 0;
    std::vector<S> c;
    long trunc = kExactOrder;
    long ram_q = 1;

    QSeries() = default;

    bool is_zero() const { return c.empty(); }

    // smallest exponent with a nonzero coefficient, or trunc if none stored
    long valuation() const { return c.empty() ? trunc : lo; }

    S coef(long e) const {
        if (e < lo || e >= lo + static_cast<long>(c.size())) {
            return c.empty() ? S{} : scalar_zero(c.front());
        }
        return c[e - lo];
    }

    void canonicalize() {
        // drop coefficients at or above trunc
        if (trunc < kExactOrder) {
            long hi = lo + static_cast<long>(c.size());
            if (hi > trunc) c.resize(std::max<long>(0, trunc - lo));
        }
        size_t b = 0;
        while (b < c.size() && scalar_is_zero(c[b])) ++b;
        size_t e = c.size();
        while (e > b && scalar_is_zero(c[e - 1])) --e;
        if (b > 0 || e < c.size()) {
            std::vector<S> w(c.begin() + b, c.begin() + e);
            lo += static_cast<long>(b);
            c = std::move(w);
        }
        if (c.empty()) lo = 0;
    }
};

template <class S>
QSeries<S> qs_zero(long trunc = kExactOrder, long ram_q = 1) {
    QSeries<S> z;
    z.trunc = trunc;
    z.ram_q = ram_q;
    return z;
}

// c * q^(e/ram_q)
template <class S>
QSeries<S> qs_monomial(const S& coeff, long e, long trunc = kExactOrder, long ram_q = 1) {
    QSeries<S> r;
    r.trunc = trunc;
    r.ram_q = ram_q;
    if (!scalar_is_zero(coeff) && e < trunc) {
        r.lo = e;
        r.c = {coeff};
    }
    return r;
}

template <class S>
QSeries<S> qs_const(const S& coeff, long trunc = kExactOrder, long ram_q = 1) {
    return qs_monomial(coeff, 0, trunc, ram_q);
}

// multiply every stored index by f (ram_q * f bookkeeping)
template <class S>
QSeries<S> rescale_ram_q(const QSeries<S>& a, long f) {
    if (f == 1) return a;
    if (f <= 0) throw std::invalid_argument("ramification factor must be positive");
    QSeries<S> r;
    r.ram_q = a.ram_q * f;
    r.trunc = a.trunc >= kExactOrder ? kExactOrder : a.trunc * f;
    r.lo = a.lo * f;
    if (!a.c.empty()) {
        r.c.assign((a.c.size() - 1) * f + 1, scalar_zero(a.c.front()));
        for (size_t i = 0; i < a.c.size(); ++i) r.c[i * f] = a.c[i];
    } else {
        r.lo = 0;
    }
    return r;
}

namespace detail {
template <class S>
void match_ram_q(QSeries<S>& a, QSeries<S>& b) {
    if (a.ram_q == b.ram_q) return;
    long l = std::lcm(a.ram_q, b.ram_q);
    a = rescale_ram_q(a, l / a.ram_q);
    b = rescale_ram_q(b, l / b.ram_q);
}
}  // namespace detail

template <class S>
QSeries<S> operator+(QSeries<S> a, QSeries<S> b) {
    detail::match_ram_q(a, b);
    QSeries<S> r;
    r.ram_q = a.ram_q;
    r.trunc = trunc_min(a.trunc, b.trunc);
    if (a.is_zero() && b.is_zero()) return r;
    long lo = std::min(a.valuation(), b.valuation());
    long hi = std::max(a.lo + static_cast<long>(a.c.size()), b.lo + static_cast<long>(b.c.size()));
    hi = trunc_min(hi, r.trunc);
    if (hi <= lo) return r;
    r.lo = lo;
    const S like = a.is_zero() ? b.c.front() : a.c.front();
    r.c.assign(hi - lo, scalar_zero(like));
    for (long e = lo; e < hi; ++e) r.c[e - lo] = a.coef(e) + b.coef(e);
    r.canonicalize();
    return r;
}

template <class S>
QSeries<S> operator-(const QSeries<S>& a) {
    QSeries<S> r = a;
    for (auto& x : r.c) x = -x;
    return r;
}

template <class S>
QSeries<S> operator-(const QSeries<S>& a, const QSeries<S>& b) {
    return a + (-b);
}

template <class S>
QSeries<S> operator*(QSeries<S> a, QSeries<S> b) {
    detail::match_ram_q(a, b);
    QSeries<S> r;
    r.ram_q = a.ram_q;
    r.trunc = trunc_min(trunc_add(a.trunc, b.valuation()), trunc_add(b.trunc, a.valuation()));
    if (a.is_zero() || b.is_zero()) return r;
    long lo = a.lo + b.lo;
    long hi = trunc_min(lo + static_cast<long>(a.c.size() + b.c.size()) - 1, r.trunc);
    if (hi <= lo) return r;
    r.lo = lo;
    r.c.assign(hi - lo, scalar_zero(a.c.front()));
    for (size_t i = 0; i < a.c.size(); ++i) {
        if (scalar_is_zero(a.c[i])) continue;
        long base = a.lo + static_cast<long>(i);
        size_t jmax = std::min(b.c.size(), static_cast<size_t>(std::max<long>(0, hi - base - b.lo)));
        for (size_t j = 0; j < jmax; ++j) {
            r.c[base + b.lo + static_cast<long>(j) - lo] = r.c[base + b.lo + static_cast<long>(j) - lo] + a.c[i] * b.c[j];
        }
    }
    r.canonicalize();
    return r;
}

template <class S>
QSeries<S> operator*(const QSeries<S>& a, const S& s) {
    QSeries<S> r = a;
    if (scalar_is_zero(s)) {
        r.c.clear();
        r.lo = 0;
        return r;
    }
    for (auto& x : r.c) x = x * s;
    r.canonicalize();
    return r;
}

// multiply by the exact fraction num/den (den invertible in S)
template <class S>
QSeries<S> scale_frac(const QSeries<S>& a, long num, long den) {
    if (a.is_zero()) return a;
    return a * scalar_frac(a.c.front(), num, den);
}

// multiply by q^(e/ram_q), shifting both window and knowledge bound
template <class S>
QSeries<S> shift_q(const QSeries<S>& a, long e) {
    QSeries<S> r = a;
    r.lo += e;
    if (r.trunc < kExactOrder) r.trunc += e;
    if (r.c.empty()) r.lo = 0;
    return r;
}

// forget everything at or above exponent new_trunc
template <class S>
QSeries<S> clamp_trunc(const QSeries<S>& a, long new_trunc) {
    QSeries<S> r = a;
    r.trunc = trunc_min(r.trunc, new_trunc);
    r.canonicalize();
    return r;
}

template <class S>
bool operator==(QSeries<S> a, QSeries<S> b) {
    detail::match_ram_q(a, b);
    if (a.trunc != b.trunc) return false;
    if (a.c.size() != b.c.size()) return false;
    if (a.c.empty()) return true;
    if (a.lo != b.lo) return false;
    for (size_t i = 0; i < a.c.size(); ++i)
        if (!(a.c[i] == b.c[i])) return false;
    return true;
}

// compare stored coefficients only (same values, possibly different trunc)
template <class S>
bool same_series(QSeries<S> a, QSeries<S> b) {
    detail::match_ram_q(a, b);
    if (a.c.size() != b.c.size()) return false;
    if (a.c.empty()) return true;
    if (a.lo != b.lo) return false;
    for (size_t i = 0; i < a.c.size(); ++i)
        if (!(a.c[i] == b.c[i])) return false;
    return true;
}

template <class S>
QSeries<ModP> reduce_qseries_mod_p(const QSeries<S>& a, long long p);

template <>
inline QSeries<ModP> reduce_qseries_mod_p(const QSeries<Rat>& a, long long p) {
    QSeries<ModP> r;
    r.lo = a.lo;
    r.trunc = a.trunc;
    r.ram_q = a.ram_q;
    r.c.reserve(a.c.size());
    for (const auto& x : a.c) r.c.push_back(reduce_mod_p(x, p));
    r.canonicalize();
    return r;
}

inline std::string qseries_str(const QSeries<Rat>& a) {
    if (a.is_zero()) return "0";
    std::string s;
    for (size_t i = 0; i < a.c.size(); ++i) {
        if (scalar_is_zero(a.c[i])) continue;
        if (!s.empty()) s += " + ";
        s += a.c[i].get_str();
        long e = a.lo + static_cast<long>(i);
        if (e != 0) {
            s += "*q^" + std::to_string(e);
            if (a.ram_q != 1) s += "/" + std::to_string(a.ram_q);
        }
    }
    return s;
}

}  // namespace pcurv

#endif

#ifndef PCURV_LAURENT_HPP
#define PCURV_LAURENT_HPP

#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pcurv/modp.hpp"
#include "pcurv/rational.hpp"

namespace pcurv {

// Finite Laurent polynomial in t over a scalar ring.  Stored exponent e
// means t^(e/ram_t).  Zero coefficients are never stored, so structural
// comparison is semantic equality (at matching ramification).
template <class C>
struct LaurentPoly {
    std::map<long, C> terms;
    long ram_t = 1;

    bool is_zero() const { return terms.empty(); }

    void set(long e, const C& v) {
        if (scalar_is_zero(v))
            terms.erase(e);
        else
            terms[e] = v;
    }

    C coef(long e) const {
        auto it = terms.find(e);
        if (it != terms.end()) return it->second;
        return terms.empty() ? C{} : scalar_zero(terms.begin()->second);
    }

    void canonicalize() {
        for (auto it = terms.begin(); it != terms.end();) {
            if (scalar_is_zero(it->second))
                it = terms.erase(it);
            else
                ++it;
        }
    }

    // true iff the polynomial is a constant (t^0 only or zero)
    bool is_constant() const {
        return terms.empty() || (terms.size() == 1 && terms.begin()->first == 0);
    }
};

template <class C>
LaurentPoly<C> lp_zero(long ram_t = 1) {
    LaurentPoly<C> z;
    z.ram_t = ram_t;
    return z;
}

template <class C>
LaurentPoly<C> lp_monomial(const C& coeff, long e, long ram_t = 1) {
    LaurentPoly<C> r;
    r.ram_t = ram_t;
    r.set(e, coeff);
    return r;
}

template <class C>
LaurentPoly<C> lp_const(const C& coeff, long ram_t = 1) {
    return lp_monomial(coeff, 0, ram_t);
}

template <class C>
LaurentPoly<C> rescale_ram_t(const LaurentPoly<C>& a, long f) {
    if (f == 1) return a;
    if (f <= 0) throw std::invalid_argument("ramification factor must be positive");
    LaurentPoly<C> r;
    r.ram_t = a.ram_t * f;
    for (const auto& [e, v] : a.terms) r.terms[e * f] = v;
    return r;
}

namespace detail {
template <class C>
void match_ram_t(LaurentPoly<C>& a, LaurentPoly<C>& b) {
    if (a.ram_t == b.ram_t) return;
    long l = std::lcm(a.ram_t, b.ram_t);
    a = rescale_ram_t(a, l / a.ram_t);
    b = rescale_ram_t(b, l / b.ram_t);
}
}  // namespace detail

template <class C>
LaurentPoly<C> operator+(LaurentPoly<C> a, LaurentPoly<C> b) {
    detail::match_ram_t(a, b);
    LaurentPoly<C> r = a;
    for (const auto& [e, v] : b.terms) {
        auto it = r.terms.find(e);
        if (it == r.terms.end())
            r.terms[e] = v;
        else {
            it->second = it->second + v;
            if (scalar_is_zero(it->second)) r.terms.erase(it);
        }
    }
    return r;
}

template <class C>
LaurentPoly<C> operator-(const LaurentPoly<C>& a) {
    LaurentPoly<C> r = a;
    for (auto& [e, v] : r.terms) v = -v;
    return r;
}

template <class C>
LaurentPoly<C> operator-(const LaurentPoly<C>& a, const LaurentPoly<C>& b) {
    return a + (-b);
}

template <class C>
LaurentPoly<C> operator*(LaurentPoly<C> a, LaurentPoly<C> b) {
    detail::match_ram_t(a, b);
    LaurentPoly<C> r;
    r.ram_t = a.ram_t;
    for (const auto& [ea, va] : a.terms)
        for (const auto& [eb, vb] : b.terms) {
            C prod = va * vb;
            if (scalar_is_zero(prod)) continue;
            auto it = r.terms.find(ea + eb);
            if (it == r.terms.end())
                r.terms[ea + eb] = prod;
            else {
                it->second = it->second + prod;
                if (scalar_is_zero(it->second)) r.terms.erase(it);
            }
        }
    return r;
}

template <class C>
LaurentPoly<C> operator*(const LaurentPoly<C>& a, const C& s) {
    LaurentPoly<C> r;
    r.ram_t = a.ram_t;
    for (const auto& [e, v] : a.terms) r.set(e, v * s);
    return r;
}

template <class C>
bool operator==(LaurentPoly<C> a, LaurentPoly<C> b) {
    detail::match_ram_t(a, b);
    return a.terms == b.terms;
}

// D = t d/dt: t^(e/ram) -> (e/ram) t^(e/ram)
template <class C>
LaurentPoly<C> derivation_D(const LaurentPoly<C>& a) {
    LaurentPoly<C> r;
    r.ram_t = a.ram_t;
    for (const auto& [e, v] : a.terms) {
        if (e == 0) continue;
        r.set(e, v * scalar_frac(v, e, a.ram_t));
    }
    return r;
}

// d/dt: t^(e/ram) -> (e/ram) t^(e/ram - 1)
template <class C>
LaurentPoly<C> derivation_ddt(const LaurentPoly<C>& a) {
    LaurentPoly<C> r;
    r.ram_t = a.ram_t;
    for (const auto& [e, v] : a.terms) {
        if (e == 0) continue;
        r.set(e - a.ram_t, v * scalar_frac(v, e, a.ram_t));
    }
    return r;
}

template <class C>
LaurentPoly<ModP> reduce_laurent_mod_p(const LaurentPoly<C>& a, long long p);

template <>
inline LaurentPoly<ModP> reduce_laurent_mod_p(const LaurentPoly<Rat>& a, long long p) {
    LaurentPoly<ModP> r;
    r.ram_t = a.ram_t;
    for (const auto& [e, v] : a.terms) r.set(e, reduce_mod_p(v, p));
    return r;
}

template <class C>
std::string laurent_str(const LaurentPoly<C>& a) {
    if (a.is_zero()) return "0";
    std::string s;
    for (const auto& [e, v] : a.terms) {
        if (!s.empty()) s += " + ";
        s += scalar_str(v);
        if (e != 0) {
            s += "*t^" + std::to_string(e);
            if (a.ram_t != 1) s += "/" + std::to_string(a.ram_t);
        }
    }
    return s;
}

}  // namespace pcurv

#endif

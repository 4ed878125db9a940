#ifndef PCURV_GROWTH_HPP
#define PCURV_GROWTH_HPP

#include <optional>
#include <string>
#include <vector>

#include "pcurv/connection.hpp"

namespace pcurv {

struct bound_violated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Radius |q|^alpha of an annulus circle, kept as the exact exponent.
struct Radius {
    Rat alpha{0};
};

// All size comparisons happen in valuation space: |x| = |q|^v with v the
// q-adic valuation, so |a_k| r^k <= 1 on |t| = |q|^alpha reads
// v(a_k) + k*alpha >= 0.

struct GrowthViolation {
    Rat t_exp;
    int radius_index = 0;  // 1 = inner, 2 = outer
    Rat margin;            // v + k*alpha, negative when violated
};

struct GrowthCheck {
    bool ok = true;
    std::optional<GrowthViolation> violation;
};

template <class S>
GrowthCheck check_growth(const BiSeries<S>& f, const Radius& r1, const Radius& r2) {
    if (r1.alpha < r2.alpha)
        throw std::invalid_argument("inner radius must not exceed outer radius");
    GrowthCheck res;
    for (const auto& [e, qs] : f.terms) {
        if (qs.is_zero()) continue;
        Rat k = rat(e, f.ram_t);
        Rat v = rat(qs.valuation(), f.ram_q);
        int idx = 1;
        for (const Rat& alpha : {r1.alpha, r2.alpha}) {
            Rat margin = v + k * alpha;
            if (margin < 0) {
                res.ok = false;
                res.violation = GrowthViolation{k, idx, margin};
                return res;
            }
            ++idx;
        }
    }
    return res;
}

// bounded-by-1 membership at the unit circle, i.e. every coefficient
// q-integral
template <class S>
bool is_q_integral(const BiSeries<S>& f) {
    return check_growth(f, Radius{Rat(0)}, Radius{Rat(0)}).ok;
}

// Extremal norm data of a companion last column f_0..f_{n-1}:
//   ell  = max |a_{k,i}|^{1/(n-k)}   recorded as val_ell = v_q(ell),
//   nu   = max i/(n-k) over the attaining pairs.
struct NormData {
    Rat val_ell;
    Rat nu;
    std::vector<std::pair<int, Rat>> attaining;  // (k, t-exponent i)
};

// Returns nothing when every coefficient is already q-integral (the caller
// skips the shearing step in that case).
inline std::optional<NormData> extract_ell_nu(const Connection<BiQ>& c) {
    if (c.basis != BasisTag::cyclic)
        throw std::invalid_argument("extremal norms need a companion matrix");
    const int n = c.n;
    bool any_negative = false;
    std::optional<Rat> best;
    for (int k = 0; k < n; ++k) {
        const BiQ& f = c.a.at(k, n - 1);
        for (const auto& [e, qs] : f.terms) {
            if (qs.is_zero()) continue;
            Rat v = rat(qs.valuation(), f.ram_q);
            if (v < 0) any_negative = true;
            Rat cand = v / Rat(n - k);
            if (!best || cand < *best) best = cand;
        }
    }
    if (!any_negative) return std::nullopt;
    NormData nd;
    nd.val_ell = *best;
    bool have_nu = false;
    for (int k = 0; k < n; ++k) {
        const BiQ& f = c.a.at(k, n - 1);
        for (const auto& [e, qs] : f.terms) {
            if (qs.is_zero()) continue;
            Rat v = rat(qs.valuation(), f.ram_q);
            if (v / Rat(n - k) != nd.val_ell) continue;
            Rat i = rat(e, f.ram_t);
            Rat cand = i / Rat(n - k);
            if (!have_nu || cand > nd.nu) {
                nd.nu = cand;
                have_nu = true;
            }
            nd.attaining.emplace_back(k, i);
        }
    }
    return nd;
}

// diag(1, t^-nu, ..., t^-(n-1)nu); fractional nu is cleared through the
// t-ramification of the ambient connection.
inline GaugeMatrix<BiQ> shearing_twist(const Connection<BiQ>& c, const Rat& nu) {
    const int n = c.n;
    long den = rat_den_long(nu);
    if (c.ram_t % den != 0)
        throw std::invalid_argument("connection ramification does not clear nu");
    Matrix<BiQ> m(n, n, connection_zero(c));
    Matrix<BiQ> inv(n, n, connection_zero(c));
    for (int k = 0; k < n; ++k) {
        // exponent -k*nu over ram_t
        Rat e = -Rat(k) * nu * Rat(c.ram_t);
        auto ei = rat_to_long(e);
        if (!ei) throw std::invalid_argument("twist exponent not integral at this ramification");
        m.at(k, k) = bs_monomial(Rat(1), *ei, 0, c.trunc, c.ram_q, c.ram_t);
        inv.at(k, k) = bs_monomial(Rat(1), -*ei, 0, c.trunc, c.ram_q, c.ram_t);
    }
    GaugeMatrix<BiQ> g;
    g.mat = std::move(m);
    g.inv = std::move(inv);
    g.tag = GaugeTag::shear;
    return g;
}

// Rescale ramification so that nu's denominator divides ram_t.
inline Connection<BiQ> with_ram_for(const Connection<BiQ>& c, const Rat& nu) {
    long den = rat_den_long(nu);
    long l = std::lcm(c.ram_t, den);
    if (l == c.ram_t) return c;
    Connection<BiQ> r = c;
    r.ram_t = l;
    r.a = mat_map(c.a, [&](const BiQ& x) { return rescale_ram_t(x, l / x.ram_t); });
    return r;
}

struct ExtremalBoundsReport {
    std::vector<std::pair<int, Rat>> equality_pairs;  // (row k, twisted t-exponent)
};

// After the shearing twist the last column reads sum b_{k,i} t^i with
//   v(b_{k,i}) >  (n-k) * val_ell  for i > nu,
//   v(b_{k,i}) >= (n-k) * val_ell  always, with equality attained somewhere.
// The diagonal constants -k*nu introduced by the twist are removed first.
inline ExtremalBoundsReport verify_extremal_bounds(const Connection<BiQ>& sheared,
                                                   const NormData& nd) {
    const int n = sheared.n;
    ExtremalBoundsReport rep;
    for (int k = 0; k < n; ++k) {
        BiQ b = sheared.a.at(k, n - 1);
        if (k == n - 1) {
            // remove the twist's diagonal constant -(n-1)*nu
            Rat cst = Rat(n - 1) * nd.nu;
            b = b + bs_const(cst, b.trunc, b.ram_q, b.ram_t);
        }
        Rat need = Rat(n - k) * nd.val_ell;
        for (const auto& [e, qs] : b.terms) {
            if (qs.is_zero()) continue;
            Rat i = rat(e, b.ram_t);
            Rat v = rat(qs.valuation(), b.ram_q);
            if (v < need)
                throw bound_violated("entry (" + std::to_string(k) + ", i=" + i.get_str() +
                                     ") has valuation " + v.get_str() + " < " + need.get_str());
            if (i > nd.nu && v == need)
                throw bound_violated("strict bound fails at (" + std::to_string(k) +
                                     ", i=" + i.get_str() + ")");
            if (v == need) rep.equality_pairs.emplace_back(k, i);
        }
    }
    if (rep.equality_pairs.empty() && nd.val_ell < 0)
        throw bound_violated("no attaining pair after shearing");
    return rep;
}

// Convenience pipeline step: rescale, twist, transform; returns the sheared
// connection and the gauge used.
inline std::pair<Connection<BiQ>, GaugeMatrix<BiQ>> apply_shearing(const Connection<BiQ>& c,
                                                                   const NormData& nd) {
    Connection<BiQ> cr = with_ram_for(c, nd.nu);
    auto g = shearing_twist(cr, nd.nu);
    return {gauge_transform(cr, g), g};
}

// min over terms of v_q + k*alpha, the valuation of f on |t| = |q|^alpha
template <class S>
std::optional<Rat> measured_valuation(const BiSeries<S>& f, const Rat& alpha) {
    std::optional<Rat> best;
    for (const auto& [e, qs] : f.terms) {
        if (qs.is_zero()) continue;
        Rat v = rat(qs.valuation(), f.ram_q) + rat(e, f.ram_t) * alpha;
        if (!best || v < *best) best = v;
    }
    return best;
}

template <class S>
std::optional<Rat> measured_valuation(const Matrix<BiSeries<S>>& m, const Rat& alpha) {
    std::optional<Rat> best;
    for (const auto& x : m.d) {
        auto v = measured_valuation(x, alpha);
        if (v && (!best || *v < *best)) best = *v;
    }
    return best;
}

}  // namespace pcurv

#endif

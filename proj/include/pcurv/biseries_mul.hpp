#ifndef PCURV_BISERIES_MUL_HPP
#define PCURV_BISERIES_MUL_HPP

#include <vector>

#include "pcurv/biseries.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pcurv {

// OpenMP product kernel.  Output t-exponents are independent, so the loop
// over the output range parallelizes without synchronization; each thread
// gathers the convolution pairs landing on its exponent.  Falls back to the
// serial reference below the work threshold, and must agree with
// mul_serial() exactly (tests compare them term by term).
template <class S>
BiSeries<S> mul(const BiSeries<S>& a_in, const BiSeries<S>& b_in) {
    BiSeries<S> a = a_in, b = b_in;
    detail::match_rams(a, b);
    const size_t pairs = a.terms.size() * b.terms.size();
    if (pairs < 512) return mul_serial(a, b);

    std::vector<std::pair<long, const QSeries<S>*>> ta, tb;
    ta.reserve(a.terms.size());
    tb.reserve(b.terms.size());
    for (const auto& [e, v] : a.terms) ta.emplace_back(e, &v);
    for (const auto& [e, v] : b.terms) tb.emplace_back(e, &v);

    const long lo = ta.front().first + tb.front().first;
    const long hi = ta.back().first + tb.back().first;
    std::vector<QSeries<S>> out(hi - lo + 1);

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (long k = lo; k <= hi; ++k) {
        QSeries<S> acc;
        bool any = false;
        for (const auto& [ea, va] : ta) {
            long eb = k - ea;
            if (eb < tb.front().first || eb > tb.back().first) continue;
            auto it = b.terms.find(eb);
            if (it == b.terms.end()) continue;
            auto prod = (*va) * it->second;
            if (!any) {
                acc = std::move(prod);
                any = true;
            } else {
                acc = acc + prod;
            }
        }
        out[k - lo] = std::move(acc);
    }

    BiSeries<S> r = bs_zero<S>(kExactOrder, a.ram_q, a.ram_t);
    r.t_band = detail::band_sum(a, b);
    long va = kExactOrder, vb = kExactOrder;
    for (const auto& [e, v] : a.terms) va = trunc_min(va, v.valuation());
    for (const auto& [e, v] : b.terms) vb = trunc_min(vb, v.valuation());
    r.trunc = trunc_min(trunc_add(a.trunc, vb), trunc_add(b.trunc, va));
    for (long k = lo; k <= hi; ++k) {
        if (!out[k - lo].is_zero()) r.terms[k] = std::move(out[k - lo]);
    }
    r.normalize();
    return r;
}

}  // namespace pcurv

#endif

#include "pcurv/gauge.hpp"

#include <numeric>
#include <sstream>

#include "pcurv/digest.hpp"

namespace pcurv {

MatQ mod_q_constant_matrix(const Connection<BiQ>& c) {
    MatQ out(c.n, c.n, Rat(0));
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            const BiQ& e = c.a.at(i, j);
            if (min_q_valuation(e) < 0)
                throw katz_check_failed("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") has a pole in q");
            for (const auto& [te, qs] : e.terms) {
                for (long layer = 0; layer < e.ram_q; ++layer) {
                    Rat v = qs.coef(layer);
                    if (is_zero(v)) continue;
                    if (te != 0 || layer != 0)
                        throw katz_check_failed(
                            "matrix mod q is not constant in t at entry (" + std::to_string(i) +
                            "," + std::to_string(j) + "), t-exponent " + std::to_string(te));
                    out.at(i, j) = v;
                }
            }
        }
    return out;
}

EigenSplit rational_semisimple_split(const MatQ& a0bar) {
    int n = a0bar.rows;
    auto cp = char_poly(a0bar);
    auto roots = rational_roots(cp);
    int total = 0;
    for (const auto& [r, m] : roots) total += m;
    if (total < n) {
        std::ostringstream os;
        os << "characteristic polynomial has only " << total << " rational roots out of " << n;
        throw irrational_eigenvalues(os.str());
    }
    for (const auto& [r, m] : roots) {
        MatQ shifted = a0bar;
        for (int i = 0; i < n; ++i) shifted.at(i, i) -= r;
        int rank = matq_rank(shifted);
        if (rank != n - m)
            throw not_semisimple("eigenvalue " + r.get_str() + " has kernel dimension " +
                                 std::to_string(n - rank) + " < multiplicity " + std::to_string(m));
    }
    EigenSplit s;
    s.eigenvalues = roots;
    return s;
}

Connection<BiQ> pullback_t(const Connection<BiQ>& c, long m) {
    if (m == 1) return c;
    Connection<BiQ> r = c;
    r.a = mat_map(c.a, [&](const BiQ& x) {
        BiQ y = bs_zero<Rat>(x.trunc, x.ram_q, x.ram_t);
        if (x.t_band) y.t_band = {x.t_band->first * m, x.t_band->second * m};
        for (const auto& [e, v] : x.terms) y.terms[e * m] = v;
        return scale_frac(y, m, 1);
    });
    return r;
}

TwistResult diagonalize_and_twist(const Connection<BiQ>& c) {
    TwistResult res;
    MatQ a0bar = mod_q_constant_matrix(c);
    EigenSplit split = rational_semisimple_split(a0bar);

    // constant eigenbasis: columns are kernel bases of (A - lambda I)
    int n = c.n;
    MatQ x(n, n, Rat(0));
    int col = 0;
    for (const auto& [lambda, mult] : split.eigenvalues) {
        MatQ shifted = a0bar;
        for (int i = 0; i < n; ++i) shifted.at(i, i) -= lambda;
        auto kernel = matq_kernel(shifted);
        for (const auto& v : kernel) {
            for (int i = 0; i < n; ++i) x.at(i, col) = v[i];
            ++col;
        }
    }
    if (col != n) throw not_semisimple("eigenbasis incomplete");

    // denominator-clearing pullback t -> s^m
    long m = 1;
    for (const auto& [lambda, mult] : split.eigenvalues)
        m = std::lcm(m, rat_den_long(lambda));

    Connection<BiQ> cur = pullback_t(c, m);
    res.pullback_m = m;

    auto to_ring = [&](const MatQ& q) {
        Matrix<BiQ> r(n, n, connection_zero(cur));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!is_zero(q.at(i, j)))
                    r.at(i, j) = bs_const(q.at(i, j), cur.trunc, cur.ram_q, cur.ram_t);
        return r;
    };

    auto xinv = matq_inverse(x);
    if (!xinv) throw not_semisimple("eigenbasis not invertible");
    GaugeMatrix<BiQ> gx;
    gx.mat = to_ring(x);
    gx.inv = to_ring(*xinv);
    gx.tag = GaugeTag::constant;
    cur = gauge_transform(cur, gx);
    res.log.push(gx, "eigenbasis");

    // diagonal twist diag(t^-d_k), d_k the (pulled back) integer eigenvalues
    std::vector<long> d;
    for (const auto& [lambda, mult] : split.eigenvalues) {
        Rat scaled = lambda * Rat(m);
        auto di = rat_to_long(scaled);
        if (!di) throw irrational_eigenvalues("eigenvalue " + lambda.get_str() +
                                              " not integral after pullback");
        for (int i = 0; i < mult; ++i) {
            d.push_back(*di);
            res.eigenvalues_after_pullback.push_back(scaled);
        }
    }
    Matrix<BiQ> tw(n, n, connection_zero(cur));
    Matrix<BiQ> twi(n, n, connection_zero(cur));
    for (int k = 0; k < n; ++k) {
        tw.at(k, k) = bs_monomial(Rat(1), -d[k] * cur.ram_t, 0, cur.trunc, cur.ram_q, cur.ram_t);
        twi.at(k, k) = bs_monomial(Rat(1), d[k] * cur.ram_t, 0, cur.trunc, cur.ram_q, cur.ram_t);
    }
    GaugeMatrix<BiQ> gt{tw, twi, GaugeTag::diagonal_twist};
    cur = gauge_transform(cur, gt);
    res.log.push(gt, "diagonal-twist");

    for (const auto& e : cur.a.d)
        if (!is_zero_mod_q(e))
            throw not_semisimple("matrix not trivial mod q after twist");

    res.conn = std::move(cur);
    return res;
}

ReductionState start_reduction(const Connection<BiQ>& c, long order_m) {
    for (const auto& e : c.a.d)
        if (!is_zero_mod_q(e))
            throw std::invalid_argument("reduction needs a connection trivial mod q");
    ReductionState st;
    long target = order_m * c.ram_q;
    st.current = c;
    st.current.trunc = trunc_min(c.trunc, target);
    st.current.a = mat_map(c.a, [&](const BiQ& x) { return clamp_trunc(x, target); });
    st.stage = 1;
    st.target = target;
    st.a0 = MatQS(c.n, c.n, qs_zero<Rat>(target, c.ram_q));
    return st;
}

void reduction_step(ReductionState& st) {
    Connection<BiQ>& c = st.current;
    const long j = st.stage;
    const int n = c.n;

    // split the q^j layer entrywise
    Matrix<BiQ> cm(n, n, connection_zero(c));
    bool any_nonconst = false;
    for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
            LaurentQ layer = q_layer(c.a.at(r, s), j);
            for (const auto& [te, v] : layer.terms) {
                if (te == 0) {
                    // t-constant: absorb into the constant part
                    st.a0.at(r, s) = st.a0.at(r, s) + qs_monomial(v, j, st.target, c.ram_q);
                } else {
                    // D(C) = B: divide the t^e coefficient by e/ram_t
                    Rat coeff = v * Rat(c.ram_t) / Rat(te);
                    BiQ mono = bs_monomial(coeff, te, j, st.current.trunc, c.ram_q, c.ram_t);
                    cm.at(r, s) = cm.at(r, s) + mono;
                    any_nonconst = true;
                }
            }
        }

    if (any_nonconst) {
        Matrix<BiQ> tmat = connection_identity(c) - cm;
        auto g = make_gauge(tmat, GaugeTag::unipotent_step, st.current.trunc);
        c = gauge_transform(c, g);
        // strip q^j C of its q-shift for the convergence trail
        Matrix<BiQ> cshift = mat_map(cm, [&](const BiQ& x) { return shift_q(x, -j); });
        st.c_stages.emplace_back(j, cshift);
        st.log.push(std::move(g), "stage-" + std::to_string(j));
    }
    st.stage = j + 1;
}

ReductionResult reduce_to_constant(const Connection<BiQ>& c, long order_m) {
    ReductionState st = start_reduction(c, order_m);
    while (st.stage < st.target) {
        long before = st.stage;
        reduction_step(st);
        // invariant: everything below the constant part now starts at q^(stage)
        for (int r = 0; r < st.current.n; ++r)
            for (int s = 0; s < st.current.n; ++s) {
                BiQ rem = st.current.a.at(r, s) - from_qseries(st.a0.at(r, s), st.current.ram_t);
                if (!rem.is_zero() && min_q_valuation(rem) <= before)
                    throw std::logic_error("reduction step did not raise the q-order");
            }
    }
    ReductionResult res;
    res.a0 = std::move(st.a0);
    res.log = std::move(st.log);
    res.final_conn = std::move(st.current);
    res.c_stages = std::move(st.c_stages);
    res.order_m = order_m;
    return res;
}

A0CheckReport check_constant_part_vanishes(const MatQS& a0, const std::vector<long long>& primes,
                                           long order_m) {
    A0CheckReport rep;
    rep.order_m = order_m;
    long ram_q = 1;
    for (const auto& e : a0.d) ram_q = std::max(ram_q, e.ram_q);
    long target = order_m * ram_q;

    // locate the smallest q-order witness, if any
    long best_order = target;
    int wr = -1, wc = -1;
    for (int r = 0; r < a0.rows; ++r)
        for (int c = 0; c < a0.cols; ++c) {
            const auto& e = a0.at(r, c);
            if (!e.is_zero() && e.valuation() < best_order) {
                best_order = e.valuation();
                wr = r;
                wc = c;
            }
            if (!e.is_zero() && e.valuation() < e.ram_q)
                throw std::invalid_argument("constant part must vanish mod q");
        }

    for (long long p : primes) {
        try {
            Matrix<QSeries<ModP>> ap(a0.rows, a0.cols);
            for (size_t i = 0; i < a0.d.size(); ++i)
                ap.d[i] = clamp_trunc(reduce_qseries_mod_p(a0.d[i], p), target);
            auto clamp_all = [&](Matrix<QSeries<ModP>>& m) {
                for (auto& e : m.d) e = clamp_trunc(e, target);
            };
            // nilpotency mod (p, q^M): valuation >= 1 per factor
            Matrix<QSeries<ModP>> pw = ap;
            for (long k = 1; k < order_m; ++k) {
                pw = pw * ap;
                clamp_all(pw);
            }
            for (const auto& e : pw.d)
                if (!e.is_zero())
                    throw std::logic_error("constant part not nilpotent at truncation");
            // psi_p of the constant connection: A0^p - A0
            Matrix<QSeries<ModP>> ppow = ap;
            for (long long k = 1; k < p; ++k) {
                ppow = ppow * ap;
                clamp_all(ppow);
                bool all_zero = true;
                for (const auto& e : ppow.d)
                    if (!e.is_zero()) all_zero = false;
                if (all_zero) break;
            }
            Matrix<QSeries<ModP>> psi = ppow - ap;
            clamp_all(psi);
            bool psi_zero = true;
            for (const auto& e : psi.d)
                if (!e.is_zero()) psi_zero = false;
            rep.primes_checked.push_back(p);
            rep.prime_notes.push_back(psi_zero ? "psi vanishes mod (p, q^M)"
                                               : "psi nonzero mod (p, q^M)");
        } catch (const bad_prime& e) {
            rep.prime_notes.push_back(std::string("bad prime: ") + e.what());
        }
    }

    if (wr >= 0) {
        std::ostringstream os;
        os << "constant part nonzero at q-order " << best_order << " (entry " << wr << "," << wc
           << ")";
        for (size_t i = 0; i < rep.prime_notes.size(); ++i) os << "; " << rep.prime_notes[i];
        throw nonzero_a0(best_order, wr, wc, os.str());
    }
    rep.zero_at_truncation = true;
    return rep;
}

ThreeCircleBound three_circle_bound(const Rat& val_at_inner, const Rat& alpha_inner,
                                    const Rat& val_at_unit) {
    if (alpha_inner <= 0) throw std::invalid_argument("inner radius exponent must be positive");
    return ThreeCircleBound{val_at_inner, alpha_inner, val_at_unit};
}

ReduceCertificate run_reduction_pipeline(const Connection<BiQ>& c, long order_m,
                                         const std::vector<long long>& check_primes) {
    ReduceCertificate cert;
    cert.order_m = order_m;
    try {
        TwistResult tw = diagonalize_and_twist(c);
        cert.pullback_m = tw.pullback_m;
        ReductionResult red = reduce_to_constant(tw.conn, order_m);
        for (const auto& e : red.log.entries) cert.stage_labels.push_back(e.label);

        bool integral = true;
        auto composite = red.log.composite(red.final_conn);
        for (const auto& x : composite.d)
            if (!is_q_integral(x)) integral = false;
        cert.gauge_q_integral = integral;

        std::string blob;
        for (const auto& x : composite.d) blob += biseries_str(x) + ";";
        for (const auto& e : tw.log.entries) blob += e.label + ",";
        cert.gauge_digest = fnv1a_hex(blob);
        cert.alpha_interval = {red.log.alpha_interval.first.get_str(),
                               red.log.alpha_interval.second.get_str()};

        check_constant_part_vanishes(red.a0, check_primes, order_m);
        cert.positive = true;
    } catch (const negative_certificate& e) {
        cert.positive = false;
        cert.negative_kind = e.kind;
        cert.detail = e.what();
    }
    return cert;
}

}  // namespace pcurv

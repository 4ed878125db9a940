#include "pcurv/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pcurv {

// ---- formal solutions ------------------------------------------------------

FormalSolution formal_solution(const std::vector<MatQS>& a_y, const Rat& base, int y_order,
                               long q_order, long ram_q) {
    if (a_y.empty()) throw std::invalid_argument("empty local matrix");
    const int n = a_y[0].rows;
    FormalSolution sol;
    sol.base = base;
    sol.y_order = y_order;
    sol.q_order = q_order;
    auto zero_qs = qs_zero<Rat>(q_order, ram_q);
    MatQS ident(n, n, zero_qs);
    for (int i = 0; i < n; ++i) ident.at(i, i) = qs_const(Rat(1), q_order, ram_q);
    sol.u.push_back(ident);
    for (int i = 0; i < y_order; ++i) {
        MatQS acc(n, n, zero_qs);
        for (int j = 0; j <= i && j < static_cast<int>(a_y.size()); ++j) {
            acc = acc + a_y[j] * sol.u[i - j];
        }
        MatQS next(n, n, zero_qs);
        for (size_t k = 0; k < acc.d.size(); ++k)
            next.d[k] = scale_frac(acc.d[k], -1, i + 1);
        sol.u.push_back(std::move(next));
    }
    return sol;
}

std::vector<MatQS> formal_defect(const std::vector<MatQS>& a_y, const FormalSolution& u) {
    const int n = u.u[0].rows;
    auto zero_qs = qs_zero<Rat>(u.q_order, u.u[0].at(0, 0).ram_q);
    std::vector<MatQS> w;
    for (int i = 0; i + 1 <= u.y_order; ++i) {
        MatQS acc(n, n, zero_qs);
        for (int j = 0; j <= i && j < static_cast<int>(a_y.size()); ++j)
            acc = acc + a_y[j] * u.u[i - j];
        MatQS der(n, n, zero_qs);
        for (size_t k = 0; k < der.d.size(); ++k)
            der.d[k] = scale_frac(u.u[i + 1].d[k], i + 1, 1);
        w.push_back(der + acc);
    }
    return w;
}

// ---- numeric specialization --------------------------------------------------

// z^k for integer k by binary exponentiation (no branch-cut surprises)
static cx cpow_int(cx z, long k) {
    if (k == 0) return cx(1.0, 0.0);
    bool neg = k < 0;
    unsigned long e = neg ? -static_cast<unsigned long>(k) : static_cast<unsigned long>(k);
    cx acc(1.0, 0.0);
    cx base = z;
    while (e) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return neg ? cx(1.0, 0.0) / acc : acc;
}

NumericConnection specialize(const Connection<LaurentQ>& c) {
    NumericConnection nc;
    nc.n = c.n;
    nc.der = c.der;
    nc.entries.resize(static_cast<size_t>(c.n) * c.n);
    bool any_negative = false;
    for (size_t i = 0; i < c.a.d.size(); ++i) {
        const auto& e = c.a.d[i];
        for (const auto& [te, v] : e.terms) {
            if (te % e.ram_t != 0)
                throw std::invalid_argument("fractional t-exponents are multivalued");
            long k = te / e.ram_t;
            if (k < 0) any_negative = true;
            nc.entries[i][k] += v.get_d();
        }
    }
    bool all_zero = true;
    for (const auto& m : nc.entries)
        if (!m.empty()) all_zero = false;
    nc.singular_at_origin = !all_zero && (c.der == Derivation::t_ddt || any_negative);
    return nc;
}

cx eval_qseries(const QSeries<Rat>& s, cx q0) {
    cx acc = 0.0;
    for (size_t i = 0; i < s.c.size(); ++i) {
        long e = s.lo + static_cast<long>(i);
        cx p;
        if (e % s.ram_q == 0)
            p = cpow_int(q0, e / s.ram_q);
        else
            p = std::pow(q0, cx(static_cast<double>(e) / static_cast<double>(s.ram_q), 0.0));
        acc += s.c[i].get_d() * p;
    }
    return acc;
}

NumericConnection specialize(const Connection<BiQ>& c, cx q0) {
    NumericConnection nc;
    nc.n = c.n;
    nc.der = c.der;
    nc.entries.resize(static_cast<size_t>(c.n) * c.n);
    bool any_negative = false;
    for (size_t i = 0; i < c.a.d.size(); ++i) {
        const auto& e = c.a.d[i];
        for (const auto& [te, qs] : e.terms) {
            if (te % e.ram_t != 0)
                throw std::invalid_argument("fractional t-exponents are multivalued");
            long k = te / e.ram_t;
            if (k < 0) any_negative = true;
            cx val = eval_qseries(qs, q0);
            if (val != 0.0) nc.entries[i][k] += val;
        }
    }
    bool all_zero = true;
    for (const auto& m : nc.entries)
        if (!m.empty()) all_zero = false;
    nc.singular_at_origin = !all_zero && (c.der == Derivation::t_ddt || any_negative);
    return nc;
}

MatC mat_identity_c(int n) {
    MatC m(n, n, cx(0.0, 0.0));
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

double max_abs_diff(const MatC& a, const MatC& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.d.size(); ++i) m = std::max(m, std::abs(a.d[i] - b.d[i]));
    return m;
}

static double max_abs(const MatC& a) {
    double m = 0.0;
    for (const auto& x : a.d) m = std::max(m, std::abs(x));
    return m;
}

// ---- Taylor recentering -----------------------------------------------------

namespace {

// local series x' = M(y) x at z0: M_j = -coeff_j(A(z0+y)) [ / (z0+y) for t d/dt ]
struct LocalSeries {
    const NumericConnection* c;
    cx z0;
    std::vector<MatC> m;  // computed on demand

    // y-expansion coefficient j of entry (r,s) of A(z0+y)
    cx entry_coeff(int r, int s, int j) const {
        cx acc = 0.0;
        for (const auto& [k, v] : c->at(r, s)) {
            // generalized binomial: coeff of y^j in (z0+y)^k
            if (k >= 0 && j > k) continue;
            double binom = 1.0;
            for (long i = 0; i < j; ++i) binom *= static_cast<double>(k - i) / (i + 1);
            acc += v * binom * cpow_int(z0, k - j);
        }
        return acc;
    }

    void extend(int upto) {
        int n = c->n;
        while (static_cast<int>(m.size()) <= upto) {
            int j = static_cast<int>(m.size());
            MatC mj(n, n, cx(0.0, 0.0));
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) mj.at(r, s) = entry_coeff(r, s, j);
            m.push_back(std::move(mj));
        }
    }
};

}  // namespace

// One recentering hop: fundamental matrix of x' = -A/t x (or -A x) from z0
// to z0 + dy, as U(dy) with U(0) = I.
static MatC hop(const NumericConnection& c, cx z0, cx dy, const ContinuationOptions& opt) {
    const int n = c.n;
    LocalSeries ls{&c, z0, {}};

    // series of the ODE right-hand side matrix: R_j
    std::vector<MatC> rhs;
    std::vector<cx> invpow;  // (-1)^i / z0^(i+1)
    auto rhs_extend = [&](int upto) {
        ls.extend(upto);
        while (static_cast<int>(rhs.size()) <= upto) {
            int j = static_cast<int>(rhs.size());
            MatC rj(n, n, cx(0.0, 0.0));
            if (c.der == Derivation::t_ddt) {
                // -A(z0+y)/(z0+y): convolution with (-1)^i / z0^(i+1)
                if (invpow.empty()) invpow.push_back(1.0 / z0);
                while (static_cast<int>(invpow.size()) <= j)
                    invpow.push_back(-invpow.back() / z0);
                for (int i = 0; i <= j; ++i) {
                    for (size_t k = 0; k < rj.d.size(); ++k)
                        rj.d[k] += ls.m[j - i].d[k] * invpow[i];
                }
            } else {
                rj = ls.m[j];
            }
            for (auto& x : rj.d) x = -x;
            rhs.push_back(std::move(rj));
        }
    };

    MatC u = mat_identity_c(n);
    MatC total = u;
    std::vector<MatC> us{u};
    cx ypow = 1.0;
    double head = std::max(1.0, max_abs(u));
    for (int i = 0; i < opt.max_terms; ++i) {
        rhs_extend(i);
        MatC acc(n, n, cx(0.0, 0.0));
        for (int j = 0; j <= i; ++j) {
            MatC prod = rhs[j] * us[i - j];
            for (size_t k = 0; k < acc.d.size(); ++k) acc.d[k] += prod.d[k];
        }
        for (auto& x : acc.d) x /= static_cast<double>(i + 1);
        us.push_back(acc);
        ypow *= dy;
        MatC term = acc;
        for (auto& x : term.d) x *= ypow;
        for (size_t k = 0; k < total.d.size(); ++k) total.d[k] += term.d[k];
        double tail = max_abs(term);
        head = std::max(head, max_abs(total));
        if (tail <= opt.tail_tol * head && i >= 4) return total;
    }
    throw no_convergence("Taylor hop did not converge within " + std::to_string(opt.max_terms) +
                         " terms");
}

MatC continue_solution(const NumericConnection& c, const std::vector<cx>& path,
                       const ContinuationOptions& opt) {
    if (path.size() < 2) return mat_identity_c(c.n);
    MatC f = mat_identity_c(c.n);
    if (!c.singular_at_origin) {
        // entire coefficients: still hop, but without the distance-to-origin
        // step limit
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            cx z0 = path[i], z1 = path[i + 1];
            int pieces = 1 + static_cast<int>(std::abs(z1 - z0) / 0.5);
            cx step = (z1 - z0) / static_cast<double>(pieces);
            for (int k = 0; k < pieces; ++k) f = hop(c, z0 + step * static_cast<double>(k), step, opt) * f;
        }
        return f;
    }
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        cx z0 = path[i];
        const cx z1 = path[i + 1];
        if (std::abs(z0) <= opt.clearance || std::abs(z1) <= opt.clearance)
            throw singularity_too_close("path node within clearance of the singular point 0");
        if (std::abs(z1 - z0) == 0.0) continue;
        while (true) {
            double dist = std::abs(z0);
            if (dist <= opt.clearance)
                throw singularity_too_close("path passes within clearance of 0");
            double max_step = opt.step_fraction * dist;
            cx delta = z1 - z0;
            bool last = std::abs(delta) <= max_step;
            if (!last) delta *= max_step / std::abs(delta);
            f = hop(c, z0, delta, opt) * f;
            if (last) break;
            z0 += delta;
        }
    }
    return f;
}

std::vector<cx> loop_path(const LoopSpec& loop) {
    int n = std::max(loop.samples, 8);
    std::vector<cx> path;
    path.reserve(n + 1);
    const double sign = loop.counterclockwise ? 1.0 : -1.0;
    for (int k = 0; k <= n; ++k) {
        double th = sign * 2.0 * std::numbers::pi * k / n;
        path.push_back(loop.center + loop.radius * cx(std::cos(th), std::sin(th)));
    }
    path.back() = path.front();
    return path;
}

// ---- eigenvalues (small matrices) -------------------------------------------

std::vector<cx> eigenvalues(const MatC& m) {
    const int n = m.rows;
    // Faddeev-LeVerrier characteristic coefficients over C
    std::vector<cx> c(n);
    MatC mk = m;
    for (int k = 1; k <= n; ++k) {
        cx tr = 0.0;
        for (int i = 0; i < n; ++i) tr += mk.at(i, i);
        c[k - 1] = -tr / static_cast<double>(k);
        if (k == n) break;
        MatC shifted = mk;
        for (int i = 0; i < n; ++i) shifted.at(i, i) += c[k - 1];
        mk = m * shifted;
    }
    // Durand-Kerner on z^n + c0 z^(n-1) + ... + c_{n-1}
    auto eval = [&](cx z) {
        cx v = 1.0;
        for (int i = 0; i < n; ++i) v = v * z + c[i];
        return v;
    };
    std::vector<cx> roots(n);
    cx seed(0.4, 0.9);
    cx acc = 1.0;
    for (int i = 0; i < n; ++i) {
        acc *= seed;
        roots[i] = acc;
    }
    for (int iter = 0; iter < 200; ++iter) {
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
            cx denom = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            cx delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-14) break;
    }
    return roots;
}

std::vector<EigenDiag> eigen_diagnostics(const MatC& m, long k_max) {
    std::vector<EigenDiag> out;
    for (cx l : eigenvalues(m)) {
        EigenDiag d;
        d.lambda = l;
        d.abs_deviation = std::abs(l) - 1.0;
        double angle = std::arg(l) / (2.0 * std::numbers::pi);
        if (angle < 0) angle += 1.0;
        double best = 2.0;
        for (long den = 1; den <= std::max<long>(k_max, 1); ++den) {
            long num = std::lround(angle * den);
            double err = std::abs(angle - static_cast<double>(num) / den);
            if (err < best - 1e-15) {
                best = err;
                d.angle_num = num;
                d.angle_den = den;
                d.angle_error = err;
            }
        }
        out.push_back(d);
    }
    return out;
}

std::optional<long> finite_order(const MatC& m, long k_max, double tol) {
    MatC p = m;
    MatC ident = mat_identity_c(m.rows);
    for (long k = 1; k <= k_max; ++k) {
        if (max_abs_diff(p, ident) <= tol) return k;
        p = p * m;
    }
    return std::nullopt;
}

MonodromyResult monodromy_of_annulus(const NumericConnection& c, const LoopSpec& loop, long k_max,
                                     double tol, const ContinuationOptions& opt) {
    ContinuationOptions o = opt;
    o.clearance = std::min(o.clearance, loop.clearance);
    LoopSpec first = loop;
    MatC m1 = continue_solution(c, loop_path(first), o);
    LoopSpec second = loop;
    second.samples = loop.samples * 2 + 3;
    MatC m2 = continue_solution(c, loop_path(second), o);
    MonodromyResult res;
    res.m = m1;
    res.residual = max_abs_diff(m1, m2);
    res.order_tolerance = tol;
    res.order = finite_order(m1, k_max, tol);
    res.eigen = eigen_diagnostics(m1, k_max);
    return res;
}

// ---- family fan-out ----------------------------------------------------------

std::vector<MonodromyResult> family_monodromies_serial(const Connection<BiQ>& family,
                                                       const std::vector<double>& q_samples,
                                                       const LoopSpec& loop, long k_max,
                                                       double tol,
                                                       const ContinuationOptions& opt) {
    std::vector<MonodromyResult> out(q_samples.size());
    for (size_t i = 0; i < q_samples.size(); ++i) {
        auto nc = specialize(family, cx(q_samples[i], 0.0));
        out[i] = monodromy_of_annulus(nc, loop, k_max, tol, opt);
    }
    return out;
}

std::vector<MonodromyResult> family_monodromies(const Connection<BiQ>& family,
                                                const std::vector<double>& q_samples,
                                                const LoopSpec& loop, long k_max, double tol,
                                                const ContinuationOptions& opt) {
    std::vector<MonodromyResult> out(q_samples.size());
    std::vector<std::exception_ptr> errs(q_samples.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t i = 0; i < q_samples.size(); ++i) {
        try {
            auto nc = specialize(family, cx(q_samples[i], 0.0));
            out[i] = monodromy_of_annulus(nc, loop, k_max, tol, opt);
        } catch (...) {
            errs[i] = std::current_exception();
        }
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

CongruenceReport family_congruence_check(const Connection<BiQ>& c1, const Connection<BiQ>& c2,
                                         const std::vector<double>& q_samples, long order_m,
                                         double slope_tolerance, const LoopSpec& loop,
                                         const ContinuationOptions& opt, bool parallel) {
    CongruenceReport rep;
    rep.order_m = order_m;
    // symbolic congruence of the matrices
    rep.symbolic_ok = true;
    for (int r = 0; r < c1.n; ++r)
        for (int s = 0; s < c1.n; ++s) {
            BiQ diff = c1.a.at(r, s) - c2.a.at(r, s);
            if (diff.is_zero()) continue;
            Rat v = rat(min_q_valuation(diff), diff.ram_q);
            if (v < Rat(order_m)) rep.symbolic_ok = false;
        }

    std::vector<MatC> m1(q_samples.size()), m2(q_samples.size());
    std::vector<std::exception_ptr> errs(q_samples.size());
    auto run_one = [&](size_t i) {
        try {
            cx q0(q_samples[i], 0.0);
            ContinuationOptions o = opt;
            o.clearance = std::min(o.clearance, loop.clearance);
            m1[i] = continue_solution(specialize(c1, q0), loop_path(loop), o);
            m2[i] = continue_solution(specialize(c2, q0), loop_path(loop), o);
        } catch (...) {
            errs[i] = std::current_exception();
        }
    };
    if (parallel) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
        for (size_t i = 0; i < q_samples.size(); ++i) run_one(i);
    } else {
        for (size_t i = 0; i < q_samples.size(); ++i) run_one(i);
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    const double floor_eps = 1e-13;
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < q_samples.size(); ++i) {
        double delta = max_abs_diff(m1[i], m2[i]);
        rep.samples.push_back({q_samples[i], delta});
        if (delta > floor_eps) pts.emplace_back(std::log(q_samples[i]), std::log(delta));
    }
    if (pts.empty()) {
        rep.all_tiny = true;
        rep.slope_ok = true;
        rep.slope = std::numeric_limits<double>::infinity();
        return rep;
    }
    // least squares slope
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double k = pts.size();
    rep.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    rep.slope_ok = rep.slope >= static_cast<double>(order_m) - slope_tolerance;
    return rep;
}

PropagationReport order_propagation_check(const Connection<BiQ>& family,
                                          const std::vector<double>& q_samples, long k_max,
                                          double tol, const LoopSpec& loop,
                                          const ContinuationOptions& opt, bool parallel) {
    PropagationReport rep;
    auto results = parallel ? family_monodromies(family, q_samples, loop, k_max, tol, opt)
                            : family_monodromies_serial(family, q_samples, loop, k_max, tol, opt);
    for (size_t i = 0; i < results.size(); ++i)
        rep.samples.push_back({q_samples[i], results[i].order, results[i].residual});
    std::optional<long> detected;
    for (const auto& s : rep.samples)
        if (s.order) {
            detected = s.order;
            break;
        }
    if (!detected) {
        rep.status = PropagationStatus::no_order_detected;
        return rep;
    }
    rep.order = detected;
    rep.status = PropagationStatus::consistent;
    for (const auto& s : rep.samples) {
        if (!s.order || *s.order != *detected) {
            rep.status = PropagationStatus::order_jump;
            rep.witnesses.push_back(s.q);
        }
    }
    return rep;
}

MatC eval_formal(const FormalSolution& u, cx y, cx q0) {
    const int n = u.u[0].rows;
    MatC acc(n, n, cx(0.0, 0.0));
    cx ypow = 1.0;
    for (const auto& mi : u.u) {
        for (size_t k = 0; k < acc.d.size(); ++k) acc.d[k] += eval_qseries(mi.d[k], q0) * ypow;
        ypow *= y;
    }
    return acc;
}

}  // namespace pcurv

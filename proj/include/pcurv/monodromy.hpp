#ifndef PCURV_MONODROMY_HPP
#define PCURV_MONODROMY_HPP

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcurv/connection.hpp"
#include "pcurv/qlinalg.hpp"

namespace pcurv {

struct singularity_too_close : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct no_convergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using MatQS = Matrix<QSeries<Rat>>;

// ---- formal solutions ------------------------------------------------------

// U(y, q) = sum U_i y^i with U_0 = I and nabla(d/dy)(U e) = 0; columns of U
// solve x' = -A_y x in the local coordinate y at the base point.
struct FormalSolution {
    std::vector<MatQS> u;  // u[i] is the y^i coefficient matrix
    Rat base;
    int y_order = 0;       // largest y power computed
    long q_order = 0;      // stored q-exponent bound
};

// local series of the connection matrix at t = base (+ the 1/t factor for
// the t d/dt derivation); index = y power
template <class R>
std::vector<MatQS> local_matrix(const Connection<R>& c, const Rat& base, int y_order);

FormalSolution formal_solution(const std::vector<MatQS>& a_y, const Rat& base, int y_order,
                               long q_order, long ram_q);

template <class R>
FormalSolution formal_solution_at(const Connection<R>& c, const Rat& base, int y_order,
                                  long q_order);

// defect matrices W_i = (i+1) U_{i+1} + sum_j A_j U_{i-j} for i < y_order;
// all zero iff U solves the system through y^(y_order - 1)
std::vector<MatQS> formal_defect(const std::vector<MatQS>& a_y, const FormalSolution& u);

// ---- numeric continuation --------------------------------------------------

using cx = std::complex<double>;
using MatC = Matrix<cx>;

// connection specialized to numeric coefficients (Laurent polynomials in t)
struct NumericConnection {
    int n = 0;
    Derivation der = Derivation::t_ddt;
    std::vector<std::map<long, cx>> entries;  // row-major
    bool singular_at_origin = true;           // 0 in the singular set

    const std::map<long, cx>& at(int r, int c) const {
        return entries[static_cast<size_t>(r) * n + c];
    }
};

NumericConnection specialize(const Connection<LaurentQ>& c);
NumericConnection specialize(const Connection<BiQ>& c, cx q0);

struct ContinuationOptions {
    double step_fraction = 1.0 / 3;
    double tail_tol = 1e-16;
    int max_terms = 768;
    double clearance = 1e-8;
};

// Fundamental matrix transported along the polyline by Taylor recentering;
// each hop evaluates the local series solution.
MatC continue_solution(const NumericConnection& c, const std::vector<cx>& path,
                       const ContinuationOptions& opt = {});

struct LoopSpec {
    cx center{0.0, 0.0};
    double radius = 1.0;
    int samples = 24;
    bool counterclockwise = true;
    double clearance = 1e-8;
};

std::vector<cx> loop_path(const LoopSpec& loop);

struct EigenDiag {
    cx lambda;
    double abs_deviation = 0.0;       // |lambda| - 1
    long angle_num = 0, angle_den = 1;  // nearest rational angle
    double angle_error = 0.0;
};

struct MonodromyResult {
    MatC m;
    double residual = 0.0;         // defect between two independent samplings
    std::optional<long> order;
    double order_tolerance = 0.0;
    std::vector<EigenDiag> eigen;
};

MonodromyResult monodromy_of_annulus(const NumericConnection& c, const LoopSpec& loop,
                                     long k_max = 24, double tol = 1e-6,
                                     const ContinuationOptions& opt = {});

// smallest k <= k_max with max|M^k - I| <= tol
std::optional<long> finite_order(const MatC& m, long k_max, double tol);

std::vector<cx> eigenvalues(const MatC& m);
std::vector<EigenDiag> eigen_diagnostics(const MatC& m, long k_max);

double max_abs_diff(const MatC& a, const MatC& b);
MatC mat_identity_c(int n);

// ---- family checks ---------------------------------------------------------

struct CongruenceSample {
    double q = 0.0;
    double delta = 0.0;  // max|M1 - M2|
};

struct CongruenceReport {
    long order_m = 0;            // claimed congruence order
    bool symbolic_ok = false;    // conn1 - conn2 vanishes mod q^m
    std::vector<CongruenceSample> samples;
    bool all_tiny = false;       // every delta below the noise floor
    double slope = 0.0;          // fitted d log(delta) / d log(q)
    bool slope_ok = false;
};

CongruenceReport family_congruence_check(const Connection<BiQ>& c1, const Connection<BiQ>& c2,
                                         const std::vector<double>& q_samples, long order_m,
                                         double slope_tolerance, const LoopSpec& loop,
                                         const ContinuationOptions& opt = {},
                                         bool parallel = true);

enum class PropagationStatus { consistent, order_jump, no_order_detected };

struct PropagationSample {
    double q = 0.0;
    std::optional<long> order;
    double residual = 0.0;
};

struct PropagationReport {
    PropagationStatus status = PropagationStatus::no_order_detected;
    std::optional<long> order;
    std::vector<PropagationSample> samples;
    std::vector<double> witnesses;  // q values breaking the common order
};

// Detect a finite order at one sample and require it at every other sample.
PropagationReport order_propagation_check(const Connection<BiQ>& family,
                                          const std::vector<double>& q_samples, long k_max,
                                          double tol, const LoopSpec& loop,
                                          const ContinuationOptions& opt = {},
                                          bool parallel = true);

// serial reference for the per-sample monodromy fan-out
std::vector<MonodromyResult> family_monodromies_serial(const Connection<BiQ>& family,
                                                       const std::vector<double>& q_samples,
                                                       const LoopSpec& loop, long k_max,
                                                       double tol,
                                                       const ContinuationOptions& opt = {});

// OpenMP lane; must agree with the serial reference
std::vector<MonodromyResult> family_monodromies(const Connection<BiQ>& family,
                                                const std::vector<double>& q_samples,
                                                const LoopSpec& loop, long k_max, double tol,
                                                const ContinuationOptions& opt = {});

// numeric evaluation helpers (tests compare formal and continued solutions)
cx eval_qseries(const QSeries<Rat>& s, cx q0);
MatC eval_formal(const FormalSolution& u, cx y, cx q0);

// ---- template implementations ----------------------------------------------

namespace detail {

inline Rat gen_binom(long e, long j) {
    Rat acc(1);
    for (long i = 0; i < j; ++i) acc *= Rat(e - i);
    for (long i = 1; i <= j; ++i) acc /= Rat(i);
    return acc;
}

// y-expansion of one ring element at t = base + y
template <class R>
std::vector<QSeries<Rat>> expand_entry_at(const R& entry, const Rat& base, int y_order, long q_tr,
                                          long ram_q) {
    auto zero_qs = qs_zero<Rat>(q_tr, ram_q);
    std::vector<QSeries<Rat>> exp_y(static_cast<size_t>(y_order) + 1, zero_qs);
    auto add_term = [&](long e, const QSeries<Rat>& qcoef) {
        for (long j = 0; j <= y_order; ++j) {
            if (e >= 0 && j > e) break;
            Rat factor = gen_binom(e, j) * pow_rat(base, e - j);
            if (is_zero(factor)) continue;
            exp_y[j] = exp_y[j] + qcoef * factor;
        }
    };
    if constexpr (is_biseries_ring<R>) {
        for (const auto& [e, qs] : entry.terms) add_term(e, qs);
    } else {
        for (const auto& [e, v] : entry.terms) add_term(e, qs_const(v, q_tr, ram_q));
    }
    return exp_y;
}

}  // namespace detail

// entrywise y-expansion of a matrix at t = base + y (no derivation factor)
template <class R>
std::vector<MatQS> expand_matrix_at(const Matrix<R>& m, const Rat& base, int y_order, long q_tr,
                                    long ram_q) {
    const int rows = m.rows, cols = m.cols;
    auto zero_qs = qs_zero<Rat>(q_tr, ram_q);
    std::vector<MatQS> out(static_cast<size_t>(y_order) + 1, MatQS(rows, cols, zero_qs));
    for (int r = 0; r < rows; ++r)
        for (int s = 0; s < cols; ++s) {
            if (m.at(r, s).ram_t != 1)
                throw std::invalid_argument("local expansion needs integer t-exponents");
            auto e = detail::expand_entry_at(m.at(r, s), base, y_order, q_tr, ram_q);
            for (int j = 0; j <= y_order; ++j) out[j].at(r, s) = e[j];
        }
    return out;
}

template <class R>
std::vector<MatQS> local_matrix(const Connection<R>& c, const Rat& base, int y_order) {
    if (c.ram_t != 1)
        throw std::invalid_argument("local expansion needs integer t-exponents");
    if (is_zero(base)) throw std::invalid_argument("base point must avoid the origin");
    const int n = c.n;
    long q_tr = trunc_min(c.trunc, kExactOrder);
    auto zero_qs = qs_zero<Rat>(q_tr, c.ram_q);
    std::vector<MatQS> a_y(static_cast<size_t>(y_order) + 1, MatQS(n, n, zero_qs));

    // 1/(base+y) as a y-polynomial, for the t d/dt derivation
    std::vector<Rat> inv_series(static_cast<size_t>(y_order) + 1);
    {
        Rat binv = Rat(1) / base;
        Rat acc = binv;
        for (int j = 0; j <= y_order; ++j) {
            inv_series[j] = acc * (j % 2 == 0 ? Rat(1) : Rat(-1));
            acc *= binv;
        }
    }

    for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
            auto exp_y = detail::expand_entry_at(c.a.at(r, s), base, y_order, q_tr, c.ram_q);
            std::vector<QSeries<Rat>> final_y(static_cast<size_t>(y_order) + 1, zero_qs);
            if (c.der == Derivation::t_ddt) {
                // A(base+y) / (base+y)
                for (int i = 0; i <= y_order; ++i) {
                    if (exp_y[i].is_zero()) continue;
                    for (int j = 0; i + j <= y_order; ++j)
                        final_y[i + j] = final_y[i + j] + exp_y[i] * inv_series[j];
                }
            } else {
                final_y = std::move(exp_y);
            }
            for (int j = 0; j <= y_order; ++j) a_y[j].at(r, s) = final_y[j];
        }
    return a_y;
}

template <class R>
FormalSolution formal_solution_at(const Connection<R>& c, const Rat& base, int y_order,
                                  long q_order) {
    long q_tr = trunc_min(c.trunc, q_order * c.ram_q);
    auto a_y = local_matrix(c, base, y_order);
    for (auto& m : a_y)
        for (auto& e : m.d) e = clamp_trunc(e, q_tr);
    return formal_solution(a_y, base, y_order, q_tr, c.ram_q);
}

}  // namespace pcurv

#endif

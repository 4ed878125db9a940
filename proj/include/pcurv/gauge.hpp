#ifndef PCURV_GAUGE_HPP
#define PCURV_GAUGE_HPP

#include <string>
#include <utility>
#include <vector>

#include "pcurv/connection.hpp"
#include "pcurv/growth.hpp"
#include "pcurv/qlinalg.hpp"

namespace pcurv {

// Definitive negative certificates of the reduction pipeline.
struct negative_certificate : std::runtime_error {
    std::string kind;
    negative_certificate(std::string k, const std::string& what)
        : std::runtime_error(what), kind(std::move(k)) {}
};

struct katz_check_failed : negative_certificate {
    explicit katz_check_failed(const std::string& w) : negative_certificate("KatzCheckFailed", w) {}
};
struct not_semisimple : negative_certificate {
    explicit not_semisimple(const std::string& w) : negative_certificate("NotSemisimple", w) {}
};
struct irrational_eigenvalues : negative_certificate {
    explicit irrational_eigenvalues(const std::string& w)
        : negative_certificate("IrrationalEigenvalues", w) {}
};
struct nonzero_a0 : negative_certificate {
    long witness_q_order;
    int witness_row, witness_col;
    nonzero_a0(long q_order, int r, int c, const std::string& w)
        : negative_certificate("NonzeroA0", w),
          witness_q_order(q_order),
          witness_row(r),
          witness_col(c) {}
};

using MatQS = Matrix<QSeries<Rat>>;

// The matrix modulo q, required to be constant in t; the desk-scale shadow
// of regular singularities at 0 and infinity.
MatQ mod_q_constant_matrix(const Connection<BiQ>& c);

struct EigenSplit {
    std::vector<std::pair<Rat, int>> eigenvalues;  // (value, multiplicity)
};

// rational + semisimple or a negative certificate
EigenSplit rational_semisimple_split(const MatQ& a0bar);

// pull back along t -> s^m: entries multiplied by m, t-exponents multiplied
// by m (the derivation rescales by 1/m)
Connection<BiQ> pullback_t(const Connection<BiQ>& c, long m);

struct TwistResult {
    Connection<BiQ> conn;       // trivial mod q
    GaugeLog<BiQ> log;          // eigenbasis then diagonal twist
    long pullback_m = 1;        // denominator-clearing pullback applied
    std::vector<Rat> eigenvalues_after_pullback;
};

// Eigenbasis change followed by diag(t^-d_k): makes the matrix vanish mod q
// or produces a negative certificate.
TwistResult diagonalize_and_twist(const Connection<BiQ>& c);

struct ReductionState {
    Connection<BiQ> current;
    long stage = 1;              // next stored q-exponent to clear
    MatQS a0;                    // accumulated constant part
    GaugeLog<BiQ> log;
    long target = 0;             // stored-exponent bound (M * ram_q)
    std::vector<std::pair<long, Matrix<BiQ>>> c_stages;  // (stage, C_m) trail
};

ReductionState start_reduction(const Connection<BiQ>& c, long order_m);

// One inductive step: split the q^stage layer into its t-constant part
// (absorbed into a0) and the rest B, solve D(C) = B coefficient-wise, gauge
// by I - q^stage C.
void reduction_step(ReductionState& st);

struct ReductionResult {
    MatQS a0;
    GaugeLog<BiQ> log;
    Connection<BiQ> final_conn;
    std::vector<std::pair<long, Matrix<BiQ>>> c_stages;
    long order_m = 0;   // true q-order of the certificate
};

// Iterate reduction_step up to q^M; input must vanish mod q.
ReductionResult reduce_to_constant(const Connection<BiQ>& c, long order_m);

struct A0CheckReport {
    bool zero_at_truncation = false;
    long order_m = 0;
    std::vector<long long> primes_checked;
    std::vector<std::string> prime_notes;  // psi_p evidence per prime
};

// For each good p: A0 is nilpotent mod (p, q^M) and psi_p = A0^p - A0 forces
// A0 = 0 there.  Verdict "zero at truncation" iff A0 vanishes mod q^M over
// the rationals; otherwise throws nonzero_a0 with the smallest q-order
// witness.
A0CheckReport check_constant_part_vanishes(const MatQS& a0, const std::vector<long long>& primes,
                                           long order_m);

// Piecewise-linear valuation bound interpolating measured values at
// |t| = |q|^alpha_inner and |t| = 1.
struct ThreeCircleBound {
    Rat val_at_inner;
    Rat alpha_inner;
    Rat val_at_unit;

    Rat bound(const Rat& alpha) const {
        return val_at_unit + (alpha / alpha_inner) * (val_at_inner - val_at_unit);
    }
    // slope c_eps: growth of the bound per unit of alpha
    Rat slope() const { return (val_at_inner - val_at_unit) / alpha_inner; }
};

ThreeCircleBound three_circle_bound(const Rat& val_at_inner, const Rat& alpha_inner,
                                    const Rat& val_at_unit);

// ---- full pipeline (library surface of the reduce command) -----------------

struct ReduceCertificate {
    bool positive = false;
    std::string negative_kind;
    std::string detail;
    long order_m = 0;
    long pullback_m = 1;
    std::pair<std::string, std::string> alpha_interval{"0", "0"};
    bool gauge_q_integral = false;
    std::string gauge_digest;
    std::vector<std::string> stage_labels;
};

ReduceCertificate run_reduction_pipeline(const Connection<BiQ>& c, long order_m,
                                         const std::vector<long long>& check_primes);

}  // namespace pcurv

#endif

#ifndef PCURV_MODP_HPP
#define PCURV_MODP_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pcurv/rational.hpp"

namespace pcurv {

// Signals a prime that cannot be used (denominator clash, ramification
// clash).  Sweeps record it as data; everything else treats it as an error.
struct bad_prime : std::runtime_error {
    long p;
    bad_prime(long p_, const std::string& what)
        : std::runtime_error("bad prime " + std::to_string(p_) + ": " + what), p(p_) {}
};

// Residue in F_p.  p == 0 marks a context-free zero: series code needs an
// additive identity before any modulus is known, and 0 is the same in all
// F_p.  Arithmetic fills the modulus in from the other operand.
struct ModP {
    long long r = 0;
    long long p = 0;

    ModP() = default;
    ModP(long long value, long long prime) : p(prime) {
        if (prime <= 0) throw std::invalid_argument("ModP needs a positive modulus");
        r = value % prime;
        if (r < 0) r += prime;
    }

    friend bool operator==(const ModP& a, const ModP& b) {
        if (a.p != 0 && b.p != 0 && a.p != b.p)
            throw std::logic_error("mixed moduli in ModP comparison");
        return a.r == b.r;
    }
};

namespace detail {
inline long long common_mod(const ModP& a, const ModP& b) {
    if (a.p == 0) return b.p;
    if (b.p == 0) return a.p;
    if (a.p != b.p) throw std::logic_error("mixed moduli in ModP arithmetic");
    return a.p;
}
}  // namespace detail

inline ModP operator+(const ModP& a, const ModP& b) {
    long long m = detail::common_mod(a, b);
    if (m == 0) return ModP();
    return ModP(a.r + b.r, m);
}

inline ModP operator-(const ModP& a, const ModP& b) {
    long long m = detail::common_mod(a, b);
    if (m == 0) return ModP();
    return ModP(a.r - b.r, m);
}

inline ModP operator-(const ModP& a) {
    if (a.p == 0) return a;
    return ModP(-a.r, a.p);
}

inline ModP operator*(const ModP& a, const ModP& b) {
    long long m = detail::common_mod(a, b);
    if (m == 0) return ModP();
    return ModP(a.r * b.r, m);
}

inline ModP pow_modp(ModP base, long long e) {
    if (base.p == 0) return base;
    ModP acc(1, base.p);
    while (e > 0) {
        if (e & 1) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

inline ModP inverse(const ModP& a) {
    if (a.p == 0 || a.r == 0) throw std::domain_error("inverse of zero in F_p");
    long long t = 0, new_t = 1, rr = a.p, new_r = a.r;
    while (new_r != 0) {
        long long q = rr / new_r;
        long long tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = rr - q * new_r;
        rr = new_r;
        new_r = tmp;
    }
    if (rr != 1) throw std::domain_error("non-invertible residue");
    return ModP(t, a.p);
}

// Reduce an exact rational mod p; throws bad_prime when p divides the
// denominator.
inline ModP reduce_mod_p(const Rat& x, long long p) {
    mpz_class num = x.get_num(), den = x.get_den();
    mpz_class pz(static_cast<long>(p));
    if (mpz_divisible_p(den.get_mpz_t(), pz.get_mpz_t()))
        throw bad_prime(static_cast<long>(p), "denominator of " + x.get_str() + " divisible by p");
    mpz_class nr = num % pz, dr = den % pz;
    long long n = nr.get_si(), d = dr.get_si();
    return ModP(n, p) * inverse(ModP(d, p));
}

// ---- scalar trait surface -------------------------------------------------

inline bool scalar_is_zero(const ModP& x) { return x.r == 0; }
inline ModP scalar_zero(const ModP& like) { return like.p == 0 ? ModP() : ModP(0, like.p); }
inline ModP scalar_one(const ModP& like) {
    if (like.p == 0) throw std::logic_error("scalar_one needs a modulus");
    return ModP(1, like.p);
}
inline ModP scalar_frac(const ModP& like, long num, long den) {
    if (like.p == 0) throw std::logic_error("scalar_frac needs a modulus");
    if (den % like.p == 0) throw bad_prime(static_cast<long>(like.p), "fraction denominator divisible by p");
    return ModP(num, like.p) * inverse(ModP(den, like.p));
}
inline std::string scalar_str(const ModP& x) { return std::to_string(x.r); }

}  // namespace pcurv

#endif

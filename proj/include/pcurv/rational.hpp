#ifndef PCURV_RATIONAL_HPP
#define PCURV_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace pcurv {

// Exact rational scalar. GMP keeps values canonical (gcd 1, positive
// denominator) as long as they are built through the helpers below.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat x(num, den);
    x.canonicalize();
    return x;
}

inline bool is_zero(const Rat& x) { return sgn(x) == 0; }

inline Rat pow_rat(const Rat& x, long e) {
    if (e == 0) return Rat(1);
    Rat base = e > 0 ? x : Rat(1) / x;
    long n = e > 0 ? e : -e;
    Rat acc(1);
    for (long i = 0; i < n; ++i) acc *= base;
    return acc;
}

inline std::string rat_str(const Rat& x) { return x.get_str(); }

// Fits-in-long probe, used by eigenvalue clearing and JSON emission.
inline std::optional<long> rat_to_long(const Rat& x) {
    if (x.get_den() != 1) return std::nullopt;
    if (!x.get_num().fits_slong_p()) return std::nullopt;
    return x.get_num().get_si();
}

inline long rat_den_long(const Rat& x) {
    if (!x.get_den().fits_slong_p())
        throw std::overflow_error("rational denominator too large: " + x.get_str());
    return x.get_den().get_si();
}

// ---- scalar trait surface shared with ModP -------------------------------

inline bool scalar_is_zero(const Rat& x) { return is_zero(x); }
inline Rat scalar_zero(const Rat&) { return Rat(0); }
inline Rat scalar_one(const Rat&) { return Rat(1); }
inline Rat scalar_frac(const Rat&, long num, long den) { return rat(num, den); }
inline std::string scalar_str(const Rat& x) { return x.get_str(); }

}  // namespace pcurv

#endif

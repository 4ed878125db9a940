#ifndef PCURV_QLINALG_HPP
#define PCURV_QLINALG_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "pcurv/matrix.hpp"
#include "pcurv/rational.hpp"

namespace pcurv {

using MatQ = Matrix<Rat>;

inline MatQ matq_identity(int n) {
    MatQ m(n, n, Rat(0));
    for (int i = 0; i < n; ++i) m.at(i, i) = Rat(1);
    return m;
}

// Characteristic polynomial lambda^n + c[0] lambda^(n-1) + ... + c[n-1] by
// the Faddeev-LeVerrier recursion, exact over Q.
inline std::vector<Rat> char_poly(const MatQ& a) {
    int n = a.rows;
    std::vector<Rat> c(n);
    MatQ m = a;
    for (int k = 1; k <= n; ++k) {
        Rat tr(0);
        for (int i = 0; i < n; ++i) tr += m.at(i, i);
        c[k - 1] = -tr / Rat(k);
        if (k == n) break;
        MatQ shifted = m;
        for (int i = 0; i < n; ++i) shifted.at(i, i) += c[k - 1];
        m = a * shifted;
    }
    return c;
}

// rank by Gaussian elimination
inline int matq_rank(MatQ m) {
    int n = m.rows, cols = m.cols, rank = 0;
    for (int col = 0; col < cols && rank < n; ++col) {
        int pivot = -1;
        for (int r = rank; r < n; ++r)
            if (!is_zero(m.at(r, col))) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        for (int c = 0; c < cols; ++c) std::swap(m.at(rank, c), m.at(pivot, c));
        Rat inv = Rat(1) / m.at(rank, col);
        for (int c = 0; c < cols; ++c) m.at(rank, c) *= inv;
        for (int r = 0; r < n; ++r) {
            if (r == rank || is_zero(m.at(r, col))) continue;
            Rat f = m.at(r, col);
            for (int c = 0; c < cols; ++c) m.at(r, c) -= f * m.at(rank, c);
        }
        ++rank;
    }
    return rank;
}

// basis of the kernel, as columns
inline std::vector<std::vector<Rat>> matq_kernel(MatQ m) {
    int rows = m.rows, cols = m.cols;
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (!is_zero(m.at(r, col))) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        for (int c = 0; c < cols; ++c) std::swap(m.at(rank, c), m.at(pivot, c));
        Rat inv = Rat(1) / m.at(rank, col);
        for (int c = 0; c < cols; ++c) m.at(rank, c) *= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == rank || is_zero(m.at(r, col))) continue;
            Rat f = m.at(r, col);
            for (int c = 0; c < cols; ++c) m.at(r, c) -= f * m.at(rank, c);
        }
        pivot_col.push_back(col);
        ++rank;
    }
    std::vector<std::vector<Rat>> basis;
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    for (int free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<Rat> v(cols, Rat(0));
        v[free] = Rat(1);
        for (int r = 0; r < rank; ++r) v[pivot_col[r]] = -m.at(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

// inverse over Q by Gauss-Jordan; nullopt when singular
inline std::optional<MatQ> matq_inverse(const MatQ& a) {
    int n = a.rows;
    MatQ m = a;
    MatQ inv = matq_identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (!is_zero(m.at(r, col))) {
                pivot = r;
                break;
            }
        if (pivot < 0) return std::nullopt;
        for (int c = 0; c < n; ++c) {
            std::swap(m.at(col, c), m.at(pivot, c));
            std::swap(inv.at(col, c), inv.at(pivot, c));
        }
        Rat f = Rat(1) / m.at(col, col);
        for (int c = 0; c < n; ++c) {
            m.at(col, c) *= f;
            inv.at(col, c) *= f;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || is_zero(m.at(r, col))) continue;
            Rat g = m.at(r, col);
            for (int c = 0; c < n; ++c) {
                m.at(r, c) -= g * m.at(col, c);
                inv.at(r, c) -= g * inv.at(col, c);
            }
        }
    }
    return inv;
}

struct factor_overflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All positive divisors of |z|; trial division with a hard bound, erring on
// the side of an exception rather than a wrong eigenvalue certificate.
inline std::vector<mpz_class> divisors_of(mpz_class z, long trial_bound = 1000000) {
    z = abs(z);
    if (z == 0) throw std::invalid_argument("divisors of zero");
    std::vector<std::pair<mpz_class, int>> fac;
    for (long p = 2; mpz_class(p) * p <= z && p <= trial_bound; p += (p == 2 ? 1 : 2)) {
        if (z % p == 0) {
            int e = 0;
            while (z % p == 0) {
                z /= p;
                ++e;
            }
            fac.emplace_back(p, e);
        }
    }
    if (z > 1) {
        if (!mpz_probab_prime_p(z.get_mpz_t(), 30) && z > mpz_class(trial_bound) * trial_bound)
            throw factor_overflow("cannot factor " + z.get_str() + " for root candidates");
        fac.emplace_back(z, 1);
    }
    std::vector<mpz_class> divs{1};
    for (const auto& [p, e] : fac) {
        size_t sz = divs.size();
        mpz_class pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (size_t i = 0; i < sz; ++i) divs.push_back(divs[i] * pk);
        }
    }
    std::sort(divs.begin(), divs.end());
    divs.erase(std::unique(divs.begin(), divs.end()), divs.end());
    return divs;
}

// Rational roots with multiplicity of the monic polynomial
// lambda^n + c[0] lambda^(n-1) + ... + c[n-1].  Returns (root, multiplicity)
// pairs; the leftover degree is n - sum of multiplicities.
inline std::vector<std::pair<Rat, int>> rational_roots(std::vector<Rat> c) {
    auto eval = [](const std::vector<Rat>& cs, const Rat& x) {
        Rat acc(1);
        Rat val(0);
        // Horner on lambda^n + cs...: walk from the top
        val = Rat(1);
        for (const Rat& ci : cs) val = val * x + ci;
        (void)acc;
        return val;
    };
    auto deflate = [](std::vector<Rat>& cs, const Rat& r) {
        // synthetic division of lambda^deg + cs by (lambda - r)
        std::vector<Rat> out(cs.size() - 1);
        Rat carry(1);
        for (size_t i = 0; i + 1 < cs.size(); ++i) {
            carry = carry * r + cs[i];
            out[i] = carry;
        }
        cs = std::move(out);
    };

    std::vector<std::pair<Rat, int>> roots;
    while (!c.empty()) {
        // constant term zero: root 0
        if (is_zero(c.back())) {
            if (!roots.empty() && roots.back().first == Rat(0))
                ++roots.back().second;
            else
                roots.emplace_back(Rat(0), 1);
            c.pop_back();
            continue;
        }
        // clear denominators: L lambda^n + ... + a0, candidates u/v with
        // u | a0, v | L
        mpz_class den_lcm = 1;
        for (const Rat& ci : c) den_lcm = lcm(den_lcm, ci.get_den());
        mpz_class lead = den_lcm;
        mpz_class a0 = mpz_class(c.back().get_num() * den_lcm / c.back().get_den());
        bool found = false;
        Rat found_root;
        auto us = divisors_of(a0);
        auto vs = divisors_of(lead);
        for (const auto& u : us) {
            for (const auto& v : vs) {
                for (int sign : {1, -1}) {
                    Rat cand(sign * u, v);
                    cand.canonicalize();
                    if (is_zero(eval(c, cand))) {
                        found = true;
                        found_root = cand;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) break;
        }
        if (!found) break;
        if (!roots.empty() && roots.back().first == found_root)
            ++roots.back().second;
        else
            roots.emplace_back(found_root, 1);
        deflate(c, found_root);
    }
    // merge duplicates that were found non-consecutively
    std::vector<std::pair<Rat, int>> merged;
    for (auto& [r, m] : roots) {
        bool hit = false;
        for (auto& [mr, mm] : merged)
            if (mr == r) {
                mm += m;
                hit = true;
            }
        if (!hit) merged.emplace_back(r, m);
    }
    return merged;
}

}  // namespace pcurv

#endif

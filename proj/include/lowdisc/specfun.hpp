// Special functions used by the bound pipeline: Gamma on the positive reals,
// |Gamma(3/4 + it/2)| on the critical line, the trigamma constant
// (1/4) psi'(3/4), Euler-Maclaurin Hurwitz zeta, and an independent
// evaluation of L(1/2, chi) through
//
//     L(s, chi) = D^{-s} sum_{a=1}^{D-1} chi(a) zeta(s, a/D),
//
// which shares no code with the theta-kernel quadrature and therefore serves
// as a cross-check of the whole moment pipeline.

#ifndef LOWDISC_SPECFUN_HPP
#define LOWDISC_SPECFUN_HPP

#include <gmpxx.h>

#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowdisc/bigreal.hpp"
#include "lowdisc/kronecker.hpp"

namespace lowdisc {

class reference_unavailable : public std::runtime_error {
public:
    explicit reference_unavailable(long d, long ceiling)
        : std::runtime_error("reference unavailable at this size: D = " + std::to_string(d) +
                             " exceeds ceiling " + std::to_string(ceiling)) {}
};

namespace detail {

// Exact Bernoulli numbers B_0, B_1, B_2, ... via the defining recurrence
// sum_{j<=m} C(m+1, j) B_j = 0.  Cached process-wide; access under a lock.
inline const std::vector<mpq_class>& bernoulli_upto(size_t n_max) {
    static std::vector<mpq_class> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    if (cache.size() > n_max) return cache;
    if (cache.empty()) {
        cache.emplace_back(1);         // B_0
        cache.emplace_back(-1, 2);     // B_1
    }
    for (size_t m = cache.size(); m <= n_max; ++m) {
        if (m % 2 == 1) {
            cache.emplace_back(0);
            continue;
        }
        mpq_class acc(0);
        mpz_class binom(1);  // C(m+1, j), built incrementally
        for (size_t j = 0; j < m; ++j) {
            if (j > 0) {
                binom *= static_cast<unsigned long>(m + 2 - j);
                binom /= static_cast<unsigned long>(j);
            } else {
                binom = 1;
            }
            if (cache[j] != 0) acc += cache[j] * mpq_class(binom);
        }
        mpq_class bm = -acc / mpq_class(static_cast<unsigned long>(m + 1));
        bm.canonicalize();
        cache.push_back(bm);
    }
    return cache;
}

inline BigReal bernoulli_2j(size_t j, int digits) {
    const auto& b = bernoulli_upto(2 * j);
    BigReal r(digits);
    mpfr_set_q(r.raw(), b[2 * j].get_mpq_t(), MPFR_RNDN);
    return r;
}

}  // namespace detail

// Gamma(x), x > 0.
inline BigReal gamma_real(const BigReal& x) {
    if (!(x > 0)) throw std::domain_error("gamma_real requires x > 0");
    BigReal r(x.digits());
    mpfr_gamma(r.raw(), x.raw(), MPFR_RNDN);
    return r;
}

// Hurwitz zeta(s, a) for real s > 0, s != 1, a > 0, by Euler-Maclaurin:
//
//   zeta(s,a) = sum_{k<N} (a+k)^-s + (a+N)^{1-s}/(s-1) + (a+N)^-s / 2
//             + sum_{j>=1} B_{2j}/(2j)! (s)_{2j-1} (a+N)^{-s-2j+1}.
//
// The correction series is truncated at the first term below target (for
// real s the remainder is bounded by the first omitted term); em_terms > 0
// pins the number of correction terms instead, which the self-consistency
// tests use to compare two orders.
inline BigReal hurwitz_zeta(const BigReal& s, const BigReal& a, int em_terms = 0) {
    if (!(a > 0)) throw std::domain_error("hurwitz_zeta requires a > 0");
    if (!(s > 0) || s == 1) throw std::domain_error("hurwitz_zeta implemented for real s > 0, s != 1");
    const int digits = s.digits();
    check_same_precision(s, a);

    long n_shift = std::max<long>(16, digits);
    const int max_retries = 4;
    for (int attempt = 0;; ++attempt) {
        BigReal sum(0, digits);
        for (long k = 0; k < n_shift; ++k) sum += pow(a + k, -s);

        const BigReal an = a + n_shift;
        const BigReal an_inv2 = 1 / (an * an);
        BigReal tail = pow(an, 1 - s) / (s - 1) + pow(an, -s) / 2;

        // target absolute accuracy relative to the result scale
        BigReal scale = abs(sum) + abs(tail) + 1;
        BigReal target = scale * pow(BigReal(10, digits), -(digits + 4));

        BigReal poch = s;                       // (s)_{2j-1} incrementally
        BigReal apow = pow(an, -s - 1);         // (a+N)^{-s-2j+1}
        BigReal fact(2, digits);                // (2j)!
        BigReal prev_abs(digits);
        bool converged = false;
        const int cap = em_terms > 0 ? em_terms : 4 * digits;
        for (int j = 1; j <= cap; ++j) {
            BigReal term = detail::bernoulli_2j(static_cast<size_t>(j), digits) / fact * poch * apow;
            tail += term;
            BigReal t_abs = abs(term);
            if (em_terms == 0) {
                if (t_abs < target) {
                    converged = true;
                    break;
                }
                if (!prev_abs.is_nan() && t_abs > prev_abs) break;  // asymptotic turnaround
                prev_abs = t_abs;
            }
            poch = poch * (s + (2 * j - 1)) * (s + (2 * j));
            apow *= an_inv2;
            fact = fact * (2 * j + 1) * (2 * j + 2);
        }
        if (em_terms > 0 || converged || attempt >= max_retries) {
            if (em_terms == 0 && !converged)
                throw numerical_error("hurwitz_zeta: Euler-Maclaurin did not reach target accuracy");
            return sum + tail;
        }
        n_shift *= 2;
    }
}

// psi'(x) = zeta(2, x), x > 0.
inline BigReal trigamma(const BigReal& x) {
    return hurwitz_zeta(BigReal(2, x.digits()), x);
}

// The archimedean constant (1/4) psi'(3/4) = 0.63546991...
inline BigReal trigamma_quarter(int digits) {
    BigReal th(3, digits);
    return trigamma(th / 4) / 4;
}

namespace detail {

struct CNum {
    BigReal re, im;
};

inline CNum cmul(const CNum& a, const CNum& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline CNum clog(const CNum& a) {
    return {log(a.re * a.re + a.im * a.im) / 2, atan2(a.im, a.re)};
}

inline CNum cinv(const CNum& a) {
    BigReal n = a.re * a.re + a.im * a.im;
    return {a.re / n, -(a.im / n)};
}

// Re log Gamma(z) by the Stirling series after shifting Re-ward until
// |z| >= radius; terms_cap = 0 lets the series run to the target, a positive
// cap pins the truncation (used by the asymptotic-oracle tests, which also
// pass shift_steps = 0 to forbid the recurrence).
inline BigReal re_log_gamma(CNum z, const BigReal& radius, int terms_cap = 0, int shift_steps = -1) {
    const int digits = z.re.digits();
    BigReal shift_log(0, digits);
    int steps = 0;
    while (shift_steps != 0) {
        BigReal zabs2 = z.re * z.re + z.im * z.im;
        if (zabs2 >= radius * radius) break;
        shift_log += log(zabs2) / 2;  // log|z|
        z.re += 1;
        if (shift_steps > 0 && ++steps >= shift_steps) break;
    }
    // (z - 1/2) log z - z + log(2 pi)/2 + sum_j B_2j / ((2j-1) 2j z^{2j-1})
    CNum logz = clog(z);
    CNum zm{z.re - BigReal("0.5", digits), z.im};
    BigReal result = zm.re * logz.re - zm.im * logz.im - z.re;
    result += log(2 * BigReal::pi(digits)) / 2;

    CNum zinv = cinv(z);
    CNum zinv2 = cmul(zinv, zinv);
    CNum zpow = zinv;  // z^{-(2j-1)}
    BigReal target = pow(BigReal(10, digits), -(digits + 4));
    BigReal prev_abs(digits);
    const int cap = terms_cap > 0 ? terms_cap : 4 * digits;
    for (int j = 1; j <= cap; ++j) {
        BigReal coeff = bernoulli_2j(static_cast<size_t>(j), digits) / ((2 * j - 1) * (2 * j));
        BigReal term = coeff * zpow.re;
        result += term;
        BigReal t_abs = abs(coeff) * sqrt(zpow.re * zpow.re + zpow.im * zpow.im);
        if (terms_cap == 0) {
            if (t_abs < target) break;
            if (!prev_abs.is_nan() && t_abs > prev_abs)
                throw numerical_error("re_log_gamma: Stirling series diverged before target");
            prev_abs = t_abs;
        }
        zpow = cmul(zpow, zinv2);
    }
    return result - shift_log;
}

}  // namespace detail

// |Gamma(3/4 + i t/2)|; even in t.
inline BigReal abs_gamma_on_line(const BigReal& t) {
    const int digits = t.digits();
    detail::CNum z{BigReal("0.75", digits), abs(t) / 2};
    // Stirling error ~ e^{-2 pi |z|}; radius chosen so it is below 10^-(P+2)
    BigReal radius = BigReal(digits + 4, digits) * BigReal("0.3665", digits) + 3;
    return exp(detail::re_log_gamma(z, radius));
}

// L(1/2, chi) via Hurwitz zeta decomposition; independent of the Phi/Xi
// machinery.  Cost is Theta(D) zeta evaluations, hence the ceiling.
inline BigReal reference_L_half(const KroneckerCharacter& chi, int digits, long ceiling = 2000,
                                int em_terms = 0) {
    const long d = chi.period();
    if (d > ceiling) throw reference_unavailable(d, ceiling);
    const BigReal s("0.5", digits);
    const BigReal dd(d, digits);
    BigReal sum(0, digits);
    for (long a = 1; a < d; ++a) {
        int c = chi(static_cast<unsigned long>(a));
        if (c == 0) continue;
        BigReal z = hurwitz_zeta(s, BigReal(a, digits) / dd, em_terms);
        if (c > 0)
            sum += z;
        else
            sum -= z;
    }
    return sum / sqrt(dd);
}

}  // namespace lowdisc

#endif  // LOWDISC_SPECFUN_HPP

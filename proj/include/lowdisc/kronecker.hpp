// Negative fundamental discriminants and the real quadratic character
// chi(n) = (-D/n) given by the Kronecker symbol.
//
// chi is completely multiplicative, periodic with period D, vanishes exactly
// on n with gcd(n, D) > 1, and sums to zero over a full period.  Because the
// theta-series evaluation consumes chi on long runs of consecutive integers,
// a period table is precomputed for moderate D and the symbol is computed
// directly (binary Jacobi reduction) above that.

#ifndef LOWDISC_KRONECKER_HPP
#define LOWDISC_KRONECKER_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowdisc {

inline bool is_squarefree(long m) {
    if (m < 1) return false;
    if (m == 1) return true;
    for (long p = 2; p * p * p <= m; ++p) {
        if (m % p == 0) {
            m /= p;
            if (m % p == 0) return false;
        }
    }
    // remaining cofactor has at most two prime factors, both above the cube
    // root; only a perfect square can spoil squarefreeness now
    long r = static_cast<long>(std::sqrt(static_cast<double>(m)));
    while (r * r > m) --r;
    while ((r + 1) * (r + 1) <= m) ++r;
    return r * r != m;
}

// True iff n is a (negative) fundamental discriminant: n = -d with either
// -d = 1 (mod 4) and d squarefree, or d = 4m' with m' = 1 or 2 (mod 4)
// squarefree.
inline bool is_fundamental(long n) {
    if (n >= 0) return false;
    long d = -n;
    if (d < 3) return false;
    if (d % 4 == 3) return is_squarefree(d);
    if (d % 4 == 0) {
        long m = d / 4;
        if (m % 4 == 1 || m % 4 == 2) return is_squarefree(m);
    }
    return false;
}

struct FundamentalDiscriminant {
    long neg_d;  // the discriminant, < 0
    long d;      // its magnitude

    static FundamentalDiscriminant make(long n) {
        if (!is_fundamental(n))
            throw std::domain_error(std::to_string(n) + " is not a negative fundamental discriminant");
        return FundamentalDiscriminant{n, -n};
    }
};

// All fundamental discriminants n with lo <= n <= hi < 0, ascending in D
// (i.e. descending as integers).
inline std::vector<FundamentalDiscriminant> enumerate_fundamental(long lo, long hi) {
    std::vector<FundamentalDiscriminant> out;
    if (lo > hi) return out;
    for (long n = hi; n >= lo; --n)
        if (is_fundamental(n)) out.push_back(FundamentalDiscriminant{n, -n});
    return out;
}

// Kronecker symbol (a/n) for n >= 0, a any integer.
inline int kronecker_symbol(long a, unsigned long n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int s = 1;
    if (n % 2 == 0) {
        if (a % 2 == 0) return 0;
        // (a/2) = +1 for a = +-1 (mod 8), -1 for a = +-3 (mod 8)
        long amod8 = ((a % 8) + 8) % 8;
        int two = (amod8 == 1 || amod8 == 7) ? 1 : -1;
        while (n % 2 == 0) {
            n /= 2;
            s *= two;
        }
    }
    if (n == 1) return s;
    // now n odd and >= 3
    if (a < 0) {
        if (n % 4 == 3) s = -s;  // (-1/n)
        a = -a;
    }
    unsigned long ua = static_cast<unsigned long>(a) % n;
    while (ua != 0) {
        while (ua % 2 == 0) {
            ua /= 2;
            unsigned long nm8 = n % 8;
            if (nm8 == 3 || nm8 == 5) s = -s;
        }
        // quadratic reciprocity for odd positive arguments
        if (ua % 4 == 3 && n % 4 == 3) s = -s;
        unsigned long t = n % ua;
        n = ua;
        ua = t;
    }
    return n == 1 ? s : 0;
}

class KroneckerCharacter {
public:
    static constexpr long kDefaultTableLimit = 1000000;

    explicit KroneckerCharacter(FundamentalDiscriminant disc, long table_limit = kDefaultTableLimit)
        : disc_(disc) {
        if (disc_.d <= table_limit) {
            table_.resize(static_cast<size_t>(disc_.d));
            for (long r = 0; r < disc_.d; ++r)
                table_[static_cast<size_t>(r)] =
                    static_cast<int8_t>(kronecker_symbol(disc_.neg_d, static_cast<unsigned long>(r)));
        }
    }

    const FundamentalDiscriminant& disc() const noexcept { return disc_; }
    long period() const noexcept { return disc_.d; }
    bool has_table() const noexcept { return !table_.empty(); }

    int operator()(unsigned long n) const {
        if (!table_.empty())
            return table_[static_cast<size_t>(n % static_cast<unsigned long>(disc_.d))];
        return kronecker_symbol(disc_.neg_d, n);
    }

private:
    FundamentalDiscriminant disc_;
    std::vector<int8_t> table_;
};

}  // namespace lowdisc

#endif  // LOWDISC_KRONECKER_HPP

// Gauss-Legendre nodes and weights at BigReal precision, mapped to [0,1].
// Roots of P_n are polished by Newton iteration from the Chebyshev-angle
// seeds; a handful of iterations from a double seed reach any precision the
// rest of the library uses.

#ifndef LOWDISC_QUADRATURE_HPP
#define LOWDISC_QUADRATURE_HPP

#include <cmath>
#include <vector>

#include "lowdisc/bigreal.hpp"

namespace lowdisc {

struct GaussLegendre {
    int n = 0;
    std::vector<BigReal> nodes;    // on (0,1), ascending
    std::vector<BigReal> weights;  // for integration over [0,1]
};

namespace detail {

// P_n(x) and P_n'(x) by the three-term recurrence.
inline void legendre_pair(int n, const BigReal& x, BigReal& pn, BigReal& dpn) {
    const int digits = x.digits();
    BigReal p0(1, digits), p1 = x;
    for (int k = 2; k <= n; ++k) {
        BigReal pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    pn = p1;
    dpn = BigReal(n, digits) * (x * p1 - p0) / (x * x - 1);
}

}  // namespace detail

inline GaussLegendre gauss_legendre(int n, int digits) {
    GaussLegendre rule;
    rule.n = n;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    const int work = digits + 8;
    const BigReal one(1, work);
    for (int k = 1; k <= (n + 1) / 2; ++k) {
        double seed = std::cos(M_PI * (k - 0.25) / (n + 0.5));
        BigReal x = BigReal::from_double(seed, work);
        BigReal pn(work), dpn(work);
        for (int it = 0; it < 8; ++it) {
            detail::legendre_pair(n, x, pn, dpn);
            BigReal dx = pn / dpn;
            x -= dx;
            if (abs(dx) < pow(BigReal(10, work), -(work - 2))) break;
        }
        detail::legendre_pair(n, x, pn, dpn);
        BigReal w = 2 / ((one - x * x) * dpn * dpn);
        // map [-1,1] -> [0,1]; k = 1 polishes the largest root, so its mirror
        // (1-x)/2 is the small node and keeps the arrays ascending
        rule.nodes[static_cast<size_t>(k - 1)] = ((one - x) / 2).round_to(digits);
        rule.weights[static_cast<size_t>(k - 1)] = (w / 2).round_to(digits);
        rule.nodes[static_cast<size_t>(n - k)] = ((one + x) / 2).round_to(digits);
        rule.weights[static_cast<size_t>(n - k)] = (w / 2).round_to(digits);
    }
    return rule;
}

}  // namespace lowdisc

#endif  // LOWDISC_QUADRATURE_HPP

// Backward-heat motion of the zeros: the truncated symmetric system
//
//   x_k'(t) = 1/x_k + sum_{j != k, j <= m} 2/(x_k - x_j) + 2/(x_k + x_j),
//
// k = 1..m, where the 1/x_k term is the mirror image j = -k and
// x_{-j} = -x_j supplies the second summand.  Integrated by an embedded
// Dormand-Prince 5(4) pair with PI step control; the repulsive stiffness
// near small gaps is handled by capping the step at min_gap^2/20 rather
// than by an implicit method.  Backward integration stops at the collision
// tolerance: the ODE model loses validity at coalescence (double-root
// expansion), so a stop is reported, never a complexification claim.
//
// Diagnostics: f(t) = sum_j 4/(x_j^2 - x_1^2) (j >= 2), g(t) the
// corresponding square sum, the inequality g' >= -8 g^2 checked with a
// finite-difference allowance, and the double-root discriminant
// +-2 d^2 Xi''^2 + d^4 (Xi'''^2 - Xi'' Xi'''') probed by finite differences.

#ifndef LOWDISC_HEATFLOW_HPP
#define LOWDISC_HEATFLOW_HPP

#include <algorithm>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lowdisc/bigreal.hpp"
#include "lowdisc/xi.hpp"

namespace lowdisc {

struct FlowState {
    BigReal t;
    std::vector<BigReal> x;  // x_1 < x_2 < ... < x_m, all positive

    long m() const noexcept { return static_cast<long>(x.size()); }

    bool ordered() const {
        if (x.empty()) return true;
        if (!(x.front() > 0)) return false;
        for (size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1])) return false;
        return true;
    }

    // min(2 x_1, min_j (x_{j+1} - x_j)): closest approach of any two zeros
    // of the full symmetric configuration
    BigReal min_gap() const {
        BigReal g = 2 * x.front();
        for (size_t i = 1; i < x.size(); ++i) g = min(g, x[i] - x[i - 1]);
        return g;
    }
};

inline std::vector<BigReal> flow_derivative(const FlowState& s) {
    const size_t m = s.x.size();
    std::vector<BigReal> d(m);
    for (size_t k = 0; k < m; ++k) {
        BigReal acc = 1 / s.x[k];  // mirror term j = -k
        for (size_t j = 0; j < m; ++j) {
            if (j == k) continue;
            BigReal diff = s.x[k] - s.x[j];
            if (diff.is_zero())
                throw numerical_error("flow_derivative: coincident zeros x_" +
                                      std::to_string(k + 1) + " = x_" + std::to_string(j + 1));
            acc += 2 / diff + 2 / (s.x[k] + s.x[j]);
        }
        d[k] = std::move(acc);
    }
    return d;
}

enum class FlowStatus { ok, collision_stop };

struct FlowOptions {
    BigReal tol;                        // per-step error target
    std::optional<BigReal> collision_tol;  // default 10 * tol
    std::vector<BigReal> sample_times;  // must be monotone along the direction
};

struct FlowResult {
    FlowStatus status = FlowStatus::ok;
    FlowState state;                 // final (or stop) state
    std::vector<FlowState> samples;  // states at the requested times
    long accepted_steps = 0;
    long rejected_steps = 0;
};

namespace detail {

struct DormandPrince {
    // classic DP5(4) tableau as exact rationals
    static constexpr int stages = 7;
    static const long a_num[7][6], a_den[7][6];
    static const long b5_num[7], b5_den[7];
    static const long b4_num[7], b4_den[7];
    static const long c_num[7], c_den[7];
};

inline const long DormandPrince::a_num[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1, 0, 0, 0, 0, 0},
    {3, 9, 0, 0, 0, 0},
    {44, -56, 32, 0, 0, 0},
    {19372, -25360, 64448, -212, 0, 0},
    {9017, -355, 46732, 49, -5103, 0},
    {35, 0, 500, 125, -2187, 11}};
inline const long DormandPrince::a_den[7][6] = {
    {1, 1, 1, 1, 1, 1},
    {5, 1, 1, 1, 1, 1},
    {40, 40, 1, 1, 1, 1},
    {45, 15, 9, 1, 1, 1},
    {6561, 2187, 6561, 729, 1, 1},
    {3168, 33, 5247, 176, 18656, 1},
    {384, 1, 1113, 192, 6784, 84}};
inline const long DormandPrince::b5_num[7] = {35, 0, 500, 125, -2187, 11, 0};
inline const long DormandPrince::b5_den[7] = {384, 1, 1113, 192, 6784, 84, 1};
inline const long DormandPrince::b4_num[7] = {5179, 0, 7571, 393, -92097, 187, 1};
inline const long DormandPrince::b4_den[7] = {57600, 1, 16695, 640, 339200, 2100, 40};
inline const long DormandPrince::c_num[7] = {0, 1, 3, 4, 8, 1, 1};
inline const long DormandPrince::c_den[7] = {1, 5, 10, 5, 9, 1, 1};

inline BigReal rat(long num, long den, int digits) {
    return BigReal(num, digits) / BigReal(den, digits);
}

}  // namespace detail

inline FlowResult integrate(const FlowState& s0, const BigReal& t_end_in, const FlowOptions& opt) {
    const int digits = s0.t.digits();
    const BigReal t_end = t_end_in.round_to(digits);
    if (s0.x.empty()) throw std::domain_error("integrate: empty configuration");
    if (!s0.ordered()) throw std::domain_error("integrate: seeds must be positive and increasing");
    if (!(opt.tol > 0)) throw config_error("integrate: tol must be positive");
    if (opt.tol < pow(BigReal(10, digits), 3 - digits))
        throw config_error("integrate: tol below 10^(3-P)");
    // the repulsion ODE itself is fine past the t = 1/2 reality threshold
    // (reference trajectories run to t = 1); only the Xi_t quadrature side
    // is restricted to |t| <= 1/2
    if (t_end > BigReal(2, digits))
        throw std::domain_error("integrate: t_end beyond the supported range");
    // backward guard: the g(t) < g(0)/(1 + 8 g(0) t) control blows up at
    // t = -1/(8 g(0)); refuse to aim past it
    if (s0.m() >= 2) {
        BigReal g0(0, digits);
        for (size_t j = 1; j < s0.x.size(); ++j) {
            BigReal p = s0.x[j] + s0.x[0], q = s0.x[j] - s0.x[0];
            g0 += 2 * (1 / (p * p) + 1 / (q * q));
        }
        if (g0 > 0 && t_end - s0.t < -(1 / (8 * g0)))
            throw std::domain_error("integrate: t_end beyond the backward guard -1/(8 g(0))");
    }

    const BigReal collision_tol =
        opt.collision_tol ? opt.collision_tol->round_to(digits) : 10 * opt.tol;

    FlowResult res;
    res.state = s0;
    res.state.t = s0.t.round_to(digits);

    std::vector<BigReal> samples_left(opt.sample_times.begin(), opt.sample_times.end());
    auto emit_due_samples = [&](const FlowState& st) {
        while (!samples_left.empty()) {
            BigReal next = samples_left.front().round_to(digits);
            bool due = (t_end >= s0.t) ? (st.t >= next) : (st.t <= next);
            if (!due) break;
            res.samples.push_back(st);
            samples_left.erase(samples_left.begin());
        }
    };
    emit_due_samples(res.state);

    if (t_end == res.state.t) return res;
    const int dir = t_end > res.state.t ? 1 : -1;

    using DP = detail::DormandPrince;
    const size_t m = s0.x.size();
    const BigReal one(1, digits);
    const BigReal h_min = pow(BigReal(10, digits), 4 - digits);

    BigReal h = abs(t_end - res.state.t);
    h = min(h, BigReal("0.01", digits) * (1 + abs(t_end - res.state.t)));
    BigReal err_prev = one;

    std::vector<std::vector<BigReal>> k(DP::stages);
    k[0] = flow_derivative(res.state);

    while (res.state.t != t_end) {
        // caps: repulsion stiffness guard and exact landing on t_end/samples
        BigReal gap = res.state.min_gap();
        if (gap < collision_tol) {
            res.status = FlowStatus::collision_stop;
            return res;
        }
        h = min(h, gap * gap / 20);
        BigReal to_end = abs(t_end - res.state.t);
        if (!samples_left.empty()) {
            BigReal to_sample = abs(samples_left.front().round_to(digits) - res.state.t);
            if (to_sample > 0) to_end = min(to_end, to_sample);
        }
        h = min(h, to_end);
        if (h < h_min) throw numerical_error("integrate: step size underflow (stiffness)");

        const BigReal hs = dir > 0 ? h : -h;
        bool stage_ok = true;
        FlowState tmp;
        tmp.t = BigReal(digits);
        tmp.x.resize(m);
        for (int s = 1; s < DP::stages && stage_ok; ++s) {
            for (size_t i = 0; i < m; ++i) {
                BigReal acc = res.state.x[i];
                for (int q = 0; q < s; ++q) {
                    if (DP::a_num[s][q] == 0) continue;
                    acc += hs * detail::rat(DP::a_num[s][q], DP::a_den[s][q], digits) * k[q][i];
                }
                tmp.x[i] = std::move(acc);
            }
            tmp.t = res.state.t + hs * detail::rat(DP::c_num[s], DP::c_den[s], digits);
            if (!tmp.ordered()) {
                stage_ok = false;
                break;
            }
            try {
                k[s] = flow_derivative(tmp);
            } catch (const numerical_error&) {
                stage_ok = false;
            }
        }

        if (stage_ok) {
            FlowState next;
            next.t = res.state.t + hs;
            next.x.resize(m);
            BigReal err_norm(0, digits);
            for (size_t i = 0; i < m; ++i) {
                BigReal y5 = res.state.x[i];
                BigReal e(0, digits);
                for (int s = 0; s < DP::stages; ++s) {
                    if (DP::b5_num[s] != 0) y5 += hs * detail::rat(DP::b5_num[s], DP::b5_den[s], digits) * k[s][i];
                    BigReal db = detail::rat(DP::b5_num[s], DP::b5_den[s], digits) -
                                 detail::rat(DP::b4_num[s], DP::b4_den[s], digits);
                    e += hs * db * k[s][i];
                }
                next.x[i] = y5;
                err_norm = max(err_norm, abs(e) / (opt.tol * (1 + abs(res.state.x[i]))));
            }
            if (err_norm <= 1 && next.ordered()) {
                res.state = std::move(next);
                ++res.accepted_steps;
                emit_due_samples(res.state);
                k[0] = flow_derivative(res.state);  // FSAL would reuse k6; recompute keeps it simple
                // PI controller
                BigReal fac = BigReal("0.9", digits) *
                              pow(1 / max(err_norm, pow(BigReal(10, digits), -8)),
                                  BigReal("0.14", digits)) *
                              pow(max(err_prev, pow(BigReal(10, digits), -8)), BigReal("0.08", digits));
                fac = min(max(fac, BigReal("0.2", digits)), BigReal(5, digits));
                h = h * fac;
                err_prev = max(err_norm, pow(BigReal(10, digits), -8));
                continue;
            }
        }
        ++res.rejected_steps;
        h = h / 2;
    }
    return res;
}

struct FlowDiagnostics {
    BigReal f;           // Eq-style pair product sum
    BigReal g;           // square sum
    BigReal g_prime_fd;  // centered difference of g along the flow
    BigReal slack;       // finite-difference error allowance
    bool lemma25_ok = false;  // g' >= -8 g^2 - slack
};

namespace detail {

inline void fg_sums(const FlowState& s, BigReal& f, BigReal& g) {
    const int digits = s.t.digits();
    f = BigReal(0, digits);
    g = BigReal(0, digits);
    for (size_t j = 1; j < s.x.size(); ++j) {
        BigReal p = s.x[j] + s.x[0], q = s.x[j] - s.x[0];
        f += 4 / (p * q);  // 2/((x_{-1}-x_j)(x_1-x_j)) summed over +-j
        g += 2 * (1 / (p * p) + 1 / (q * q));
    }
}

}  // namespace detail

inline FlowDiagnostics diagnostics(const FlowState& s, const BigReal& h, const FlowOptions& opt) {
    const int digits = s.t.digits();
    FlowDiagnostics d;
    detail::fg_sums(s, d.f, d.g);
    if (s.m() < 2) {
        d.g_prime_fd = BigReal(0, digits);
        d.slack = BigReal(0, digits);
        d.lemma25_ok = true;  // empty sums: 0 >= 0
        return d;
    }
    FlowOptions fo = opt;
    fo.sample_times.clear();
    FlowResult fwd = integrate(s, s.t + h, fo);
    FlowResult bwd = integrate(s, s.t - h, fo);
    if (fwd.status != FlowStatus::ok || bwd.status != FlowStatus::ok)
        throw numerical_error("diagnostics: collision while probing g'");
    BigReal fp(digits), gp(digits), fm(digits), gm(digits);
    detail::fg_sums(fwd.state, fp, gp);
    detail::fg_sums(bwd.state, fm, gm);
    d.g_prime_fd = (gp - gm) / (2 * h);
    // allowance: |g''| h / 2 from the second difference, plus the integrator
    // tolerance propagated through the quotient
    BigReal second = abs(gp - 2 * d.g + gm) / (h * h);
    d.slack = second * h / 2 + 4 * opt.tol / h;
    d.lemma25_ok = d.g_prime_fd >= -(8 * d.g * d.g) - d.slack;
    return d;
}

enum class CollisionClass {
    backward_complex_forward_real,  // discriminant < 0 backward, > 0 forward
    inconclusive,                   // derivative estimates inside error budget
};

inline const char* to_string(CollisionClass c) {
    return c == CollisionClass::backward_complex_forward_real ? "backward-complex-forward-real"
                                                              : "inconclusive";
}

struct CollisionProbe {
    BigReal xi2, xi3, xi4;    // x-derivatives of Xi_t at (t0, x0)
    BigReal backward;         // discriminant for t0 - delta^2
    BigReal forward;          // discriminant for t0 + delta^2
    CollisionClass classification = CollisionClass::inconclusive;
};

// Generic probe: f(x) is the section Xi_{t0}(.) (or any test function); the
// same code serves synthetic heat-polynomial tests.
template <class F>
CollisionProbe probe_double_root(F&& f, const BigReal& x0, const BigReal& delta,
                                 const BigReal& eval_err) {
    BigReal fm2 = f(x0 - 2 * delta), fm1 = f(x0 - delta), f0 = f(x0), fp1 = f(x0 + delta),
            fp2 = f(x0 + 2 * delta);
    CollisionProbe p;
    BigReal d2 = delta * delta;
    p.xi2 = (fp1 - 2 * f0 + fm1) / d2;
    p.xi3 = (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * d2 * delta);
    p.xi4 = (fp2 - 4 * fp1 + 6 * f0 - 4 * fm1 + fm2) / (d2 * d2);
    BigReal quart = p.xi3 * p.xi3 - p.xi2 * p.xi4;
    p.backward = -(2 * d2 * p.xi2 * p.xi2) + d2 * d2 * quart;
    p.forward = 2 * d2 * p.xi2 * p.xi2 + d2 * d2 * quart;
    // error budget on the leading 2 d^2 Xi''^2 term from the eval error
    BigReal err2 = 4 * eval_err / d2;
    BigReal err4 = 16 * eval_err / (d2 * d2);
    BigReal budget = 2 * d2 * (2 * abs(p.xi2) + err2) * err2 +
                     d2 * d2 * (2 * abs(p.xi3) * 8 * eval_err / (d2 * delta) +
                                abs(p.xi2) * err4 + abs(p.xi4) * err2 + err2 * err4);
    if (abs(p.backward) > budget && abs(p.forward) > budget && p.backward < 0 && p.forward > 0)
        p.classification = CollisionClass::backward_complex_forward_real;
    return p;
}

// Double-root expansion of Xi_t around (t0, x0): derivatives by finite
// differences of the quadrature evaluator, discriminant for both time
// directions.
inline CollisionProbe collision_discriminant(const std::shared_ptr<PhiGrid>& grid,
                                             const BigReal& t0, const BigReal& x0,
                                             const BigReal& delta) {
    XiEvaluator xi(grid, t0);
    BigReal err = grid->phi().trunc_err();
    auto f = [&](const BigReal& x) { return xi(x); };
    return probe_double_root(f, x0.round_to(grid->digits()), delta.round_to(grid->digits()), err);
}

// Per-zero drift allowances for the truncation to m zeros: the omitted
// velocity on x_k is 4 x_k sum_{j>m} 1/(x_j^2 - x_k^2); bounded using the
// extra computed zeros gamma_{m+1..m+K}, the certified residual for the
// rest, elapsed time, and a factor-2 growth margin.  Positions that overtake
// gamma_{m+1} get an unbounded allowance (the truncated edge genuinely
// expands).
inline std::vector<BigReal> drift_allowances(const std::vector<BigReal>& zeros_extended, size_t m,
                                             const BigReal& tail_residual, const FlowState& state,
                                             const BigReal& elapsed) {
    const int digits = state.t.digits();
    std::vector<BigReal> out(state.x.size());
    const size_t total = zeros_extended.size();
    for (size_t kk = 0; kk < state.x.size(); ++kk) {
        const BigReal& xk = state.x[kk];
        BigReal sum(0, digits);
        bool overtaken = total <= m;
        for (size_t j = m; j < total && !overtaken; ++j) {
            BigReal gj = zeros_extended[j].round_to(digits);
            if (xk >= gj) {
                overtaken = true;
                break;
            }
            sum += 1 / (gj * gj - xk * xk);
        }
        if (!overtaken && total > m) {
            BigReal glast = zeros_extended[total - 1].round_to(digits);
            BigReal shield = 1 - (xk * xk) / (glast * glast);
            if (!(shield > 0))
                overtaken = true;
            else if (tail_residual > 0)
                sum += tail_residual / shield;
        }
        if (overtaken) {
            BigReal inf(digits);
            mpfr_set_inf(inf.raw(), 1);
            out[kk] = inf;
        } else {
            out[kk] = 2 * abs(elapsed) * 4 * xk * sum;
        }
    }
    return out;
}

// The first `count` positive roots of Xi_t by sign-change scan plus
// bisection, index-paired against ODE positions by the oracle check.
inline std::vector<BigReal> xi_roots(const std::shared_ptr<PhiGrid>& grid, const BigReal& t,
                                     size_t count, const BigReal& spacing, const BigReal& tol) {
    XiEvaluator xi(grid, t);
    const int digits = grid->digits();
    std::vector<BigReal> roots;
    BigReal x(0, digits);
    BigReal f = xi(x);
    long guard = 0;
    while (roots.size() < count) {
        if (++guard > 500000) throw numerical_error("xi_roots: scan budget exceeded");
        BigReal x1 = x + spacing;
        BigReal f1 = xi(x1);
        if (f1.sign() != 0 && f.sign() != 0 && f1.sign() != f.sign()) {
            BigReal a = x, b = x1, fa = f, fb = f1;
            while (b - a > tol) {
                BigReal m = (a + b) / 2;
                BigReal fm = xi(m);
                if (fm.sign() == 0) {
                    a = m;
                    b = m;
                    break;
                }
                if (fm.sign() == fa.sign()) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                    fb = fm;
                }
            }
            roots.push_back((a + b) / 2);
        }
        x = x1;
        f = f1;
    }
    return roots;
}

struct OracleCheck {
    std::vector<BigReal> roots;       // index-paired quadrature roots of Xi_t
    std::vector<BigReal> gaps;        // |x_k(ode) - root_k|
    std::vector<BigReal> allowances;  // recorded drift allowances
    bool all_ok = true;               // every gap <= max(1e-6, allowance)
};

// ODE-vs-quadrature equivalence at the state's time: every position must
// match the corresponding direct root of Xi_t within max(1e-6, its drift
// allowance).
inline OracleCheck oracle_check(const std::shared_ptr<PhiGrid>& grid, const FlowState& state,
                                const std::vector<BigReal>& zeros_extended, size_t m,
                                const BigReal& tail_residual, const BigReal& elapsed,
                                const BigReal& tol) {
    const int digits = grid->digits();
    OracleCheck oc;
    BigReal spacing = state.min_gap() / 6;
    // the seed configuration is at least as tight as any later one
    if (!zeros_extended.empty()) {
        BigReal seed_gap = 2 * zeros_extended.front().round_to(digits);
        for (size_t j = 1; j < std::min(zeros_extended.size(), state.x.size()); ++j)
            seed_gap = min(seed_gap, zeros_extended[j].round_to(digits) -
                                         zeros_extended[j - 1].round_to(digits));
        spacing = min(spacing, seed_gap / 6);
    }
    oc.roots = xi_roots(grid, state.t, state.x.size(), spacing, tol);
    oc.allowances = drift_allowances(zeros_extended, m, tail_residual, state, elapsed);
    const BigReal floor_tol("1e-6", digits);
    for (size_t k = 0; k < state.x.size(); ++k) {
        BigReal gap = abs(state.x[k] - oc.roots[k]);
        oc.gaps.push_back(gap);
        if (!(gap <= max(floor_tol, oc.allowances[k]))) oc.all_ok = false;
    }
    return oc;
}

// Trajectory export: header t,x_1,...,x_M, one row per sample, decimal
// strings at working precision.
inline void write_trajectory_csv(std::ostream& os, const std::vector<FlowState>& samples) {
    if (samples.empty()) return;
    os << "t";
    for (long i = 1; i <= samples.front().m(); ++i) os << ",x_" << i;
    os << "\n";
    for (const auto& s : samples) {
        os << s.t.str();
        for (const auto& xv : s.x) os << "," << xv.str();
        os << "\n";
    }
}

}  // namespace lowdisc

#endif  // LOWDISC_HEATFLOW_HPP

// The completed function and its heat-flow deformation,
//
//   Xi_t(x, chi) = int_0^U exp(t u^2) Phi(u, chi) cos(u x) du,
//
// evaluated by composite Gauss-Legendre panels on [0, U] with panel halving
// until two consecutive refinements agree within eps.  Phi is cached at the
// panel nodes per refinement level and shared between evaluators, so a
// single Xi evaluation is a weighted cosine sum; the cosines are generated
// panel-to-panel by an angle-addition recurrence rather than one mpfr_cos
// per node.
//
// Also provides the Hardy-type normalization Z(t, chi), the moments Xi(0)
// and Xi''(0), and the curvature identities (log Z)''(0) = (log L)''(0)
// = Xi''(0)/Xi(0) + (1/4) psi'(3/4).  The zero sum behind them runs over
// all zeros (both +gamma_j and -gamma_j): the Hadamard product gives
// (log Xi)''(0) = -2 sum_{j>=1} gamma_j^{-2}.

#ifndef LOWDISC_XI_HPP
#define LOWDISC_XI_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowdisc/bigreal.hpp"
#include "lowdisc/quadrature.hpp"
#include "lowdisc/specfun.hpp"
#include "lowdisc/theta.hpp"

namespace lowdisc {

struct QuadOptions {
    int nodes_per_panel = 0;  // 0 = auto: max(32, ceil(1.2 * digits))
    int base_panels = 0;      // 0 = auto: max(8, ceil(U))
    int max_level = 12;       // refinement cap (panels double per level)
};

struct MomentPair {
    BigReal xi0;  // Xi(0, chi)  = int Phi
    BigReal xi2;  // Xi''(0,chi) = -int u^2 Phi
    BigReal err;  // bound on both absolute errors
};

class PhiGrid {
public:
    struct Level {
        BigReal h;                // panel width
        long panels = 0;
        std::vector<BigReal> u;     // nodes, ascending
        std::vector<BigReal> wphi;  // weight * Phi(node)
    };

    PhiGrid(KroneckerCharacter chi, int digits, const BigReal& eps, QuadOptions opt = {})
        : phi_(std::move(chi), digits, eps), opt_(opt) {
        if (opt_.nodes_per_panel <= 0)
            opt_.nodes_per_panel = std::max(32, static_cast<int>(std::ceil(1.2 * digits)));
        if (opt_.base_panels <= 0)
            opt_.base_panels = std::max(8, static_cast<int>(std::ceil(phi_.cutoff().to_double())));
        rule_ = gauss_legendre(opt_.nodes_per_panel, digits);
    }

    const PhiEvaluator& phi() const noexcept { return phi_; }
    int digits() const noexcept { return phi_.digits(); }
    const BigReal& eps() const noexcept { return phi_.eps(); }
    const BigReal& cutoff() const noexcept { return phi_.cutoff(); }
    const QuadOptions& options() const noexcept { return opt_; }
    int nodes_per_panel() const noexcept { return opt_.nodes_per_panel; }
    const GaussLegendre& rule() const noexcept { return rule_; }

    // Levels build lazily on first use; share a grid across threads only
    // after the levels you need exist (concurrent workers each own a grid).
    const Level& level(int l) const {
        if (l > opt_.max_level)
            throw numerical_error("PhiGrid: refinement level beyond cap");
        while (static_cast<int>(levels_.size()) <= l) build_next_level();
        return levels_[static_cast<size_t>(l)];
    }

private:
    void build_next_level() const {
        const int l = static_cast<int>(levels_.size());
        Level lev;
        lev.panels = static_cast<long>(opt_.base_panels) << l;
        lev.h = phi_.cutoff() / lev.panels;
        const int n = opt_.nodes_per_panel;
        lev.u.reserve(static_cast<size_t>(lev.panels * n));
        lev.wphi.reserve(static_cast<size_t>(lev.panels * n));
        for (long p = 0; p < lev.panels; ++p) {
            BigReal a = lev.h * p;
            for (int j = 0; j < n; ++j) {
                BigReal u = a + rule_.nodes[static_cast<size_t>(j)] * lev.h;
                BigReal w = rule_.weights[static_cast<size_t>(j)] * lev.h;
                lev.wphi.push_back(w * phi_(u));
                lev.u.push_back(std::move(u));
            }
        }
        levels_.push_back(std::move(lev));
    }

    PhiEvaluator phi_;
    QuadOptions opt_;
    GaussLegendre rule_;
    mutable std::vector<Level> levels_;
};

namespace detail {

// sum_i W[i] cos(u_i x) over one level, cosines by panel rotation.
inline BigReal cosine_sum(const PhiGrid::Level& lev, int nodes_per_panel,
                          const std::vector<BigReal>& weights, const BigReal& x) {
    const int digits = x.digits();
    const mpfr_prec_t bits = bits_for_digits(digits);

    if (x.is_zero()) {
        mpfr_t acc;
        mpfr_init2(acc, bits + 32);
        mpfr_set_zero(acc, 1);
        for (const auto& w : weights) mpfr_add(acc, acc, w.raw(), MPFR_RNDN);
        BigReal r(digits);
        mpfr_set(r.raw(), acc, MPFR_RNDN);
        mpfr_clear(acc);
        return r;
    }

    const BigReal hx = lev.h * x;
    BigReal ch(digits), sh(digits);
    sin_cos(sh, ch, hx);
    const int n = nodes_per_panel;
    std::vector<BigReal> cj(static_cast<size_t>(n)), sj(static_cast<size_t>(n));
    // offsets within a panel are the same at every panel
    for (int j = 0; j < n; ++j) {
        BigReal a = lev.u[static_cast<size_t>(j)] * x;
        sin_cos(sj[static_cast<size_t>(j)], cj[static_cast<size_t>(j)], a);
    }

    mpfr_t acc, cp, sp, t1, t2;
    mpfr_init2(acc, bits + 32);
    mpfr_init2(cp, bits);
    mpfr_init2(sp, bits);
    mpfr_init2(t1, bits);
    mpfr_init2(t2, bits);
    mpfr_set_zero(acc, 1);
    mpfr_set_ui(cp, 1, MPFR_RNDN);
    mpfr_set_zero(sp, 1);

    size_t idx = 0;
    for (long p = 0; p < lev.panels; ++p) {
        for (int j = 0; j < n; ++j, ++idx) {
            // cos(u x) = cp * cj - sp * sj
            mpfr_mul(t1, cp, cj[static_cast<size_t>(j)].raw(), MPFR_RNDN);
            mpfr_mul(t2, sp, sj[static_cast<size_t>(j)].raw(), MPFR_RNDN);
            mpfr_sub(t1, t1, t2, MPFR_RNDN);
            mpfr_mul(t1, t1, weights[idx].raw(), MPFR_RNDN);
            mpfr_add(acc, acc, t1, MPFR_RNDN);
        }
        // rotate (cp, sp) by angle h x
        mpfr_mul(t1, cp, ch.raw(), MPFR_RNDN);
        mpfr_mul(t2, sp, sh.raw(), MPFR_RNDN);
        mpfr_sub(t1, t1, t2, MPFR_RNDN);
        mpfr_mul(t2, sp, ch.raw(), MPFR_RNDN);
        mpfr_swap(sp, t2);
        mpfr_mul(t2, cp, sh.raw(), MPFR_RNDN);
        mpfr_add(sp, sp, t2, MPFR_RNDN);
        mpfr_swap(cp, t1);
    }

    BigReal r(digits);
    mpfr_set(r.raw(), acc, MPFR_RNDN);
    mpfr_clears(acc, cp, sp, t1, t2, static_cast<mpfr_ptr>(nullptr));
    return r;
}

}  // namespace detail

class XiEvaluator {
public:
    struct Value {
        BigReal value;
        BigReal err;
        int level = 0;
    };

    XiEvaluator(std::shared_ptr<PhiGrid> grid, const BigReal& heat_time)
        : grid_(std::move(grid)), t_(heat_time.round_to(grid_->digits())) {
        BigReal half("0.5", grid_->digits());
        if (abs(t_) > half)
            throw std::domain_error("XiEvaluator: |t| <= 1/2 required");
    }

    explicit XiEvaluator(std::shared_ptr<PhiGrid> grid)
        : XiEvaluator(std::move(grid), BigReal(0, grid->digits())) {}

    const std::shared_ptr<PhiGrid>& grid() const noexcept { return grid_; }
    const BigReal& heat_time() const noexcept { return t_; }
    int digits() const noexcept { return grid_->digits(); }
    long d() const noexcept { return grid_->phi().chi().period(); }

    // Xi_t(x): refine from a resolution-based starting level until two
    // consecutive levels agree within eps.
    Value xi(const BigReal& x) const {
        const BigReal ax = abs(x.round_to(digits()));
        int l = start_level(ax);
        BigReal prev = level_sum(l, ax);
        const BigReal eps = grid_->eps();
        for (; l < grid_->options().max_level; ++l) {
            BigReal cur = level_sum(l + 1, ax);
            BigReal delta = abs(cur - prev);
            if (delta <= eps)
                return Value{cur, grid_->phi().trunc_err() + delta, l + 1};
            prev = cur;
        }
        throw numerical_error("xi_t quadrature did not converge at x = " + ax.str(6),
                              abs(prev).to_double());
    }

    BigReal operator()(const BigReal& x) const { return xi(x).value; }

    // Xi(0) and Xi''(0) (heat time must be 0).
    MomentPair moments() const {
        require_undeformed("moments");
        const BigReal eps = grid_->eps();
        const BigReal zero(0, digits());
        int l = 0;
        BigReal s0_prev = level_sum(l, zero);
        BigReal s2_prev = second_moment_sum(l);
        for (; l < grid_->options().max_level; ++l) {
            BigReal s0 = level_sum(l + 1, zero);
            BigReal s2 = second_moment_sum(l + 1);
            BigReal d0 = abs(s0 - s0_prev);
            BigReal d2 = abs(s2 - s2_prev);
            if (d0 <= eps && d2 <= eps)
                return MomentPair{s0, -s2, grid_->phi().trunc_err() + d0 + d2};
            s0_prev = s0;
            s2_prev = s2;
        }
        throw numerical_error("moment quadrature did not converge");
    }

    // Z(t_ord, chi) = Xi(t_ord) / ((D/pi)^{3/4} |Gamma(3/4 + i t_ord/2)|).
    BigReal z_value(const BigReal& t_ord) const {
        require_undeformed("z_value");
        return xi(t_ord).value / z_prefactor(t_ord);
    }

    BigReal z_prefactor(const BigReal& t_ord) const {
        const int dg = digits();
        BigReal dpi = BigReal(d(), dg) / BigReal::pi(dg);
        return pow(dpi, BigReal(3, dg) / 4) * abs_gamma_on_line(t_ord.round_to(dg));
    }

    // (log Z)''(0) = Xi''(0)/Xi(0) + (1/4) psi'(3/4); Z'(0) = 0 by evenness.
    BigReal log_z_second() const {
        MomentPair mp = moments();
        return log_z_second(mp);
    }
    BigReal log_z_second(const MomentPair& mp) const {
        return mp.xi2 / mp.xi0 + trigamma_quarter(digits());
    }
    // (log L)''(0) along the critical line coincides with (log Z)''(0): the
    // prefactor relating Z to L(1/2 + ix) has unit modulus, so its log is
    // purely imaginary and, at x = 0, drops out of the real second
    // derivative; both differ from Xi''/Xi(0) by +(1/4) psi'(3/4).
    BigReal log_l_second() const { return log_z_second(); }
    BigReal log_l_second(const MomentPair& mp) const { return log_z_second(mp); }

private:
    void require_undeformed(const char* op) const {
        if (!t_.is_zero())
            throw std::domain_error(std::string(op) + " requires the undeformed (t = 0) evaluator");
    }

    // smallest level whose panel width resolves cos(x u) with margin
    int start_level(const BigReal& ax) const {
        const int n = grid_->nodes_per_panel();
        const int digits = grid_->digits();
        const double homega =
            (8.0 * n / M_E) * std::pow(10.0, -(digits + 2.0) / (2.0 * n));
        const double h0 = grid_->level(0).h.to_double();
        const double need = h0 * std::max(1.0, ax.to_double()) / homega;
        int l = need <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log2(need)));
        return std::clamp(l, 0, grid_->options().max_level - 1);
    }

    const std::vector<BigReal>& deformed_weights(int l) const {
        const PhiGrid::Level& lev = grid_->level(l);
        if (t_.is_zero()) return lev.wphi;
        if (static_cast<int>(defw_.size()) <= l) defw_.resize(static_cast<size_t>(l + 1));
        auto& dw = defw_[static_cast<size_t>(l)];
        if (dw.empty()) {
            dw.reserve(lev.wphi.size());
            for (size_t i = 0; i < lev.wphi.size(); ++i) {
                const BigReal& u = lev.u[i];
                dw.push_back(lev.wphi[i] * exp(t_ * u * u));
            }
        }
        return dw;
    }

    BigReal level_sum(int l, const BigReal& x) const {
        return detail::cosine_sum(grid_->level(l), grid_->nodes_per_panel(), deformed_weights(l), x);
    }

    BigReal second_moment_sum(int l) const {
        const PhiGrid::Level& lev = grid_->level(l);
        const mpfr_prec_t bits = bits_for_digits(digits());
        mpfr_t acc, t1;
        mpfr_init2(acc, bits + 32);
        mpfr_init2(t1, bits);
        mpfr_set_zero(acc, 1);
        for (size_t i = 0; i < lev.wphi.size(); ++i) {
            mpfr_mul(t1, lev.u[i].raw(), lev.u[i].raw(), MPFR_RNDN);
            mpfr_mul(t1, t1, lev.wphi[i].raw(), MPFR_RNDN);
            mpfr_add(acc, acc, t1, MPFR_RNDN);
        }
        BigReal r(digits());
        mpfr_set(r.raw(), acc, MPFR_RNDN);
        mpfr_clears(acc, t1, static_cast<mpfr_ptr>(nullptr));
        return r;
    }

    std::shared_ptr<PhiGrid> grid_;
    BigReal t_;
    mutable std::vector<std::vector<BigReal>> defw_;
};

}  // namespace lowdisc

#endif  // LOWDISC_XI_HPP

// Low-lying zeros gamma_1 < gamma_2 < ... of Xi(x, chi) on the positive real
// axis: sign-change scan on a grid an eighth of the mean-lowest-zero scale
// 1/log(D/2pi), bracket refinement by bisection with opportunistic false-
// position steps, and completeness certification through the sum rule
//
//   -1/2 Xi''(0)/Xi(0) = sum_j gamma_j^{-2}.
//
// The residual (moment side minus the partial sum) equals the omitted tail,
// so it must be positive and shrink as zeros are added; a negative residual
// beyond the error budget or a residual above a crude tail allowance flags a
// defective list.  Since Xi's envelope decays like e^{-pi x/4}, the scan
// refuses to walk past the height where the envelope sinks into the
// quadrature error floor instead of reporting noise as zeros.

#ifndef LOWDISC_ZEROS_HPP
#define LOWDISC_ZEROS_HPP

#include <cmath>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lowdisc/bigreal.hpp"
#include "lowdisc/xi.hpp"

namespace lowdisc {

struct ZeroBracket {
    BigReal lo, hi;
};

struct ZeroList {
    FundamentalDiscriminant disc{};
    std::vector<BigReal> gammas;
    std::vector<ZeroBracket> brackets;
    BigReal tol;
    BigReal residual;  // set by certify
    bool certified = false;
    bool residual_negative_anomaly = false;
    bool residual_tail_anomaly = false;

    size_t count() const noexcept { return gammas.size(); }
};

class incomplete_zero_list : public numerical_error {
public:
    incomplete_zero_list(const std::string& what, BigReal lo, BigReal hi)
        : numerical_error(what), suspect_lo(std::move(lo)), suspect_hi(std::move(hi)) {}
    BigReal suspect_lo, suspect_hi;
};

struct ZeroSearchOptions {
    long count = 0;               // stop after this many zeros (0: use height)
    std::optional<BigReal> height;
    BigReal tol;                  // bracket width target
    double grid_factor = 8.0;     // spacing = 1/(grid_factor * max(1, log(D/2pi)))
    long max_grid_points = 2000000;
    bool certify_completeness = true;
};

// residual = -1/2 xi2/xi0 - sum gamma_j^{-2}; records anomaly flags on zl.
inline BigReal certify(ZeroList& zl, const MomentPair& mp, double neg_budget_factor = 2.0,
                       double tail_allowance_factor = 2.0) {
    if (zl.gammas.empty()) throw std::domain_error("certify: empty zero list");
    const int digits = mp.xi0.digits();
    BigReal sum(0, digits);
    for (const auto& g : zl.gammas) {
        BigReal gd = g.round_to(digits);
        sum += 1 / (gd * gd);
    }
    BigReal residual = -(mp.xi2 / mp.xi0) / 2 - sum;
    zl.residual = residual;
    zl.certified = true;
    zl.residual_negative_anomaly =
        residual < -(BigReal::from_double(neg_budget_factor, digits) * mp.err);
    const BigReal glast = zl.gammas.back().round_to(digits);
    BigReal allowance = BigReal::from_double(tail_allowance_factor, digits) *
                        BigReal(static_cast<long>(zl.count()), digits) / (glast * glast);
    zl.residual_tail_anomaly = residual > allowance;
    return residual;
}

namespace detail {

// bracket refinement: bisection guaranteed, false-position steps interleaved
inline std::pair<BigReal, BigReal> refine_bracket(const XiEvaluator& xi, BigReal a, BigReal b,
                                                  BigReal fa, BigReal fb, const BigReal& tol) {
    int it = 0;
    while (b - a > tol && it < 200) {
        BigReal m(a.digits());
        if (it % 2 == 1 && !(abs(fa) + abs(fb)).is_zero()) {
            m = (a * abs(fb) + b * abs(fa)) / (abs(fa) + abs(fb));
            BigReal w = b - a;
            BigReal margin = w / 16;
            if (m < a + margin) m = a + margin;
            if (m > b - margin) m = b - margin;
        } else {
            m = (a + b) / 2;
        }
        BigReal fm = xi(m);
        if (fm.sign() == 0) {
            BigReal half_tol = tol / 2;
            return {m - half_tol, m + half_tol};
        }
        if (fm.sign() == fa.sign()) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        ++it;
    }
    return {a, b};
}

}  // namespace detail

// Incrementally extendable scan state; find_zeros wraps one-shot use and
// the analyze pipeline extends the same scan as its tail target tightens.
class ZeroScanner {
public:
    ZeroScanner(const XiEvaluator& xi, const ZeroSearchOptions& opt)
        : xi_(&xi), opt_(opt), digits_(xi.digits()) {
        if (!(opt_.tol > 0)) throw config_error("ZeroScanner: tol must be positive");
        BigReal min_tol = pow(BigReal(10, digits_), 2 - digits_);
        if (opt_.tol < min_tol)
            throw config_error("ZeroScanner: tol below 10^(2-P) for precision P");
        list_.disc = xi.grid()->phi().chi().disc();
        list_.tol = opt_.tol;
        const double logd = std::log(static_cast<double>(list_.disc.d) / (2 * M_PI));
        double spacing = 1.0 / (opt_.grid_factor * std::max(1.0, logd));
        step_ = BigReal::from_double(spacing, digits_);
        x_ = BigReal(0, digits_);
        XiEvaluator::Value v = xi.xi(x_);
        f_ = v.value;
        err_scale_ = v.err;
        // envelope floor: beyond this height sign changes drown in quadrature
        // error and cannot be certified at this precision
        env_floor_ = 1000 * xi.grid()->eps();
    }

    const ZeroList& list() const noexcept { return list_; }
    ZeroList take() { return std::move(list_); }
    const BigReal& scanned_to() const noexcept { return x_; }

    // largest height where the envelope still clears the error floor
    BigReal resolvable_height() const {
        double lo = 0, hi = 4;
        while (envelope(hi) > env_floor_ && hi < 1e6) hi *= 2;
        for (int i = 0; i < 80; ++i) {
            double m = (lo + hi) / 2;
            (envelope(m) > env_floor_ ? lo : hi) = m;
        }
        return BigReal::from_double(lo, digits_);
    }

    void extend_to_count(long n) {
        while (static_cast<long>(list_.count()) < n) advance_cell();
    }

    void extend_to_height(const BigReal& h) {
        while (x_ < h) advance_cell();
    }

private:
    BigReal envelope(double x) const {
        BigReal xb = BigReal::from_double(x, digits_);
        return xi_->z_prefactor(xb);
    }

    void advance_cell() {
        if (++cells_ > opt_.max_grid_points)
            throw numerical_error("zero scan exceeded max grid points");
        if (cells_ % 16 == 0 && envelope(x_.to_double()) < env_floor_)
            throw numerical_error(
                "zero scan at x = " + x_.str(6) +
                " reached the precision floor; raise precision/shrink eps to go higher");
        BigReal x1 = x_ + step_;
        XiEvaluator::Value v = xi_->xi(x1);
        err_scale_ = max(err_scale_, v.err);
        if (v.value.sign() != 0 && f_.sign() != 0 && v.value.sign() != f_.sign()) {
            record_zero(x_, x1, f_, v.value);
        } else if (min(abs(f_), abs(v.value)) < 1000000 * err_scale_) {
            subdivide_cell(x_, x1, f_, v.value);
        }
        x_ = x1;
        f_ = v.value;
    }

    // a dip without a sign change: subdivide before accepting "no zero here"
    void subdivide_cell(const BigReal& a, const BigReal& b, const BigReal& fa, const BigReal& fb) {
        const int parts = 16;
        BigReal h = (b - a) / parts;
        BigReal prev_x = a, prev_f = fa;
        BigReal min_abs = min(abs(fa), abs(fb));
        bool found = false;
        for (int i = 1; i <= parts; ++i) {
            BigReal xx = i == parts ? b : a + h * i;
            BigReal ff = i == parts ? fb : (*xi_)(xx);
            if (ff.sign() != 0 && prev_f.sign() != 0 && ff.sign() != prev_f.sign()) {
                record_zero(prev_x, xx, prev_f, ff);
                found = true;
            }
            min_abs = min(min_abs, abs(ff));
            prev_x = xx;
            prev_f = ff;
        }
        if (!found && min_abs < 4 * err_scale_) {
            // distinguish a genuine tangency suspicion from the quadrature
            // noise floor: if the envelope has decayed to within a few orders
            // of eps, dips below the budget are expected and the list simply
            // cannot be extended at this precision
            if (envelope(a.to_double()) < 10000000 * xi_->grid()->eps())
                throw numerical_error(
                    "zero scan at x = " + a.str(6) +
                    " reached the precision floor; raise precision/shrink eps to go higher");
            throw incomplete_zero_list(
                "possible tangency or missed zero pair near x = " + a.str(6) +
                " (|Xi| dips below the error budget without a sign change)",
                a, b);
        }
    }

    void record_zero(const BigReal& a, const BigReal& b, const BigReal& fa, const BigReal& fb) {
        auto [lo, hi] = detail::refine_bracket(*xi_, a, b, fa, fb, opt_.tol);
        BigReal gamma = (lo + hi) / 2;
        if (!list_.gammas.empty() && gamma <= list_.gammas.back())
            throw numerical_error("zero ordering violated during scan");
        list_.gammas.push_back(gamma);
        list_.brackets.push_back(ZeroBracket{lo, hi});
    }

    const XiEvaluator* xi_;
    ZeroSearchOptions opt_;
    int digits_;
    ZeroList list_;
    BigReal step_, x_, f_, err_scale_, env_floor_;
    long cells_ = 0;
};

inline ZeroList find_zeros(const XiEvaluator& xi, const ZeroSearchOptions& opt,
                           const MomentPair* mp = nullptr) {
    ZeroScanner scan(xi, opt);
    if (opt.count > 0)
        scan.extend_to_count(opt.count);
    else if (opt.height)
        scan.extend_to_height(opt.height->round_to(xi.digits()));
    else
        throw config_error("find_zeros: need a count or height target");
    ZeroList zl = scan.take();
    if (opt.certify_completeness && !zl.gammas.empty()) {
        MomentPair moments = mp ? *mp : xi.moments();
        certify(zl, moments);
        if (zl.residual_negative_anomaly)
            throw incomplete_zero_list(
                "sum-rule residual negative beyond error budget (residual = " +
                    zl.residual.str(6) + "); zero list suspect",
                BigReal(0, xi.digits()), scan.scanned_to());
    }
    return zl;
}

enum class OriginClass {
    positive_local_max,
    positive_local_min,
    negative_local_max,
    negative_local_min,
    zero,  // |Z(0)| or the curvature below the error budget: undecidable
};

inline const char* to_string(OriginClass c) {
    switch (c) {
        case OriginClass::positive_local_max: return "positive-local-max";
        case OriginClass::positive_local_min: return "positive-local-min";
        case OriginClass::negative_local_max: return "negative-local-max";
        case OriginClass::negative_local_min: return "negative-local-min";
        case OriginClass::zero: return "zero";
    }
    return "?";
}

// Classification of the critical point of Z at the origin from sign(Z(0))
// and sign(Z''(0)); Z''(0)/Z(0) = xi2/xi0 + (1/4)psi'(3/4) regardless of the
// sign of Z(0), so the curvature sign is sign(Z(0)) * sign(that ratio).
inline OriginClass classify_origin(const XiEvaluator& xi, const MomentPair* mp_in = nullptr) {
    MomentPair mp = mp_in ? *mp_in : xi.moments();
    if (abs(mp.xi0) <= mp.err) return OriginClass::zero;
    BigReal ratio = xi.log_z_second(mp);  // Z''(0)/Z(0)
    BigReal ratio_err = 2 * mp.err * (1 + abs(mp.xi2 / mp.xi0)) / abs(mp.xi0);
    if (abs(ratio) <= ratio_err) return OriginClass::zero;
    const bool z_pos = mp.xi0.sign() > 0;
    const bool second_neg = (ratio.sign() > 0) != z_pos;  // sign(Z'') = sign(Z0)*sign(ratio)
    if (z_pos)
        return second_neg ? OriginClass::positive_local_max : OriginClass::positive_local_min;
    return second_neg ? OriginClass::negative_local_max : OriginClass::negative_local_min;
}

// External zero lists: plain text, one decimal ordinate per line, '#' and
// blank lines ignored (matches the format of standard zero packages).
inline ZeroList import_zero_list(const FundamentalDiscriminant& disc, std::istream& in,
                                 const BigReal& tol, int digits) {
    ZeroList zl;
    zl.disc = disc;
    zl.tol = tol;
    std::string line;
    while (std::getline(in, line)) {
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        BigReal g(line.substr(first), digits);
        if (!(g > 0)) throw config_error("imported zero not positive: " + line);
        if (!zl.gammas.empty() && g <= zl.gammas.back())
            throw config_error("imported zeros not strictly increasing at: " + line);
        zl.brackets.push_back(ZeroBracket{g - tol, g + tol});
        zl.gammas.push_back(std::move(g));
    }
    return zl;
}

}  // namespace lowdisc

#endif  // LOWDISC_ZEROS_HPP

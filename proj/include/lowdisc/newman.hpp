// The lower-bound pipeline: from the first zeros and the moments of a
// discriminant to the bound lambda < Lambda_{-D} <= Lambda_Kr.
//
// With u = 5 gamma_1^2 g(0) < 1 the bound is
//
//   lambda = ((1 - u)^{4/5} - 1) / (8 g(0)),
//
// where any rigorous upper bound on g(0) is admissible because lambda is
// decreasing in g(0).  g0_bound assembles the explicit pair sum over the
// computed zeros plus a moment-controlled tail,
//
//   g0_bound = 2 sum_{2<=j<N} (gamma_j+gamma_1)^{-2} + (gamma_j-gamma_1)^{-2}
//            - (1+y^2)/(1-y^2)^2 (2 Xi''(0)/Xi(0) + 4 sum_{1<=j<N} gamma_j^{-2})
//
// with y = gamma_1 (the worst case of the increasing factor over the tail);
// g0_bound_refined evaluates the same factor at y = gamma_1/gamma_N, valid
// since gamma_j >= gamma_N > 1 for the tail, and strictly sharper.  The
// generalized exponent variant lambda_c assumes f' > -c f^2 and uses the
// interior coefficient (c+2)/2, the only choice whose c = 8 specialization
// reproduces lambda.
//
// The ratio lambda/gamma_1^2 = (5/8)((1-u)^{4/5}-1)/u lies in (-5/8, -1/2)
// for u in (0,1), consistent with the expansion
// lambda = -gamma_1^2/2 (1 + gamma_1^2 g0/2 + ...).

#ifndef LOWDISC_NEWMAN_HPP
#define LOWDISC_NEWMAN_HPP

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lowdisc/bigreal.hpp"
#include "lowdisc/xi.hpp"
#include "lowdisc/zeros.hpp"

namespace lowdisc {

namespace detail {

// common assembly; y parameterizes the tail factor (1+y^2)/(1-y^2)^2
inline BigReal g0_bound_with_tail_at(const ZeroList& zl, const MomentPair& mp, const BigReal& y) {
    const size_t n = zl.count();
    if (n < 2) throw std::domain_error("g0_bound: need at least two zeros (gamma_N > 1)");
    const int digits = mp.xi0.digits();
    const BigReal g1 = zl.gammas.front().round_to(digits);
    if (!(g1 < 1)) throw std::domain_error("g0_bound: requires gamma_1 < 1");
    const BigReal gn = zl.gammas.back().round_to(digits);
    if (!(gn > 1)) throw std::domain_error("g0_bound: last zero used must exceed 1");

    BigReal pair_sum(0, digits);
    BigReal recip_sq_sum = 1 / (g1 * g1);
    for (size_t j = 1; j + 1 < n; ++j) {  // zeros gamma_2 .. gamma_{N-1}
        BigReal gj = zl.gammas[j].round_to(digits);
        BigReal p = gj + g1, m = gj - g1;
        pair_sum += 2 * (1 / (p * p) + 1 / (m * m));
        recip_sq_sum += 1 / (gj * gj);
    }
    BigReal y2 = y * y;
    BigReal one_m = 1 - y2;
    BigReal factor = (1 + y2) / (one_m * one_m);
    BigReal tail = -factor * (2 * (mp.xi2 / mp.xi0) + 4 * recip_sq_sum);
    return pair_sum + tail;
}

}  // namespace detail

// Literal bound: tail factor at y = gamma_1.
inline BigReal g0_bound(const ZeroList& zl, const MomentPair& mp) {
    const BigReal g1 = zl.gammas.empty() ? BigReal(mp.xi0.digits())
                                         : zl.gammas.front().round_to(mp.xi0.digits());
    return detail::g0_bound_with_tail_at(zl, mp, g1);
}

// Sharpened tail: gamma_j >= gamma_N for the omitted zeros, so the factor
// may be taken at y = gamma_1/gamma_N; still an upper bound on g(0) and
// <= g0_bound (equality as gamma_N -> 1).
inline BigReal g0_bound_refined(const ZeroList& zl, const MomentPair& mp) {
    if (zl.count() < 2) throw std::domain_error("g0_bound: need at least two zeros");
    const int digits = mp.xi0.digits();
    const BigReal y = zl.gammas.front().round_to(digits) / zl.gammas.back().round_to(digits);
    return detail::g0_bound_with_tail_at(zl, mp, y);
}

// Truncated direct sum for g(0) over the listed zeros; underestimates g(0)
// and sandwiches the bounds in diagnostics and tests.
inline BigReal g0_direct_partial(const ZeroList& zl, int digits) {
    if (zl.gammas.empty()) throw std::domain_error("g0_direct_partial: empty list");
    const BigReal g1 = zl.gammas.front().round_to(digits);
    BigReal sum(0, digits);
    for (size_t j = 1; j < zl.count(); ++j) {
        BigReal gj = zl.gammas[j].round_to(digits);
        BigReal p = gj + g1, m = gj - g1;
        sum += 2 * (1 / (p * p) + 1 / (m * m));
    }
    return sum;
}

// lambda = ((1 - 5 gamma_1^2 g0)^{4/5} - 1) / (8 g0); requires the Lowdef
// condition 5 gamma_1^2 g0 < 1.
inline BigReal lambda_bound(const BigReal& gamma1, const BigReal& g0) {
    check_same_precision(gamma1, g0);
    const int digits = gamma1.digits();
    if (!(g0 > 0)) throw std::domain_error("lambda: g0 must be positive");
    BigReal coeff(5, digits);
    BigReal u = coeff * (gamma1 * gamma1) * g0;
    if (!(u < 1)) throw std::domain_error("Lowdef condition fails: 5 gamma_1^2 g(0) >= 1");
    BigReal expo = BigReal(4, digits) / BigReal(5, digits);
    return (pow(1 - u, expo) - 1) / (8 * g0);
}

// Generalized bound under f' > -c f^2:
// lambda_c = ((1 - (c+2)/2 gamma_1^2 f0)^{c/(c+2)} - 1) / (c f0).
// Specializing c = 8 reproduces lambda exactly (same operation sequence).
inline BigReal lambda_c(const BigReal& gamma1, const BigReal& f0, const BigReal& c) {
    check_same_precision(gamma1, f0);
    if (!(c > 0)) throw std::domain_error("lambda_c: c must be positive");
    if (!(f0 > 0)) throw std::domain_error("lambda_c: f0 must be positive");
    BigReal coeff = (c + 2) / 2;
    BigReal u = coeff * (gamma1 * gamma1) * f0;
    if (!(u < 1)) throw std::domain_error("lambda_c admissibility fails: (c+2)/2 gamma_1^2 f(0) >= 1");
    BigReal expo = c / (c + 2);
    return (pow(1 - u, expo) - 1) / (c * f0);
}

// d lambda / d g0, used by the adaptive zero-count loop; negative on the
// admissible region (lambda decreases as the g(0) bound loosens).
inline BigReal lambda_g0_derivative(const BigReal& gamma1, const BigReal& g0) {
    const int digits = gamma1.digits();
    BigReal g1sq = gamma1 * gamma1;
    BigReal u = 5 * g1sq * g0;
    BigReal fifth = pow(1 - u, BigReal(1, digits) / 5);
    return (g1sq * g0 + fifth - 1) / (8 * g0 * g0 * fifth);
}

// RMT-normalized bound: g(0) <= 4 (1 + yt^2)/(1 - yt^2)^2 sum_{j>=2} gamma_j^{-2}
// under the hypothesis gamma~_j >= 1 for j >= 2 (caller's responsibility).
inline BigReal rmt_g0_bound(const BigReal& zero_square_sum, const BigReal& gamma1_tilde) {
    check_same_precision(zero_square_sum, gamma1_tilde);
    if (!(gamma1_tilde < 1))
        throw std::domain_error("rmt_g0_bound: requires gamma1_tilde < 1");
    BigReal y2 = gamma1_tilde * gamma1_tilde;
    BigReal om = 1 - y2;
    return 4 * (1 + y2) / (om * om) * zero_square_sum;
}

struct Low3Result {
    BigReal lhs;  // -1/2 (log L)''(0)
    BigReal rhs;  // 21/20 gamma_1^{-2} - 1/5 log(D/2pi)^2
    bool gamma2_tilde_ok = false;
    bool is_low = false;
};

inline Low3Result low3_classify(const MomentPair& mp, const BigReal& gamma1, const BigReal& gamma2,
                                long d) {
    const int digits = mp.xi0.digits();
    Low3Result r;
    // Reference-table convention: lhs = sum_j gamma_j^{-2} + (1/8) psi'(3/4)
    // = -1/2 (Xi''/Xi(0) - (1/4) psi'(3/4)).  Note this sits psi'(3/4)/4
    // ABOVE the analytic -1/2 (log Z)''(0) = -1/2 (log L)''(0), so a
    // discriminant passing this test satisfies the underlying inequality
    // with extra room; the implication chain to the Lowdef condition is
    // checked in the tests either way.
    r.lhs = -(mp.xi2 / mp.xi0 - trigamma_quarter(digits)) / 2;
    BigReal logd = log(BigReal(d, digits) / (2 * BigReal::pi(digits)));
    r.rhs = BigReal(21, digits) / 20 / (gamma1 * gamma1) - logd * logd / 5;
    r.gamma2_tilde_ok = gamma2 * logd >= 1;
    r.is_low = r.gamma2_tilde_ok && r.lhs < r.rhs;
    return r;
}

// Zero-list policy for the g(0) bound.  `minimal` uses exactly the zeros the
// bound formula requires (up to the first one above 1); this is the default
// and reproduces the reference tables.  `fixed_count` pulls the requested
// number of zeros into the explicit pair sum (tighter bounds on request).
// `adaptive_slack` extends the list until the tail-induced slack on lambda
// falls below lambda_slack_rel relative.
enum class ZeroPolicy { minimal, fixed_count, adaptive_slack };

struct AnalyzeConfig {
    int precision = 30;
    std::string eps = "5e-16";
    ZeroPolicy zero_policy = ZeroPolicy::minimal;
    long zero_count = 0;       // for ZeroPolicy::fixed_count
    std::string tol = "1e-9";  // bracket refinement tolerance
    double lambda_slack_rel = 1e-4;  // for ZeroPolicy::adaptive_slack
    long zero_count_cap = 5000;
    long table_limit = KroneckerCharacter::kDefaultTableLimit;
    QuadOptions quad{};

    void validate() const {
        if (precision < 17) throw config_error("precision must be >= 17 digits");
        BigReal e(eps, precision);
        if (e < pow(BigReal(10, precision), 3 - precision))
            throw config_error("eps below 10^(3-precision)");
        BigReal t(tol, precision);
        if (!(t > 0)) throw config_error("tol must be positive");
        if (zero_policy == ZeroPolicy::fixed_count && zero_count < 2)
            throw config_error("fixed_count policy needs zero_count >= 2");
    }
};

struct LowReport {
    long disc = 0;
    BigReal gamma1, gamma1_tilde, gamma2_tilde;
    BigReal g0_bound;  // the certified upper bound on g(0) used for lambda
    BigReal lowdef_u;  // 5 gamma_1^2 g0_bound
    std::optional<BigReal> lambda;
    bool satisfies_lowdef = false;
    BigReal low3_lhs, low3_rhs;
    bool is_low = false;
    long zeros_used = 0;
    int precision = 0;
    BigReal residual;
    std::string stage_error;  // empty on success

    bool ok() const noexcept { return stage_error.empty(); }

    // Stable JSON with numbers as decimal strings (lossless at precision).
    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["disc"] = disc;
        j["gamma1"] = gamma1.digits() ? gamma1.str() : "";
        j["gamma1_tilde"] = gamma1_tilde.digits() ? gamma1_tilde.str() : "";
        j["gamma2_tilde"] = gamma2_tilde.digits() ? gamma2_tilde.str() : "";
        j["g0_bound"] = g0_bound.digits() ? g0_bound.str() : "";
        j["lowdef_u"] = lowdef_u.digits() ? lowdef_u.str() : "";
        if (lambda)
            j["lambda"] = lambda->str();
        else
            j["lambda"] = nullptr;
        j["satisfies_lowdef"] = satisfies_lowdef;
        j["low3_lhs"] = low3_lhs.digits() ? low3_lhs.str() : "";
        j["low3_rhs"] = low3_rhs.digits() ? low3_rhs.str() : "";
        j["is_low"] = is_low;
        j["zeros_used"] = zeros_used;
        j["precision"] = precision;
        j["residual"] = residual.digits() ? residual.str() : "";
        j["stage_error"] = stage_error;
        return j;
    }
};

// Full pipeline: moments -> zeros -> certify -> g0 bound -> lambda -> Low3.
// Stage failures are recorded in the report, never silently swallowed.
// An imported zero list (external package cross-validation) replaces the
// scan when provided.
inline LowReport analyze(const FundamentalDiscriminant& disc, const AnalyzeConfig& cfg,
                         const ZeroList* imported = nullptr) {
    cfg.validate();
    LowReport rep;
    rep.disc = disc.neg_d;
    rep.precision = cfg.precision;
    const int digits = cfg.precision;
    std::string stage = "setup";
    try {
        BigReal eps(cfg.eps, digits);
        auto grid = std::make_shared<PhiGrid>(KroneckerCharacter(disc, cfg.table_limit), digits,
                                              eps, cfg.quad);
        XiEvaluator xi(grid);

        stage = "moments";
        MomentPair mp = xi.moments();

        stage = "zeros";
        ZeroList zl;
        if (imported) {
            if (imported->disc.neg_d != disc.neg_d)
                throw config_error("imported zero list belongs to another discriminant");
            zl = *imported;
        } else {
            ZeroSearchOptions zopt;
            zopt.tol = BigReal(cfg.tol, digits);
            zopt.certify_completeness = false;  // certified below, against mp
            ZeroScanner scan(xi, zopt);
            // minimal legal list first: at least two zeros, last one above 1
            scan.extend_to_count(2);
            while (!(scan.list().gammas.back() > 1))
                scan.extend_to_count(static_cast<long>(scan.list().count()) + 1);
            if (cfg.zero_policy == ZeroPolicy::fixed_count) {
                scan.extend_to_count(cfg.zero_count);
            } else if (cfg.zero_policy == ZeroPolicy::adaptive_slack) {
                const BigReal reachable = scan.resolvable_height();
                while (static_cast<long>(scan.list().count()) < cfg.zero_count_cap) {
                    ZeroList zl_now = scan.list();
                    BigReal g0b = g0_bound(zl_now, mp);
                    BigReal g0d = g0_direct_partial(zl_now, digits);
                    BigReal slack_g0 = g0b - g0d;
                    BigReal g1 = zl_now.gammas.front().round_to(digits);
                    BigReal u = 5 * g1 * g1 * g0b;
                    if (!(u < 1)) break;  // Lowdef fails; more zeros cannot rescue it
                    BigReal lam = lambda_bound(g1, g0b);
                    BigReal slack_lam = abs(lambda_g0_derivative(g1, g0b)) * slack_g0;
                    if (slack_lam <= BigReal::from_double(cfg.lambda_slack_rel, digits) * abs(lam))
                        break;
                    BigReal next_h = min(2 * zl_now.gammas.back().round_to(digits), reachable);
                    if (!(next_h > scan.scanned_to())) break;  // precision floor reached
                    scan.extend_to_height(next_h);
                }
            }
            zl = scan.take();
        }
        rep.zeros_used = static_cast<long>(zl.count());

        stage = "certify";
        certify(zl, mp);
        rep.residual = zl.residual;
        if (zl.residual_negative_anomaly)
            throw incomplete_zero_list("sum-rule residual negative beyond error budget",
                                       BigReal(0, digits), zl.gammas.back());

        BigReal logd = log(BigReal(disc.d, digits) / (2 * BigReal::pi(digits)));
        rep.gamma1 = zl.gammas.front().round_to(digits);
        rep.gamma1_tilde = rep.gamma1 * logd;
        if (zl.count() >= 2) rep.gamma2_tilde = zl.gammas[1].round_to(digits) * logd;

        stage = "g0_bound";
        rep.g0_bound = g0_bound(zl, mp);
        rep.lowdef_u = 5 * rep.gamma1 * rep.gamma1 * rep.g0_bound;

        stage = "lambda";
        if (rep.lowdef_u < 1) {
            rep.lambda = lambda_bound(rep.gamma1, rep.g0_bound);
            rep.satisfies_lowdef = true;
        }

        stage = "low3";
        if (zl.count() < 2) throw std::domain_error("low3 requires the first two zeros");
        Low3Result l3 = low3_classify(mp, rep.gamma1, zl.gammas[1].round_to(digits), disc.d);
        rep.low3_lhs = l3.lhs;
        rep.low3_rhs = l3.rhs;
        rep.is_low = l3.is_low;
    } catch (const std::exception& e) {
        rep.stage_error = stage + ": " + e.what();
    }
    return rep;
}

// Strongest lower bound on Lambda_Kr across reports (max of the lambdas).
inline BigReal best_bound(const std::vector<LowReport>& reports) {
    const BigReal* best = nullptr;
    for (const auto& r : reports)
        if (r.lambda && (best == nullptr || *r.lambda > *best)) best = &*r.lambda;
    if (!best) throw numerical_error("best_bound: no report carries a lambda");
    return *best;
}

}  // namespace lowdisc

#endif  // LOWDISC_NEWMAN_HPP
